"""Structured verification results shared by all suites."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


def jsonable(x: Any) -> Any:
    """Convert witnesses (field elements, fractions, tuples, numpy ints) to JSON values."""
    import numpy as np

    from .base_arith import FFElem, OKElem

    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(jsonable(v) for v in x)
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, FFElem):
        return list(x.c)
    if isinstance(x, OKElem):
        return list(x.c)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, float) and x == float("inf"):
        return "inf"
    if hasattr(x, "serialize"):
        return jsonable(x.serialize())
    return x


@dataclass
class CheckReport:
    id: str
    params: Dict[str, Any]
    status: str
    witness: Dict[str, Any] = field(default_factory=dict)
    ms: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "params": jsonable(self.params),
            "status": self.status,
            "witness": jsonable(self.witness),
            "ms": self.ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(d["id"], d["params"], d["status"], d.get("witness", {}), d.get("ms"))

    def sort_key(self):
        return (self.id, json.dumps(jsonable(self.params), sort_keys=True))


def check(id_: str, params: dict, ok: bool, witness: Optional[dict] = None) -> CheckReport:
    return CheckReport(id_, params, PASS if ok else FAIL, witness or {})
