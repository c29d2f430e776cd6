"""Command-line driver: run verification suites and emit a sorted report.

Config file grammar: one ``key = value`` per line, ``#`` starts a comment,
keys are the long option names (``-`` or ``_``), ``suites`` is a comma list.
Command-line options override the file.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from .base_arith import ParameterError
from .report import FAIL, PASS, SKIPPED, CheckReport

SCHEMA = 1
SUITES = ("lt", "ring", "mu", "modules", "weights", "main", "newton")
ALL = ("lt", "ring", "mu", "weights", "main", "newton")
DEFAULT_DEGREE = {"lt": 40, "ring": 12, "modules": 60, "main": 60}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    suites: List[str] = field(default_factory=list)
    p: int = 29
    f: Optional[int] = None
    r: Optional[Tuple[int, ...]] = None
    type: str = "irreducible"
    lambda0: object = 1
    lambda1: object = 1
    degree: Optional[int] = None
    seed: int = 0
    allow_nongeneric: bool = False
    perturb: Optional[Tuple[int, int]] = None
    format: str = "json"
    out: Optional[str] = None
    timings: bool = False

    @property
    def rank(self) -> int:
        if self.f is not None:
            return self.f
        return len(self.r) if self.r else 2

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("format")
        d["f"] = self.rank
        return d


# ---------------------------------------------------------------------------
# parsing

def _int_tuple(s) -> Tuple[int, ...]:
    if isinstance(s, (list, tuple)):
        return tuple(int(x) for x in s)
    s = str(s).strip().strip("()[]")
    return tuple(int(x) for x in s.split(",") if x.strip())


def _scalar(s):
    """An int in F_p or a comma list of coefficients in the power basis of F."""
    if isinstance(s, (int, tuple)):
        return s
    t = _int_tuple(s)
    return t[0] if len(t) == 1 else t


def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _suites(s) -> List[str]:
    items = s if isinstance(s, (list, tuple)) else [x for x in str(s).replace(" ", "").split(",") if x]
    out = []
    for x in items:
        if x == "all":
            out.extend(ALL)
        elif x in SUITES:
            out.append(x)
        else:
            raise ConfigError(f"unknown suite {x!r}")
    return sorted(set(out), key=SUITES.index)


CONVERTERS = {
    "suites": _suites,
    "p": int,
    "f": int,
    "r": _int_tuple,
    "type": str,
    "lambda0": _scalar,
    "lambda1": _scalar,
    "degree": int,
    "seed": int,
    "allow_nongeneric": _bool,
    "perturb": _int_tuple,
    "format": str,
    "out": str,
    "timings": _bool,
}


def parse_config_file(text: str) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in CONVERTERS:
            raise ConfigError(f"line {n}: unknown key {k!r}")
        out[k] = v
    return out


def build_config(values: Dict[str, object]) -> RunConfig:
    kw = {}
    for k, v in values.items():
        try:
            kw[k] = CONVERTERS[k](v)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad value for {k}: {v!r} ({e})") from None
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Parameter checks that must pass before any suite runs."""
    if cfg.p == 2 or not sympy.isprime(cfg.p):
        raise ParameterError(f"p={cfg.p} must be an odd prime")
    if cfg.f is not None and cfg.f < 1:
        raise ParameterError("f must be positive")
    if cfg.r is not None and cfg.f is not None and len(cfg.r) != cfg.f:
        raise ParameterError(f"r has length {len(cfg.r)} but f={cfg.f}")
    if cfg.type not in ("irreducible", "reducible"):
        raise ParameterError(f"unknown type {cfg.type!r}")
    if cfg.degree is not None and cfg.degree < 2:
        raise ParameterError("degree must be at least 2")
    if cfg.perturb is not None and len(cfg.perturb) != 2:
        raise ParameterError("perturb takes mask,index")
    if cfg.format not in ("json", "text"):
        raise ParameterError(f"unknown format {cfg.format!r}")
    if {"weights", "main"} & set(cfg.suites):
        weight_params(cfg)
        if "main" in cfg.suites:
            n = cfg.degree or DEFAULT_DEGREE["main"]
            if n < 2 * (cfg.p - 1) + 2:
                raise ParameterError(f"degree must be at least {2 * (cfg.p - 1) + 2} for main")


def weight_params(cfg: RunConfig):
    from .serre_weights import WeightParams

    r = cfg.r if cfg.r is not None else (13,) * cfg.rank
    return WeightParams(cfg.p, r, cfg.type, lam=cfg.lambda0, lam0=cfg.lambda0, lam1=cfg.lambda1,
                        enforce_generic=not cfg.allow_nongeneric)


# ---------------------------------------------------------------------------
# execution

def run_suite(name: str, cfg: RunConfig) -> List[CheckReport]:
    from . import suites as S

    p, f, seed = cfg.p, cfg.rank, cfg.seed
    n = cfg.degree or DEFAULT_DEGREE.get(name)
    if name == "ring" and not cfg.degree:
        n = max(n, p + 2)
    if name == "lt":
        return S.suite_lt(p, f, n, seed)
    if name == "ring":
        return S.suite_ring(p, f, n, seed)
    if name == "mu":
        reps = S.suite_mu(p, f, seed)
        if f > 1:
            reps += [S.suite_lemma_coefficient(p, f), S.suite_h_basis(p, f)]
        return reps
    if name == "modules":
        return S.suite_modules(p, f, n, seed)
    if name == "weights":
        return S.suite_weights(weight_params(cfg))
    if name == "main":
        perturb = tuple(cfg.perturb) if cfg.perturb else None
        return S.suite_main(weight_params(cfg), n, seed, perturb_b=perturb)
    if name == "newton":
        return S.suite_newton(p, seed, (f,))
    raise ConfigError(f"unknown suite {name!r}")


def run_config(cfg: RunConfig) -> Tuple[List[CheckReport], int]:
    reports: List[CheckReport] = []
    for name in cfg.suites:
        t = time.perf_counter()
        got = run_suite(name, cfg)
        if not got:
            got = [CheckReport(f"{name}.empty", {"p": cfg.p, "f": cfg.rank}, SKIPPED)]
        if cfg.timings:
            total = round((time.perf_counter() - t) * 1000, 3)
            for r in got:
                if r.ms is None:
                    r.ms = total
        else:
            for r in got:
                r.ms = None
        reports.extend(got)
    reports.sort(key=CheckReport.sort_key)
    return reports, 1 if any(r.status == FAIL for r in reports) else 0


def summary(reports: Sequence[CheckReport]) -> dict:
    c = {s: sum(r.status == s for r in reports) for s in (PASS, FAIL, SKIPPED)}
    return {"total": len(reports), "passed": c[PASS], "failed": c[FAIL], "skipped": c[SKIPPED],
            "ok": c[FAIL] == 0}


def emit_report(reports: Sequence[CheckReport], cfg: RunConfig, fmt: str = "json") -> str:
    from .report import jsonable

    if fmt == "json":
        doc = {"schema": SCHEMA, "config": jsonable(cfg.echo()),
               "checks": [r.to_dict() for r in reports], "summary": summary(reports)}
        return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    lines = []
    for r in reports:
        mark = {PASS: "✓", FAIL: "✗", SKIPPED: "-"}[r.status]
        prm = json.dumps(jsonable(r.params), sort_keys=True)
        line = f"{mark} {r.id} {prm}"
        if r.status == FAIL:
            line += " " + json.dumps(jsonable(r.witness), sort_keys=True)
        if r.ms is not None:
            line += f" ({r.ms} ms)"
        lines.append(line)
    s = summary(reports)
    lines.append(f"{s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> Tuple[dict, List[CheckReport]]:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}")
    return doc, [CheckReport.from_dict(d) for d in doc["checks"]]


# ---------------------------------------------------------------------------
# entry point

def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description="Run exact verification suites.")
    ap.add_argument("suites", nargs="*", metavar="suite",
                    help="one or more of: " + ", ".join(SUITES + ("all",)))
    ap.add_argument("--config", help="flat key = value file; options given here win")
    ap.add_argument("--p", type=str)
    ap.add_argument("--f", type=str)
    ap.add_argument("--r", type=str, help="comma list, e.g. 12,13")
    ap.add_argument("--type", choices=("irreducible", "reducible"))
    ap.add_argument("--lambda0", type=str, help="scalar: int or comma list of coefficients")
    ap.add_argument("--lambda1", type=str)
    ap.add_argument("--degree", type=str, help="truncation degree N")
    ap.add_argument("--seed", type=str)
    ap.add_argument("--allow-nongeneric", action="store_const", const="true", default=None)
    ap.add_argument("--perturb", type=str, help="main suite negative control: mask,index")
    ap.add_argument("--timings", action="store_const", const="true", default=None)
    ap.add_argument("--format", choices=("json", "text"))
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        values: Dict[str, object] = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                values.update(parse_config_file(fh.read()))
        cli = {k: v for k, v in vars(args).items() if k not in ("config", "suites") and v is not None}
        values.update(cli)
        if args.suites:
            values["suites"] = args.suites
        cfg = build_config(values)
        reports, status = run_config(cfg)
    except (ConfigError, ParameterError, OSError) as e:
        print(f"artifact: error: {e}", file=sys.stderr)
        return 2
    text = emit_report(reports, cfg, cfg.format)
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as e:
        print(f"artifact: error: {e}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
