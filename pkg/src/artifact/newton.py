"""Slope data of rank-1 points: membership in the generic locus and its component."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .base_arith import ParameterError
from .report import CheckReport, check


def vp(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ParameterError("valuation of zero")
    k, n, d = 0, x.numerator, x.denominator
    while n % p == 0:
        n //= p
        k += 1
    while d % p == 0:
        d //= p
        k -= 1
    return k


def prime_to_p(x: Fraction, p: int) -> Fraction:
    return Fraction(x) / Fraction(p) ** vp(x, p)


@dataclass(frozen=True)
class ValuationTuple:
    p: int
    v: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(Fraction(x) for x in self.v))
        if not self.v:
            raise ParameterError("empty valuation tuple")
        if any(x <= 0 for x in self.v):
            raise ParameterError("valuations must be positive")

    @property
    def f(self) -> int:
        return len(self.v)

    @property
    def q(self) -> int:
        return self.p ** self.f


@dataclass(frozen=True)
class ComponentWitness:
    """v_i = c p^{sigma^{-1}(i) + f m_i}; the component index is n_i = sigma^{-1}(i) + f m_i."""

    sigma: Tuple[int, ...]  # sigma[k] = i with sigma^{-1}(i) = k
    m: Tuple[int, ...]
    c: Fraction

    @property
    def sigma_inv(self) -> Tuple[int, ...]:
        inv = [0] * len(self.sigma)
        for k, i in enumerate(self.sigma):
            inv[i] = k
        return tuple(inv)

    @property
    def index(self) -> Tuple[int, ...]:
        f = len(self.m)
        return tuple(k + f * mi for k, mi in zip(self.sigma_inv, self.m))

    def values(self, p: int) -> Tuple[Fraction, ...]:
        return tuple(self.c * Fraction(p) ** n for n in self.index)

    def serialize(self) -> dict:
        return {"sigma": list(self.sigma), "m": list(self.m), "c": self.c, "index": list(self.index)}


def slope_multiset(v: ValuationTuple, window: Tuple[Fraction, Fraction]) -> List[Fraction]:
    """All (q-1) v_i q^n inside [lo, hi], with multiplicity, sorted."""
    lo, hi = Fraction(window[0]), Fraction(window[1])
    if not lo < hi:
        raise ParameterError("empty window")
    if lo <= 0:
        raise ParameterError("window must be positive")
    q = v.q
    out = []
    for x in v.v:
        s = (q - 1) * x
        while s >= lo:
            s /= q
        while s < lo:
            s *= q
        while s <= hi:
            out.append(s)
            s *= q
    return sorted(out)


def classify_component(v: ValuationTuple) -> Optional[ComponentWitness]:
    """Witness iff the union of the f slope families is one family {c' p^n}; c is prime to p."""
    p, f = v.p, v.f
    c = prime_to_p(v.v[0], p)
    if any(prime_to_p(x, p) != c for x in v.v):
        return None
    e = [vp(x, p) for x in v.v]
    res = [x % f for x in e]
    if sorted(res) != list(range(f)):
        return None
    sigma = [0] * f
    for i, k in enumerate(res):
        sigma[k] = i
    return ComponentWitness(tuple(sigma), tuple(x // f for x in e), c)


def renormalize(w: ComponentWitness, p: int, k: int) -> ComponentWitness:
    """Same point with scale c q^k: the Z-diagonal shift m -> m - k."""
    f = len(w.m)
    return ComponentWitness(w.sigma, tuple(x - k for x in w.m), w.c * Fraction(p) ** (f * k))


def same_component(a: ComponentWitness, b: ComponentWitness, p: int) -> bool:
    """Equal up to the Z-diagonal normalization."""
    f = len(a.m)
    if a.sigma != b.sigma:
        return False
    diffs = {x - y for x, y in zip(a.m, b.m)}
    if len(diffs) != 1:
        return False
    k = diffs.pop()
    return b.c == a.c * Fraction(p) ** (f * k)


def act_group(v: ValuationTuple, d: Sequence[int], sigma: Sequence[int]) -> ValuationTuple:
    """(p^{d_i}) acts through [p] on each t_i (v -> q^{d_i} v), sigma permutes slots: v'_i = q^{d_i} v_{sigma^{-1}(i)}."""
    f = v.f
    if len(d) != f or sorted(sigma) != list(range(f)):
        raise ParameterError("group element has the wrong shape")
    inv = [0] * f
    for k, i in enumerate(sigma):
        inv[i] = k
    q = Fraction(v.q)
    return ValuationTuple(v.p, tuple(q ** int(d[i]) * v.v[inv[i]] for i in range(f)))


def act_index(index: Sequence[int], d: Sequence[int], sigma: Sequence[int], f: int) -> Tuple[int, ...]:
    """U_n -> U_{n'} with n'_i = n_{sigma^{-1}(i)} + f d_i."""
    inv = [0] * f
    for k, i in enumerate(sigma):
        inv[i] = k
    return tuple(index[inv[i]] + f * int(d[i]) for i in range(f))


# ---------------------------------------------------------------------------
# brute-force oracle

def oracle_window(v: ValuationTuple, cycles: int = 3) -> Tuple[Fraction, Fraction]:
    """Window covering the spread max v / min v plus the requested number of full q-cycles."""
    lo = (v.q - 1) * min(v.v)
    spread = max(v.v) / min(v.v)
    return lo, lo * spread * Fraction(v.q) ** cycles


def oracle_member(v: ValuationTuple, cycles: int = 3) -> Tuple[bool, dict]:
    """Decide membership by listing slopes in the window and testing for a single p-geometric run."""
    lo, hi = oracle_window(v, cycles)
    s = slope_multiset(v, (lo, hi))
    p = v.p
    ratios_ok = all(b == a * p for a, b in zip(s, s[1:]))
    ends_ok = bool(s) and s[0] < lo * p and s[-1] * p > hi
    return ratios_ok and ends_ok, {"window": [lo, hi], "count": len(s)}


def random_tuple(p: int, f: int, rng: np.random.Generator, member_bias: float = 0.5) -> ValuationTuple:
    """Random positive rational tuples, half built as members and half perturbed."""
    c = Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 40)))
    c = prime_to_p(c, p)
    kind = rng.random()
    if kind < member_bias:
        perm = rng.permutation(f)
        m = rng.integers(-2, 3, f)
        e = [int(perm[i]) + f * int(m[i]) for i in range(f)]
        return ValuationTuple(p, tuple(c * Fraction(p) ** x for x in e))
    if kind < member_bias + 0.25:
        # p-power ratios with a repeated residue
        e = [int(x) for x in rng.integers(-4, 5, f)]
        return ValuationTuple(p, tuple(c * Fraction(p) ** x for x in e))
    vals = tuple(Fraction(int(rng.integers(1, 60)), int(rng.integers(1, 60))) for _ in range(f))
    return ValuationTuple(p, vals)


def verify_newton(p: int, fs: Sequence[int] = (2, 3), n: int = 500, n_group: int = 100,
                  seed: int = 0) -> List[CheckReport]:
    reports = []
    rng = np.random.default_rng(seed)
    for f in fs:
        bad, members = [], 0
        for _ in range(n):
            v = random_tuple(p, f, rng)
            w = classify_component(v)
            truth, info = oracle_member(v)
            ok = (w is not None) == truth and (w is None or w.values(p) == v.v)
            members += w is not None
            if not ok:
                bad.append({"v": list(v.v), "classified": w, "oracle": truth, **info})
        reports.append(check("newton.oracle", {"p": p, "f": f, "samples": n}, not bad,
                             {"mismatch": bad[:3]} if bad else {"members": members,
                                                                 "window": "spread * q^3"}))
        bad = []
        for _ in range(n_group):
            v = random_tuple(p, f, rng)
            d = [int(x) for x in rng.integers(-2, 3, f)]
            sg = [int(x) for x in rng.permutation(f)]
            w0, w1 = classify_component(v), classify_component(act_group(v, d, sg))
            ok = (w0 is None) == (w1 is None)
            if ok and w0 is not None:
                ok = w1.index == act_index(w0.index, d, sg, f)
            if not ok:
                bad.append({"v": list(v.v), "d": d, "sigma": sg, "before": w0, "after": w1})
        reports.append(check("newton.equivariance", {"p": p, "f": f, "samples": n_group}, not bad,
                             {"mismatch": bad[:3]} if bad else {}))
        bad = []
        for _ in range(n_group):
            v = random_tuple(p, f, rng, member_bias=1.0)
            w = classify_component(v)
            k = int(rng.integers(-3, 4))
            alt = renormalize(w, p, k)
            if not (alt.values(p) == v.v and same_component(w, alt, p)):
                bad.append({"v": list(v.v), "k": k})
        reports.append(check("newton.uniqueness", {"p": p, "f": f, "samples": n_group}, not bad,
                             {"mismatch": bad[:3]} if bad else {}))
    return reports
