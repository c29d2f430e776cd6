"""Weight combinatorics for generic semisimple two-dimensional representations.

Subsets J of {0..f-1} label the weights; everything here is exact integer,
rational or finite-field arithmetic.  Weight entries carry a symbolic type
(``"r"``, ``"r+1"``, ``"p-2-r"`` ...) so that the lookup tables for the shift
can be compared structurally rather than by value.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from .base_arith import GF, FFElem, ParameterError
from .report import SKIPPED, CheckReport, check

REDUCIBLE, IRREDUCIBLE = "reducible", "irreducible"

# type name -> (sign, offset): value is r_j + offset (sign 1) or p + offset - r_j (sign -1)
STYPES: Dict[str, Tuple[int, int]] = {
    "r": (1, 0),
    "r+1": (1, 1),
    "r-1": (1, -1),
    "p-1-r": (-1, -1),
    "p-2-r": (-1, -2),
    "p-3-r": (-1, -3),
}


class GenericityError(ParameterError):
    pass


def stype_value(t: str, r: int, p: int) -> int:
    sign, off = STYPES[t]
    return r + off if sign == 1 else p + off - r


def genericity_violations(p: int, r: Sequence[int], kind: str) -> List[str]:
    """Failed bounds of the genericity window, one message per offending index."""
    f = len(r)
    out = []
    for j, rj in enumerate(r):
        if kind == IRREDUCIBLE and j == 0:
            lo, hi = max(13, 2 * f), p - max(14, 2 * f + 1)
        else:
            lo, hi = max(12, 2 * f - 1), p - max(15, 2 * f + 2)
        if not lo <= rj <= hi:
            out.append(f"r_{j}={rj} outside [{lo}, {hi}]")
    return out


@dataclass(frozen=True)
class WeightParams:
    """p, the vector r, the representation type and its unramified scalars.

    Scalars are integers or coefficient tuples of F = F_{p^{f e}}.
    """

    p: int
    r: Tuple[int, ...]
    kind: str = IRREDUCIBLE
    lam: object = 1
    lam0: object = 1
    lam1: object = 1
    enforce_generic: bool = True
    e: int = 2

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if self.kind not in (REDUCIBLE, IRREDUCIBLE):
            raise ParameterError(f"unknown type {self.kind!r}")
        if self.p < 3:
            raise ParameterError("p must be an odd prime")
        # f = 1 only makes sense for split representations
        if self.f < (2 if self.kind == IRREDUCIBLE else 1):
            raise ParameterError("f too small for this representation type")
        if self.enforce_generic:
            bad = genericity_violations(self.p, self.r, self.kind)
            if bad:
                raise GenericityError("non-generic: " + "; ".join(bad))
        for s in self.scalars().values():
            if s.is_zero():
                raise ParameterError("scalars must be nonzero")

    @property
    def f(self) -> int:
        return len(self.r)

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def generic(self) -> bool:
        return not genericity_violations(self.p, self.r, self.kind)

    @cached_property
    def field(self) -> GF:
        return _field(self.p, self.f * self.e)

    def scalars(self) -> Dict[str, FFElem]:
        F = self.field
        if self.kind == IRREDUCIBLE:
            return {"lam": F(self.lam)}
        return {"lam0": F(self.lam0), "lam1": F(self.lam1)}

    @property
    def h_list(self) -> Tuple[int, ...]:
        return tuple(x + 1 for x in self.r)

    @property
    def h(self) -> int:
        return self.h_from(0)

    def h_from(self, i: int) -> int:
        """h^{[i]} = sum_{k >= i} p^{k-i} (r_k + 1)."""
        return sum(self.p ** (k - i) * (self.r[k] + 1) for k in range(i, self.f))

    def det_p(self) -> FFElem:
        """det of the representation at p (omega_f(p) = 1)."""
        s = self.scalars()
        if self.kind == IRREDUCIBLE:
            return -(s["lam"] * s["lam"])
        return s["lam0"] * s["lam1"]

    def describe(self) -> dict:
        d = {"p": self.p, "f": self.f, "r": list(self.r), "type": self.kind}
        if not self.generic:
            d["non_generic"] = True
        if self.kind == REDUCIBLE:
            d["wraparound"] = "inferred"
        return d


_FIELDS: Dict[Tuple[int, int], GF] = {}


def _field(p: int, n: int) -> GF:
    if (p, n) not in _FIELDS:
        _FIELDS[(p, n)] = GF(p, n)
    return _FIELDS[(p, n)]


Subset = FrozenSet[int]


def _subset(J) -> Subset:
    return frozenset(int(j) for j in J)


def _check_subset(params: WeightParams, J) -> Subset:
    J = _subset(J)
    if any(not 0 <= j < params.f for j in J):
        raise ParameterError(f"J={sorted(J)} not inside 0..{params.f - 1}")
    return J


def all_subsets(f: int) -> List[Subset]:
    return [frozenset(c) for k in range(f + 1) for c in itertools.combinations(range(f), k)]


def bitmask(J) -> int:
    return sum(1 << j for j in J)


# ---------------------------------------------------------------------------
# dictionary J -> s

def weight_types(params: WeightParams, J) -> Tuple[str, ...]:
    J = _check_subset(params, J)
    f = params.f
    out = []
    for j in range(f):
        inj, prev = j in J, (j - 1) % f in J
        if params.kind == IRREDUCIBLE and j == 0:
            t = {(False, False): "r", (False, True): "r-1",
                 (True, False): "p-2-r", (True, True): "p-1-r"}[(inj, prev)]
        else:
            t = {(False, False): "r", (False, True): "r+1",
                 (True, False): "p-2-r", (True, True): "p-3-r"}[(inj, prev)]
        out.append(t)
    return tuple(out)


def weight_from_subset(params: WeightParams, J) -> Tuple[int, ...]:
    """The weight s = (s_0..s_{f-1}) attached to J."""
    types = weight_types(params, J)
    return tuple(stype_value(t, params.r[j], params.p) for j, t in enumerate(types))


def delta_subset(params: WeightParams, J) -> Subset:
    J = _check_subset(params, J)
    f = params.f
    out = {j for j in range(f - 1) if j + 1 in J}
    top = (0 in J) if params.kind == REDUCIBLE else (0 not in J)
    if top:
        out.add(f - 1)
    return frozenset(out)


@dataclass(frozen=True)
class DeltaStep:
    J: Subset
    J_next: Subset
    s_next: Tuple[int, ...]
    c1: Tuple[int, ...]
    J_max: Subset


def delta_step(params: WeightParams, J) -> DeltaStep:
    J = _check_subset(params, J)
    Jn = delta_subset(params, J)
    s_next = weight_from_subset(params, Jn)
    jmax = frozenset(J ^ Jn)
    c1 = tuple(s_next[j] if j in jmax else params.p - 1 for j in range(params.f))
    return DeltaStep(J, Jn, s_next, c1, jmax)


# Lookup tables: s_i type -> (type of s'_{i-1}, i-1 in J^max, c_{1,i-1} as "p-1" or a type)
SHIFT_TABLES: Dict[str, Dict[str, Tuple[str, bool, str]]] = {
    "irr0": {
        "r": ("p-2-r", True, "p-2-r"),
        "r-1": ("p-3-r", False, "p-1"),
        "p-2-r": ("r", False, "p-1"),
        "p-1-r": ("r+1", True, "r+1"),
    },
    "irr1": {
        "r": ("r-1", False, "p-1"),
        "r+1": ("r", True, "r"),
        "p-2-r": ("p-1-r", True, "p-1-r"),
        "p-3-r": ("p-2-r", False, "p-1"),
    },
    "irr>1": {
        "r": ("r", False, "p-1"),
        "r+1": ("r+1", True, "r+1"),
        "p-2-r": ("p-2-r", True, "p-2-r"),
        "p-3-r": ("p-3-r", False, "p-1"),
    },
    "red": {
        "r": ("r", False, "p-1"),
        "r+1": ("r+1", True, "r+1"),
        "p-2-r": ("p-2-r", True, "p-2-r"),
        "p-3-r": ("p-3-r", False, "p-1"),
    },
}


def _table_name(params: WeightParams, i: int) -> str:
    if params.kind == REDUCIBLE:
        return "red"
    return "irr0" if i == 0 else ("irr1" if i == 1 else "irr>1")


# ---------------------------------------------------------------------------
# orbits and the a_n recursion

@dataclass
class WeightOrbit:
    """Orbit data of the weight attached to J under the shift."""

    params: WeightParams
    J: Subset
    s: Tuple[int, ...]
    orbit: List[Subset]
    steps: List[DeltaStep]

    @property
    def d(self) -> int:
        return len(self.orbit)

    @property
    def dprime(self) -> int:
        return self.d * self.params.f

    @property
    def m(self) -> int:
        return len(self.steps[0].J_max)

    def c_vector(self, n: int) -> Tuple[int, ...]:
        """c_n: built from the step sigma_{n-1} -> sigma_n."""
        if n < 1:
            raise ParameterError("c_n needs n >= 1")
        return self.steps[(n - 1) % self.d].c1

    @cached_property
    def _a_cache(self) -> List[Tuple[int, ...]]:
        return [tuple([0] * self.params.f)]

    @cached_property
    def closed_forms(self) -> Tuple[Fraction, ...]:
        return tuple(a_dprime_closed(self, i) for i in range(self.params.f))

    @cached_property
    def b(self) -> Tuple[int, ...]:
        return b_exponents(self.params, self.J)

    @cached_property
    def lambda_sigma(self) -> FFElem:
        return lambda_sigma(self.params, self)

    def serialize(self) -> dict:
        return {
            "J": bitmask(self.J),
            "s": list(self.s),
            "orbit": [bitmask(x) for x in self.orbit],
            "d": self.d,
            "dprime": self.dprime,
            "m": self.m,
            "c": [list(st.c1) for st in self.steps],
            "a_dprime": list(an_vector(self, self.dprime)),
            "closed": [str(x) for x in self.closed_forms],
            "b": list(self.b),
            "h": self.params.h,
            "h_i": [self.params.h_from(i) for i in range(self.params.f)],
        }


def orbit_of(params: WeightParams, J) -> WeightOrbit:
    J = _check_subset(params, J)
    orbit, steps, cur = [], [], J
    while True:
        orbit.append(cur)
        st = delta_step(params, cur)
        steps.append(st)
        cur = st.J_next
        if cur == J:
            break
        if len(orbit) > 2 * params.f:
            raise AssertionError("shift orbit longer than 2f")
    return WeightOrbit(params, J, weight_from_subset(params, J), orbit, steps)


def shift_vector(v: Sequence[int]) -> Tuple[int, ...]:
    """delta(v)_j = v_{j+1}."""
    return tuple(v[(j + 1) % len(v)] for j in range(len(v)))


def an_vector(orbit: WeightOrbit, n: int) -> Tuple[int, ...]:
    if n < 0:
        raise ParameterError("n must be >= 0")
    cache, p = orbit._a_cache, orbit.params.p
    while len(cache) <= n:
        k = len(cache)
        prev = shift_vector(cache[-1])
        c = orbit.c_vector(k)
        cache.append(tuple(p * x + y for x, y in zip(prev, c)))
    return cache[n]


def a_dprime_closed(orbit: WeightOrbit, i: int) -> Fraction:
    """Closed form of a_{d',i} / (1 - p^{d'}) from the weight type at i."""
    P = orbit.params
    p, q, f = P.p, P.q, P.f
    if not 0 <= i < f:
        raise ParameterError("index out of range")
    t = weight_types(P, orbit.J)[i]
    h, hi = Fraction(P.h), Fraction(P.h_from(i))
    pf = Fraction(p ** (f - i))
    if P.kind == IRREDUCIBLE:
        if i == 0:
            table = {"r": -1 + h / (1 + q), "r-1": Fraction(-1),
                     "p-2-r": Fraction(-1), "p-1-r": -h / (1 + q)}
        else:
            table = {"r": Fraction(-1), "r+1": hi - h * pf / (1 + q),
                     "p-2-r": -1 - hi + h * pf / (1 + q), "p-3-r": Fraction(-1)}
    else:
        table = {"r": Fraction(-1), "r+1": hi + h * pf / (1 - q),
                 "p-2-r": -1 - hi - h * pf / (1 - q), "p-3-r": Fraction(-1)}
    return table[t]


# ---------------------------------------------------------------------------
# b_J exponents and the twisted recurrence

def b_exponents(params: WeightParams, J) -> Tuple[int, ...]:
    types = weight_types(params, J)
    out = []
    for i, t in enumerate(types):
        hi = params.h_from(i)
        if params.kind == IRREDUCIBLE:
            val = {"r": 0, "r-1": 0, "p-3-r": 0, "p-2-r": -hi,
                   "p-1-r": -hi + 1, "r+1": hi + 1}[t]
        else:
            if i == 0:
                val = {"r": 0, "p-2-r": -hi, "r+1": 1, "p-3-r": -hi}[t]
            else:
                val = {"r": 0, "p-2-r": -hi, "r+1": hi + 1, "p-3-r": 0}[t]
        out.append(val)
    return tuple(out)


def i_vector(params: WeightParams, J) -> Tuple[int, ...]:
    """Indicator exponent: 1_J (irreducible) or 1 on the complement (reducible)."""
    J = _subset(J)
    if params.kind == IRREDUCIBLE:
        return tuple(int(j in J) for j in range(params.f))
    return tuple(int(j not in J) for j in range(params.f))


def twisted(params: WeightParams, J) -> bool:
    """Whether the Frobenius step out of J carries the (h, 0, ..., -ph) correction."""
    i0 = i_vector(params, J)[0]
    return i0 == 1 if params.kind == IRREDUCIBLE else i0 == 0


def b_recurrence(params: WeightParams, J, b: Optional[Sequence[int]] = None,
                 b_next: Optional[Sequence[int]] = None) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """(p delta(b_J) + (1-p) + c, b_{J'} + correction); equal when the recurrence holds."""
    st = delta_step(params, J)
    p, f, h = params.p, params.f, params.h
    b = b_exponents(params, J) if b is None else tuple(b)
    bn = b_exponents(params, st.J_next) if b_next is None else tuple(b_next)
    lhs = tuple(p * x + (1 - p) + c for x, c in zip(shift_vector(b), st.c1))
    corr = [0] * f
    if twisted(params, J):
        corr[0] += h
        corr[f - 1] -= p * h
    rhs = tuple(x + y for x, y in zip(bn, corr))
    return lhs, rhs


# ---------------------------------------------------------------------------
# lambda_sigma and the alpha sign system

def lambda_sigma(params: WeightParams, orbit: WeightOrbit) -> FFElem:
    d, f = orbit.d, params.f
    sign = (-1) ** (d * (f - 1))
    F = params.field
    if params.kind == IRREDUCIBLE:
        return F(sign) * (-params.det_p()) ** (d // 2)
    s = params.scalars()
    nJ = len(orbit.J)
    a, b = (f - nJ) * d, nJ * d
    if a % f or b % f:
        raise AssertionError("orbit length incompatible with |J|")
    return F(sign) * s["lam0"] ** (a // f) * s["lam1"] ** (b // f)


def ff_sqrt(x: FFElem) -> Optional[FFElem]:
    """Square root in a finite field of odd characteristic (Tonelli-Shanks), or None."""
    F = x.field
    if x.is_zero():
        return x
    order = F.order - 1
    if not (x ** (order // 2)).is_one():
        return None
    s, t = 0, order
    while t % 2 == 0:
        s, t = s + 1, t // 2
    z = F.gen  # primitive, hence a non-residue
    m, c, u, res = s, z ** t, x ** t, x ** ((t + 1) // 2)
    while not u.is_one():
        i, y = 0, u
        while not y.is_one():
            y, i = y * y, i + 1
        bb = c ** (2 ** (m - i - 1))
        m, c = i, bb * bb
        u, res = u * c, res * bb
    return res


def normalized_params(params: WeightParams) -> WeightParams:
    """Twist by an unramified character so that det(p) = 1."""
    F = params.field
    if params.kind == IRREDUCIBLE:
        lam = params.scalars()["lam"]
        c = ff_sqrt(F(-1) / (lam * lam))
        new = dict(lam=(lam * c).c)
    else:
        s = params.scalars()
        c = ff_sqrt(F.one / (s["lam0"] * s["lam1"]))
        if c is None:
            raise ParameterError("lam0*lam1 is not a square in F; increase e")
        new = dict(lam0=(s["lam0"] * c).c, lam1=(s["lam1"] * c).c)
    return WeightParams(params.p, params.r, params.kind, enforce_generic=False, e=params.e,
                        **{**dict(lam=params.lam, lam0=params.lam0, lam1=params.lam1), **new})


def frobenius_sign(params: WeightParams, J) -> FFElem:
    """epsilon_J in alpha_J mu_J = epsilon_J alpha_{J'} for det(p) = 1 data."""
    F, f = params.field, params.f
    base = F((-1) ** (f - 1))
    if params.kind == IRREDUCIBLE:
        return -base if twisted(params, J) else base
    s = params.scalars()
    return base * (s["lam0"] if twisted(params, J) else s["lam1"])


def solve_alpha(params: WeightParams, orbit: WeightOrbit) -> Tuple[List[FFElem], FFElem]:
    """Propagate alpha around the orbit with the default mu witness.

    Returns the alphas and the wrap-around ratio alpha_d / alpha_0 (1 iff solvable).
    """
    P = normalized_params(params)
    F = P.field
    lam = lambda_sigma(P, orbit)
    mus = [F.one] * (orbit.d - 1) + [lam.inverse()]
    alpha = [F.one]
    for J, mu in zip(orbit.orbit, mus):
        alpha.append(alpha[-1] * mu / frobenius_sign(P, J))
    return alpha[:-1], alpha[-1] / alpha[0]


# ---------------------------------------------------------------------------
# claims

def chi_exponent2(params: WeightParams, J) -> int:
    """Twice the exponent of chi_sigma."""
    s = weight_from_subset(params, J)
    p, q, f = params.p, params.q, params.f
    return sum(p ** i * (params.r[i] + s[i]) for i in range(f)) + (q - 1) * int(f - 1 in _subset(J))


def claim_b_target(params: WeightParams, J, i: int) -> Fraction:
    J = _subset(J)
    p, q, f, h = params.p, params.q, params.f, Fraction(params.h)
    ind = lambda j: int(j % f in J)
    if params.kind == IRREDUCIBLE:
        if i == 0:
            return h / (1 - q * q) * (q ** ind(f - 1) - q * q ** ind(0))
        return h * p ** (f - i) / (1 - q * q) * (q ** ind(i - 1) - q ** ind(i))
    if i == 0:
        return h / (1 - q) * (ind(f - 1) - q * ind(0))
    return h * p ** (f - i) / (1 - q) * (ind(i - 1) - ind(i))


def claim_b_table(params: WeightParams, J, i: int) -> Optional[Fraction]:
    """Per-type value of a_{d',i}/(1-p^{d'}) + 1 - b_{J,i} (irreducible only)."""
    if params.kind != IRREDUCIBLE:
        return None
    t = weight_types(params, J)[i]
    q, h = params.q, Fraction(params.h)
    if i == 0:
        return {"r": h / (1 + q), "r-1": Fraction(0), "p-2-r": h, "p-1-r": h * q / (1 + q)}[t]
    hp = h * params.p ** (params.f - i)
    return {"r": Fraction(0), "r+1": -hp / (1 + q), "p-2-r": hp / (1 + q), "p-3-r": Fraction(0)}[t]


def verify_weight_identities(params: WeightParams,
                             perturb: Optional[Callable[[Subset, Tuple[int, ...]], Tuple[int, ...]]] = None
                             ) -> List[CheckReport]:
    """Run the identity families over every subset J.

    ``perturb`` rewrites b_J before the recurrence and claim checks (negative controls).
    """
    p, f, q = params.p, params.f, params.q
    reports: List[CheckReport] = []
    base = params.describe()
    bvec = {}
    for J in all_subsets(f):
        b = b_exponents(params, J)
        bvec[J] = perturb(J, b) if perturb else b

    def add(name, J, ok, witness, i=None):
        prm = dict(base, J=bitmask(J))
        if i is not None:
            prm["i"] = i
        reports.append(check(f"weights.{name}", prm, ok, witness))

    for J in all_subsets(f):
        orb = orbit_of(params, J)
        types = weight_types(params, J)
        st = orb.steps[0]
        next_types = weight_types(params, st.J_next)

        # (1) lookup tables
        bad = []
        for i in range(f):
            want_t, want_in, want_c = SHIFT_TABLES[_table_name(params, i)][types[i]]
            k = (i - 1) % f
            got_c = st.c1[k]
            want_cv = p - 1 if want_c == "p-1" else stype_value(want_c, params.r[k], p)
            if (next_types[k], k in st.J_max, got_c) != (want_t, want_in, want_cv):
                bad.append({"i": i, "table": [want_t, want_in, want_cv],
                            "computed": [next_types[k], k in st.J_max, got_c]})
        add("shift_table", J, not bad, {"mismatch": bad[:3]} if bad else {"s": types})

        # orbit shape and J^max cardinality
        dshape = (orb.d % 2 == 0 and (2 * f) % orb.d == 0) if params.kind == IRREDUCIBLE \
            else f % orb.d == 0
        ms = {len(x.J_max) for x in orb.steps}
        add("orbit_shape", J, dshape and len(ms) == 1,
            {"d": orb.d, "orbit": [bitmask(x) for x in orb.orbit], "m": sorted(ms)})

        # (2) closed forms against the recursion, periodicity and growth
        dp = orb.dprime
        a1, a2 = an_vector(orb, dp), an_vector(orb, 2 * dp)
        bad = []
        for i in range(f):
            cf = orb.closed_forms[i]
            if cf * (1 - p ** dp) != a1[i]:
                bad.append({"i": i, "closed": str(cf), "recursion": a1[i]})
        add("closed_form", J, not bad, {"mismatch": bad} if bad else {"dprime": dp})
        per = all(a2[i] == p ** dp * a1[i] + a1[i] for i in range(f))
        norms = [sum(an_vector(orb, n)) for n in range(2 * dp + 1)]
        grow = orb.m == 0 or all(x < y for x, y in zip(norms, norms[1:]))
        mod = sum(p ** i * a1[i] for i in range(f)) % (q - 1) == 0
        add("recursion_shape", J, per and grow and mod,
            {"periodic": per, "increasing": grow, "sum_mod_q-1": mod})

        # (3) b_J recurrence
        lhs, rhs = b_recurrence(params, J, bvec[J], bvec[st.J_next])
        bad = [{"i": i, "lhs": lhs[i], "rhs": rhs[i]} for i in range(f) if lhs[i] != rhs[i]]
        add("b_recurrence", J, not bad,
            {"mismatch": bad, "twisted": twisted(params, J)} if bad else {"b": bvec[J], "twisted": twisted(params, J)})

        # (4) claim (a)
        two_e = chi_exponent2(params, J)
        rhs_a = sum(p ** i * (bvec[J][i] + params.r[i]) for i in range(f))
        ok = two_e % 2 == 0 and (two_e // 2 - rhs_a) % (q - 1) == 0
        add("claim_a", J, ok, {"chi_exponent": Fraction(two_e, 2), "b_side": rhs_a})

        # (5) claim (b)
        bad = []
        for i in range(f):
            val = orb.closed_forms[i] + 1 - bvec[J][i]
            tgt = claim_b_target(params, J, i)
            tab = claim_b_table(params, J, i)
            if val != tgt or (tab is not None and tab != val):
                bad.append({"i": i, "lhs": str(val), "rhs": str(tgt),
                            "table": None if tab is None else str(tab)})
        add("claim_b", J, not bad, {"mismatch": bad} if bad else {})

        # (6) orbit counts
        n_in = sum(1 for x in orb.orbit if 0 in x)
        if params.kind == IRREDUCIBLE:
            ok, w = 2 * n_in == orb.d, {"count": n_in, "d/2": orb.d // 2}
        else:
            ok = n_in * f == len(J) * orb.d and (orb.d - n_in) * f == (f - len(J)) * orb.d
            w = {"count": n_in, "|J|d/f": Fraction(len(J) * orb.d, f)}
        add("orbit_count", J, ok, w)

        # (7) alpha system
        lams = {lambda_sigma(params, orbit_of(params, x)) for x in orb.orbit}
        try:
            _, ratio = solve_alpha(params, orb)
            add("alpha_system", J, ratio.is_one() and len(lams) == 1,
                {"wrap_ratio": ratio, "lambda_constant": len(lams) == 1})
        except ParameterError as exc:
            reports.append(CheckReport("weights.alpha_system", dict(base, J=bitmask(J)), SKIPPED,
                                       {"reason": str(exc)}))
    return reports
