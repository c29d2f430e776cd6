"""Lubin-Tate formal group for the uniformizer p with logarithm sum_n p^{-n} T^{q^n}.

[a](T) = l^{-1}(a l(T)) is found as the fixed point of
    g -> a l(T) - sum_{1 <= n <= B} p^{-n} g^{q^n},
with B = max{n : q^n < N}.  Coefficients live in O_K and are handled modulo
p^{M+B}: if g is known mod p^M then g^{q^n} is known mod p^{M+n}, so each
p^{-n} g^{q^n} is again known mod p^M and precision never degrades.
If g is correct below degree D, the next iterate is correct below D + q - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Union

import numpy as np

from .base_arith import (
    FFElem,
    FieldTower,
    OKElem,
    OKRing,
    ParameterError,
    PrecisionError,
)
from .series import INF, TruncLaurent, _ffe, zp_power

A_IS_P = "p"


def denominator_budget(N: int, q: int) -> int:
    """B = max{n : q^n < N} (0 when q >= N)."""
    B = 0
    while q ** (B + 1) < N:
        B += 1
    return B


def _ok_series_mul(A: np.ndarray, Bm: np.ndarray, lift, mod: int) -> np.ndarray:
    """Product of two series over O_K/mod, arrays (N, f) in the power basis of t."""
    N, f = A.shape
    C = np.zeros((N, 2 * f - 1), dtype=object if mod ** 2 * N * f >= 2 ** 62 else np.int64)
    for u in range(f):
        if not A[:, u].any():
            continue
        for v in range(f):
            if Bm[:, v].any():
                C[:, u + v] += np.convolve(A[:, u], Bm[:, v])[:N] % mod
    for d in range(2 * f - 2, f - 1, -1):
        c = C[:, d]
        for j in range(f):
            C[:, d - f + j] -= c * int(lift[j])
    return (C[:, :f] % mod).astype(np.int64)


def _ok_series_pow(A: np.ndarray, e: int, lift, mod: int) -> np.ndarray:
    N, f = A.shape
    result = np.zeros_like(A)
    result[0, 0] = 1
    base = A
    while e:
        if e & 1:
            result = _ok_series_mul(result, base, lift, mod)
        e >>= 1
        if e:
            base = _ok_series_mul(base, base, lift, mod)
    return result


@dataclass(frozen=True)
class LTSeries:
    """Reduction mod p of [a](T) below degree N, over F (via sigma_0)."""

    a: Union[OKElem, str]
    N: int
    series: TruncLaurent
    integral: np.ndarray  # (N, f) coefficients in O_K / p^M, power basis of t
    M: int

    def linear_coefficient(self) -> FFElem:
        return self.series.coefficient_or_zero((1,))


def _ok_ring_for(tower: FieldTower, a, M: int, B: int) -> OKRing:
    need = M + B
    if isinstance(a, OKElem):
        if a.ring.M < need:
            raise PrecisionError(f"a known mod p^{a.ring.M}; need p^{need}")
    return OKRing(tower, need)


def lt_action(a: Union[OKElem, int, str], N: int, tower: Optional[FieldTower] = None,
              M: int = 1) -> LTSeries:
    """[a]_LT(T) mod (p^M, T^N) for a in O_K (a = "p" for the uniformizer)."""
    if N < 2:
        raise ParameterError("N must be at least 2")
    if tower is None:
        if not isinstance(a, OKElem):
            raise ParameterError("a tower is needed when a is not an OKElem")
        tower = a.ring.tower
    p, f, q = tower.p, tower.f, tower.q
    B = denominator_budget(N, q)
    W = _ok_ring_for(tower, a, M, B)
    mod, lift = W.mod, W.lift
    if isinstance(a, str):
        if a != A_IS_P:
            raise ParameterError(f"unknown element {a!r}")
        av = W(p)
    else:
        av = W(a)
    aw = np.array(av.c, dtype=np.int64)

    # p^B a l(T) has integral coefficients
    target = np.zeros((N, f), dtype=np.int64)
    target[1] = aw * p ** B % mod
    for n in range(1, B + 1):
        target[q ** n] = (target[q ** n] + aw * p ** (B - n)) % mod

    g = np.zeros((N, f), dtype=np.int64)
    g[1] = aw
    D = min(q, N)
    g[D:] = 0
    while True:
        S = np.zeros((N, f), dtype=np.int64)
        for n in range(1, B + 1):
            S = (S + _ok_series_pow(g, q ** n, lift, mod) * p ** (B - n)) % mod
        scaled = (target - S) % mod
        Dn = min(N, D + q - 1)
        window = scaled[:Dn]
        if np.any(window % p ** B):
            raise PrecisionError("denominator budget exhausted in the Lubin-Tate iteration")
        new = np.zeros_like(g)
        new[:Dn] = window // p ** B
        g = new % p ** M
        if D >= N:
            break
        D = Dn
    red = g % p
    F = tower.F
    coefs = tower.embed_array(red)
    exps = np.arange(N).reshape(-1, 1)
    series = TruncLaurent(F, 1, "U", exps, coefs, N)
    return LTSeries(a, N, series, g, M)


def compose(x: TruncLaurent, y: TruncLaurent) -> TruncLaurent:
    """x(y(T)) for univariate series, y of positive valuation (x may be Laurent).

    With v = val(y) and y known below degree P: y^k (k > 0) is known below
    P + (k-1)v, y^{-k} below P - (k+1)v, and unknown terms T^k of x with
    k >= prec(x) land in degree >= prec(x) v.
    """
    if y.is_zero() or y.valuation() < 1:
        raise ParameterError("inner series must have positive valuation")
    v = int(y.valuation())
    out_prec = x.prec * v if x.prec != INF else INF
    ex = [int(e) for e in x.exps[:, 0]]
    if y.prec != INF:
        for e in ex:
            if e > 0:
                out_prec = min(out_prec, y.prec + (e - 1) * v)
            elif e < 0:
                out_prec = min(out_prec, y.prec - (1 - e) * v)
    yinv = y.inverse() if ex and min(ex) < 0 else None
    out = TruncLaurent.zero(x.field, 1, x.coords, out_prec)
    powers: Dict[int, TruncLaurent] = {}
    for e, c in zip(ex, x.coefs):
        if e not in powers:
            if e == 0:
                powers[e] = TruncLaurent.one(x.field, 1, x.coords)
            elif e > 0:
                powers[e] = y ** e
            else:
                powers[e] = yinv ** (-e)
        out = out + powers[e].scale(_ffe(x.field, c)).truncate(out_prec)
    return out.truncate(out_prec)


def f_a_lt(a: OKElem, N: int, M: int = 1) -> TruncLaurent:
    """f_a = sigma_0(abar) T / [a](T), known below degree N."""
    if not a.is_unit():
        raise ParameterError("a must be a unit")
    tower = a.ring.tower
    lt = lt_action(a, N + 1, tower, M)
    g = lt.series
    lead = tower.sigma0(a.reduce())
    # T / g has relative precision N
    u = g.monomial_multiply((-1,), lead.inverse())
    return u.inverse().truncate(N)


def in_fixed_model(x: TruncLaurent, q: int) -> bool:
    """x lies in 1 + T^{q-1} F[[T^{q-1}]] (to its precision)."""
    d = x - 1
    if d.is_zero():
        return True
    ex = d.exps[:, 0]
    return bool(np.all(ex > 0) and np.all(ex % (q - 1) == 0))


# ---------------------------------------------------------------------------
# explicit (phi_q, O_K^x)-modules over F((T))

@dataclass(frozen=True)
class Character:
    h: int
    lam: FFElem


@dataclass(frozen=True)
class Irreducible:
    d: int
    h: int
    lam: FFElem


@dataclass(frozen=True)
class Split:
    h: int
    lam0: FFElem
    lam1: FFElem


def excluded_h(h: int, d: int, q: int) -> bool:
    """h = m (q^d - 1)/(q^{d'} - 1) for some proper divisor d' of d and integer m."""
    for dp in range(1, d):
        if d % dp == 0:
            num = q ** d - 1
            den = q ** dp - 1
            step = num // den
            if h % step == 0:
                return True
    return False


class DKModule:
    """Free module over F((T)) with a phi_q matrix and O_K^x-action matrices.

    Matrices follow phi(e_j) = sum_i Phi[i][j] e_i and a(e_j) = sum_i G[i][j] e_i.
    """

    def __init__(self, tower: FieldTower, N: int, shape, M: int = 1):
        self.tower, self.N, self.shape, self.M = tower, N, shape, M
        self.q = tower.q
        self.F = tower.F
        self._f_cache: Dict[tuple, TruncLaurent] = {}
        self._lt_cache: Dict[tuple, TruncLaurent] = {}
        if isinstance(shape, Character):
            self.exps = [Fraction(shape.h)]
            self.rank = 1
        elif isinstance(shape, Irreducible):
            if shape.d < 1:
                raise ParameterError("d must be positive")
            if excluded_h(shape.h, shape.d, self.q):
                raise ParameterError(f"h={shape.h} is of the excluded form for d={shape.d}")
            self.rank = shape.d
            q, d, h = self.q, shape.d, shape.h
            self.exps = [Fraction(h * q ** i * (q - 1), q ** d - 1) for i in range(d)]
        elif isinstance(shape, Split):
            self.rank = 2
            self.exps = [Fraction(shape.h), Fraction(0)]
        else:
            raise ParameterError(f"unknown shape {shape!r}")

    def _u(self, coef, k: int) -> TruncLaurent:
        return TruncLaurent.monomial(self.F, (k,), coef, "U")

    def phi_matrix(self) -> List[List[TruncLaurent]]:
        s, q, r = self.shape, self.q, self.rank
        zero = TruncLaurent.zero(self.F, 1, "U")
        Phi = [[zero for _ in range(r)] for _ in range(r)]
        if isinstance(s, Character):
            Phi[0][0] = self._u(s.lam, -s.h * (q - 1))
        elif isinstance(s, Irreducible):
            for i in range(r - 1):
                Phi[i + 1][i] = self._u(1, 0)
            Phi[0][r - 1] = self._u(s.lam ** r, -s.h * (q - 1))
        else:
            Phi[0][0] = self._u(s.lam0, -s.h * (q - 1))
            Phi[1][1] = self._u(s.lam1, 0)
        return Phi

    def f_a(self, a: OKElem) -> TruncLaurent:
        key = tuple(a.c)
        if key not in self._f_cache:
            self._f_cache[key] = f_a_lt(a, self.N, self.M)
        return self._f_cache[key]

    def lt(self, a) -> TruncLaurent:
        key = tuple(a.c) if isinstance(a, OKElem) else a
        if key not in self._lt_cache:
            self._lt_cache[key] = lt_action(a, self.N + 1, self.tower, self.M).series
        return self._lt_cache[key]

    def action_matrix(self, a: OKElem) -> List[List[TruncLaurent]]:
        f = self.f_a(a)
        r = self.rank
        zero = TruncLaurent.zero(self.F, 1, "U")
        G = [[zero for _ in range(r)] for _ in range(r)]
        for i, e in enumerate(self.exps):
            G[i][i] = zp_power(f, e, self.N) if e else TruncLaurent.one(self.F, 1, "U", self.N)
        return G

    def act_scalar(self, a: OKElem, x: TruncLaurent) -> TruncLaurent:
        """a acting on F((T)) by T -> [a](T)."""
        return compose(x, self.lt(a))

    def phi_scalar(self, x: TruncLaurent) -> TruncLaurent:
        """phi_q on F((T)): T -> [p](T) = T^q."""
        return compose(x, self.lt(A_IS_P))

    def commutation_defect(self, a: OKElem, G=None) -> Optional[tuple]:
        """First (i, j, exponent, lhs, rhs) where G a(Phi) != Phi phi_q(G), or None.

        a(phi_q(e_j)) = sum_i a(Phi_ij) a(e_i) and phi_q(a(e_j)) = sum_i phi_q(G_ij) phi_q(e_i).
        """
        Phi = self.phi_matrix()
        G = self.action_matrix(a) if G is None else G
        r = self.rank
        aPhi = [[self.act_scalar(a, Phi[i][j]) for j in range(r)] for i in range(r)]
        phiG = [[self.phi_scalar(G[i][j]) for j in range(r)] for i in range(r)]
        for i in range(r):
            for j in range(r):
                lhs = _dot(G[i], [aPhi[k][j] for k in range(r)])
                rhs = _dot(Phi[i], [phiG[k][j] for k in range(r)])
                diff = lhs.first_difference(rhs)
                if diff is not None:
                    return (i, j) + tuple(diff)
        return None

    def det_valuation(self) -> int:
        """Valuation of det Phi, which is a nonzero monomial for every shape."""
        return -self.shape.h * (self.q - 1)


def _dot(row: List[TruncLaurent], col: List[TruncLaurent]) -> TruncLaurent:
    out = None
    for x, y in zip(row, col):
        if x.is_zero() and x.prec == INF:
            continue
        t = x * y
        out = t if out is None else out + t
    return out if out is not None else row[0]


def dk_module(shape, N: int, tower: FieldTower, M: int = 1) -> DKModule:
    return DKModule(tower, N, shape, M)
