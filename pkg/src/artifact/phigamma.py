"""Etale (phi, O_K^x)- and (phi_q, O_K^x)-modules over the truncated A-model.

Matrix conventions: phi(e_j) = sum_i Phi[i][j] e_i and a(e_j) = sum_i G[i][j] e_i,
so the commutation reads G a(Phi) = Phi phi(G) (phi_q for phi_q-type modules).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .base_arith import FFElem, FieldTower, OKElem, ParameterError, PrecisionError
from .iwasawa_ring import ARing, unit_key
from .lubin_tate import Character, Irreducible, Split, excluded_h
from .report import FAIL, PASS, CheckReport, check
from .series import (
    INF,
    CoordChange,
    TruncLaurent,
    ValuationError,
    _ffe,
    apply_phi,
    apply_phi_q,
    zp_power,
)

Matrix = List[List[TruncLaurent]]
PHI, PHI_Q = "phi", "phi_q"


@lru_cache(maxsize=None)
def ring_for(p: int, f: int, N: int, e: int = 2) -> ARing:
    """Shared truncated ring; construction dominates small runs at f >= 3."""
    return ARing(FieldTower(p, f, e), N)


def _key(a) -> tuple:
    return unit_key(a) if isinstance(a, OKElem) else (int(a),)


# ---------------------------------------------------------------------------
# scalars

class AScalars:
    """The Y-model of A with phi, the O_K^x-action, psi and reconstruction."""

    def __init__(self, ring: ARing):
        self.ring = ring
        self.F, self.p, self.f, self.q, self.N = ring.F, ring.p, ring.f, ring.q, ring.N
        self._pow: Dict[tuple, TruncLaurent] = {}
        self._psiY: Dict[tuple, TruncLaurent] = {}
        self._cc: Optional[CoordChange] = None
        self._split = None
        self.frob_f = ring.f

    # constructors
    def zero(self, prec=INF) -> TruncLaurent:
        return TruncLaurent.zero(self.F, self.f, "Y", prec)

    def one(self, prec=INF) -> TruncLaurent:
        return TruncLaurent.one(self.F, self.f, "Y", prec)

    def mono(self, exp, coef=1, prec=INF) -> TruncLaurent:
        return TruncLaurent.monomial(self.F, exp, coef, "Y", prec)

    def unit(self, a) -> OKElem:
        return a if isinstance(a, OKElem) else self.ring.ok(int(a))

    def random_units(self, n: int, rng: np.random.Generator) -> List[OKElem]:
        return [self.ring.ok.random_unit(rng) for _ in range(n)]

    # structure maps
    def phi(self, x: TruncLaurent, k: int = 1) -> TruncLaurent:
        if k % self.f == 0:
            return apply_phi_q(x, self.p ** k) if k else x
        for _ in range(k):
            x = apply_phi(x)
        return x

    def f_power(self, a: OKElem, i: int, e) -> TruncLaurent:
        """f_{a,i}^e for an int or p-integral Fraction e, known to degree N."""
        key = (unit_key(a), i % self.f, e)
        if key not in self._pow:
            u = self.ring.f_a(a, i)
            self._pow[key] = zp_power(u, e, self.N) if e else self.one(self.N)
        return self._pow[key]

    def act(self, a, x: TruncLaurent, prec=None) -> TruncLaurent:
        """Y^k -> prod_i (sigma_i(abar) Y_i f_{a,i}^{-1})^{k_i}, relative precision N on exact input."""
        a = self.unit(a)
        if x.is_zero():
            return x
        target = x.prec if x.prec != INF else x.valuation() + self.N
        if prec is not None:
            target = min(target, prec)
        sig = [self.ring.sigma_bar(a, i) for i in range(self.f)]
        out = self.zero(target)
        for e, c in zip(x.exps, x.coefs):
            deg = int(e.sum())
            if deg >= target:
                continue
            u = self.one()
            coef = _ffe(self.F, c)
            for i, k in enumerate(e):
                k = int(k)
                if k:
                    u = (u * self.f_power(a, i, -k)).truncate(target - deg)
                    coef = coef * sig[i] ** k
            out = out + u.truncate(target - deg).monomial_multiply(e, coef)
        return out.truncate(target)

    # psi
    def _coord_change(self, N: int) -> CoordChange:
        if self._cc is None or self._cc.N < N:
            self._cc = CoordChange(self.ring.tower, max(N, 2))
        return self._cc

    def psi_Y(self, r: Tuple[int, ...], P: int) -> TruncLaurent:
        """psi(Y^r) for 0 <= r_j < p, known to degree P (no closed form: via the T-model)."""
        if not any(r):
            return self.one()
        P = max(P, 1)
        for (rr, PP), val in self._psiY.items():
            if rr == r and PP >= P:
                return val.truncate(P)
        Nt = self.p * P + self.f * (self.p - 1)
        cc = self._coord_change(Nt)
        val = cc.t_to_y(cc.y_monomial(r, Nt).psi()).truncate(P)
        self._psiY[(r, P)] = val
        return val

    def psi_target(self, prec) -> int:
        return -((-(int(prec) - self.f * (self.p - 1))) // self.p)

    def psi(self, x: TruncLaurent) -> TruncLaurent:
        """Left inverse of phi via x = sum_r Y^r phi(b_r) and psi(x) = sum_r psi(Y^r) b_r."""
        p, f = self.p, self.f
        prec = x.prec if x.prec != INF else (x.valuation() + self.N if not x.is_zero() else INF)
        if x.is_zero():
            return self.zero(INF if prec == INF else self.psi_target(prec))
        target = self.psi_target(prec)
        r_all = x.exps % p
        m = (x.exps - r_all) // p
        mp = np.roll(m, 1, axis=1)  # phi(Y^{m'}) = Y^{p m} with m'_{j+1} = m_j
        if x.prec == INF and not r_all.any():
            return TruncLaurent(self.F, f, "Y", mp, x.coefs, INF)
        out = self.zero(target)
        keys = [tuple(int(v) for v in r) for r in r_all]
        for r in sorted(set(keys)):
            sel = np.array([k == r for k in keys])
            bprec = -((-(int(prec) - sum(r))) // p)
            b = TruncLaurent(self.F, f, "Y", mp[sel], x.coefs[sel], bprec)
            need = target - b.valuation()
            if need <= 0:
                continue
            out = out + self.psi_Y(r, need) * b
        return out.truncate(target)

    def psi_power(self, x: TruncLaurent, k: int) -> TruncLaurent:
        for _ in range(k):
            x = self.psi(x)
        return x

    # reconstruction
    def _fq_split(self):
        """F_p-matrix sending coordinates in F to sigma_0(F_q)-coordinates on the basis w^b."""
        if self._split is None:
            tower, F = self.ring.tower, self.F
            cols = []
            w = F.gen
            for b in range(tower.e):
                wb = w ** b
                for t in range(self.f):
                    cols.append((wb * tower.root ** t).c)
            M = sympy.Matrix(np.array(cols, dtype=np.int64).T.tolist())
            inv = np.array(M.inv_mod(self.p).tolist(), dtype=np.int64)
            self._split = inv
        return self._split

    def reconstruct(self, z: TruncLaurent, omit: Optional[Sequence[int]] = None) -> TruncLaurent:
        """sum_n delta_n phi(psi(delta_n^{-1} z)) evaluated in the T-model (identity unless omit)."""
        p, f, tower = self.p, self.f, self.ring.tower
        if z.prec == INF:
            raise PrecisionError("reconstruction needs a truncated input")
        low = int(max(0, -z.exps.min())) if len(z) else 0
        m = -(-low // p)
        shift = (p * m,) * f
        y = z.monomial_multiply(shift)
        Nt = int(y.prec)
        if Nt <= 0:
            return z
        cc = self._coord_change(Nt)
        inv = self._fq_split()
        parts = (y.coefs @ inv.T) % p
        out = self.zero(Nt)
        w = self.F.gen
        for b in range(tower.e):
            chunk = parts[:, b * f:(b + 1) * f]
            nz = chunk.any(axis=1)
            if not nz.any():
                continue
            yb = TruncLaurent(tower.Fq, f, "Y", y.exps[nz], chunk[nz], Nt)
            dense = cc.y_to_t(yb, Nt)
            rec = self.ring.reconstruct_T(dense, omit)
            out = out + cc.t_to_y(rec).scale(w ** b)
        neg = tuple(-s for s in shift)
        return out.truncate(Nt).monomial_multiply(neg)

    # trace
    def trace(self, x: TruncLaurent) -> TruncLaurent:
        """Ring map A -> F((u)), u = tr(Y_0): Y^k -> u^{|k|}, since tr(Y_i) = u for every i."""
        exps = x.exps.sum(axis=1, keepdims=True)
        return TruncLaurent(self.F, 1, "U", exps, x.coefs, x.prec)


class UScalars(AScalars):
    """F((T)) presented as F((u)) with u = tr(Y_0), a uniformizer.

    phi(u) = tr(Y_{f-1}^p) = u^p and a(u) = abar u tr(f_{a,0})^{-1} for a in Z_p^x.
    """

    def __init__(self, source: AScalars):
        super().__init__(source.ring)
        self.source = source
        self.frob_f = source.f
        self._u = None

    def zero(self, prec=INF) -> TruncLaurent:
        return TruncLaurent.zero(self.F, 1, "U", prec)

    def one(self, prec=INF) -> TruncLaurent:
        return TruncLaurent.one(self.F, 1, "U", prec)

    def mono(self, exp, coef=1, prec=INF) -> TruncLaurent:
        return TruncLaurent.monomial(self.F, exp, coef, "U", prec)

    def unit(self, a) -> OKElem:
        a = super().unit(a)
        if any(a.c[1:]):
            raise ParameterError("the traced module carries only the Z_p^x-action")
        return a

    def random_units(self, n: int, rng: np.random.Generator) -> List[OKElem]:
        mod = self.ring.ok.mod
        out = []
        while len(out) < n:
            v = int(rng.integers(1, mod))
            if v % self.p:
                out.append(self.ring.ok(v))
        return out

    def phi(self, x: TruncLaurent, k: int = 1) -> TruncLaurent:
        return x.map_exponents(np.array([[self.p ** k]]), self.p ** k) if k else x

    def g(self, a: OKElem) -> TruncLaurent:
        return self.source.trace(self.ring.f_a(a, 0))

    def act(self, a, x: TruncLaurent, prec=None) -> TruncLaurent:
        a = self.unit(a)
        if x.is_zero():
            return x
        target = x.prec if x.prec != INF else x.valuation() + self.N
        if prec is not None:
            target = min(target, prec)
        abar = self.ring.sigma_bar(a, 0)
        out = self.zero(target)
        for e, c in zip(x.exps, x.coefs):
            k = int(e[0])
            if k >= target:
                continue
            key = ("g", unit_key(a), k)
            if key not in self._pow:
                self._pow[key] = zp_power(self.g(a), -k, self.N) if k else self.one(self.N)
            coef = _ffe(self.F, c) * abar ** k
            out = out + self._pow[key].truncate(target - k).monomial_multiply((k,), coef)
        return out.truncate(target)

    def u_series(self, N: int) -> TruncLaurent:
        """u = tr(Y_0) as a series in T (coords "U" from the dense trace map)."""
        if self._u is None or self._u.prec < N:
            R = self.ring
            cc = R.cc if R.cc.N >= N else CoordChange(R.tower, N)
            self._u = R.trace_to_zp(cc.Y(0).truncate(N))
        return self._u.truncate(N)

    def to_T(self, x: TruncLaurent) -> TruncLaurent:
        """Rewrite sum c_k u^k as a series in T, to the precision the input allows."""
        if x.is_zero():
            return x
        v = x.valuation()
        prec = x.prec if x.prec != INF else v + self.N
        u = self.u_series(int(prec - v) + 2)
        uinv = u.inverse()
        out = self.zero(prec)
        for e, c in zip(x.exps, x.coefs):
            k = int(e[0])
            base = u if k >= 0 else uinv
            out = out + (base ** abs(k) if k else self.one()).scale(_ffe(self.F, c))
        return out.truncate(prec)


# ---------------------------------------------------------------------------
# matrices

def _zero_like(S: AScalars) -> TruncLaurent:
    return S.zero()


def _is_exact_zero(x: TruncLaurent) -> bool:
    return x.is_zero() and x.prec == INF


def mat_mul(A: Matrix, B: Matrix, S: AScalars) -> Matrix:
    n, m, k = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = None
            for t in range(m):
                if _is_exact_zero(A[i][t]) or _is_exact_zero(B[t][j]):
                    continue
                term = A[i][t] * B[t][j]
                acc = term if acc is None else acc + term
            row.append(acc if acc is not None else S.zero())
        out.append(row)
    return out


def mat_map(fn: Callable, A: Matrix) -> Matrix:
    return [[x if _is_exact_zero(x) else fn(x) for x in row] for row in A]


def mat_transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def mat_vec(A: Matrix, v: List[TruncLaurent], S: AScalars) -> List[TruncLaurent]:
    return [row[0] for row in mat_mul(A, [[x] for x in v], S)]


def mat_first_difference(A: Matrix, B: Matrix) -> Optional[dict]:
    for i, (ra, rb) in enumerate(zip(A, B)):
        for j, (x, y) in enumerate(zip(ra, rb)):
            diff = x.first_difference(y)
            if diff is not None:
                return {"entry": [i, j], "monomial": _diff_json(diff)}
    return None


def _diff_json(diff) -> dict:
    exp, lhs, rhs = diff[0], diff[1], diff[2]
    return {"exponent": [int(v) for v in exp], "lhs": lhs, "rhs": rhs}


def _inverse_entry(x: TruncLaurent, S: AScalars) -> TruncLaurent:
    if x.prec == INF and len(x) != 1:
        return x.inverse(prec=-x.valuation() + S.N)
    return x.inverse()


def mat_inverse_det(A: Matrix, S: AScalars) -> Tuple[Matrix, TruncLaurent]:
    """Gauss-Jordan with least-valuation pivots; raises ValuationError if not etale."""
    n = len(A)
    M = [list(row) + [S.one() if i == j else S.zero() for j in range(n)] for i, row in enumerate(A)]
    det = S.one()
    for k in range(n):
        best = None
        for i in range(k, n):
            x = M[i][k]
            if x.is_zero():
                continue
            try:
                x.leading_term()
            except ValuationError:
                continue
            if best is None or x.valuation() < M[best][k].valuation():
                best = i
        if best is None:
            raise ValuationError(f"no invertible pivot in column {k}")
        if best != k:
            M[k], M[best] = M[best], M[k]
            det = -det
        piv = M[k][k]
        det = det * piv
        pinv = _inverse_entry(piv, S)
        M[k] = [x if _is_exact_zero(x) else x * pinv for x in M[k]]
        for i in range(n):
            if i != k and not _is_exact_zero(M[i][k]):
                c = M[i][k]
                M[i] = [x - c * y if not _is_exact_zero(y) else x for x, y in zip(M[i], M[k])]
    return [row[n:] for row in M], det


def kron(mats: Sequence[Matrix], S: AScalars) -> Matrix:
    """Kronecker product with multi-index i encoded as sum_j i_j n^j (slot 0 least significant)."""
    n = len(mats[0])
    f = len(mats)
    idx = list(product(range(n), repeat=f))
    enc = [sum(t[j] * n ** j for j in range(f)) for t in idx]
    size = n ** f
    out = [[S.zero() for _ in range(size)] for _ in range(size)]
    for a, ia in zip(enc, idx):
        for b, ib in zip(enc, idx):
            val = S.one()
            for j in range(f):
                x = mats[j][ia[j]][ib[j]]
                if _is_exact_zero(x):
                    val = None
                    break
                val = val * x
            if val is not None:
                out[a][b] = val
    return out


def multi_index(k: int, n: int, f: int) -> Tuple[int, ...]:
    return tuple((k // n ** j) % n for j in range(f))


def encode(i: Sequence[int], n: int) -> int:
    return sum(v * n ** j for j, v in enumerate(i))


# ---------------------------------------------------------------------------
# modules

@dataclass
class EtaleModule:
    scalars: AScalars
    Phi: Matrix
    action: Callable[[OKElem], Matrix]
    semilinear: str = PHI_Q
    labels: List[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    _cache: Dict[tuple, Matrix] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.semilinear not in (PHI, PHI_Q):
            raise ParameterError(f"unknown semilinearity {self.semilinear!r}")
        if not self.labels:
            self.labels = [f"e{i}" for i in range(self.rank)]

    @property
    def rank(self) -> int:
        return len(self.Phi)

    @property
    def frob_power(self) -> int:
        return 1 if self.semilinear == PHI else self.scalars.frob_f

    def frob_scalar(self, x: TruncLaurent) -> TruncLaurent:
        return self.scalars.phi(x, self.frob_power)

    def G(self, a) -> Matrix:
        a = self.scalars.unit(a)
        k = _key(a)
        if k not in self._cache:
            self._cache[k] = self.action(a)
        return self._cache[k]

    def frob(self, v: List[TruncLaurent]) -> List[TruncLaurent]:
        return mat_vec(self.Phi, [self.frob_scalar(x) for x in v], self.scalars)

    def act(self, a, v: List[TruncLaurent]) -> List[TruncLaurent]:
        return mat_vec(self.G(a), [self.scalars.act(a, x) for x in v], self.scalars)

    def commutation_defect(self, a) -> Optional[dict]:
        S = self.scalars
        G = self.G(a)
        lhs = mat_mul(G, mat_map(lambda x: S.act(a, x), self.Phi), S)
        rhs = mat_mul(self.Phi, mat_map(self.frob_scalar, G), S)
        return mat_first_difference(lhs, rhs)

    def det_phi(self) -> TruncLaurent:
        return mat_inverse_det(self.Phi, self.scalars)[1]

    def phi_inverse(self) -> Matrix:
        if "_phinv" not in self.meta:
            self.meta["_phinv"] = mat_inverse_det(self.Phi, self.scalars)[0]
        return self.meta["_phinv"]


def _f_ratio(S: AScalars, a: OKElem) -> TruncLaurent:
    """f_{a,0} / phi(f_{a,0})."""
    fa = S.ring.f_a(a, 0)
    return (fa * apply_phi(fa).inverse()).truncate(S.N)


def _ratio_power(S: AScalars, a: OKElem, e) -> TruncLaurent:
    if e == 0:
        return S.one(S.N)
    key = ("ratio", unit_key(a), e)
    if key not in S._pow:
        S._pow[key] = zp_power(_f_ratio(S, a), e, S.N)
    return S._pow[key]


def _y0_ratio(S: AScalars, h: int, coef=1) -> TruncLaurent:
    """coef * (Y_0 / phi(Y_0))^h = coef * Y_0^h Y_{f-1}^{-p h}."""
    e = [0] * S.f
    e[0] += h
    e[S.f - 1] -= S.p * h
    return S.mono(e, coef)


def build_semisimple_module(shape, N: int, ring: Optional[ARing] = None, tower: Optional[FieldTower] = None,
                            action_h_shift: int = 0) -> EtaleModule:
    """phi_q-type module of a character, an irreducible induced shape or a split sum.

    ``action_h_shift`` replaces h by h + shift in the action only (negative control).
    """
    if ring is None:
        if tower is None:
            raise ParameterError("need a ring or a tower")
        ring = ring_for(tower.p, tower.f, N, tower.e)
    S = AScalars(ring)
    q, F = S.q, S.F
    zero = S.zero()
    if isinstance(shape, Character):
        h, d = shape.h, 1
        Phi = [[_y0_ratio(S, h, F(shape.lam))]]
        exps = [Fraction(h + action_h_shift, 1 - q)]
        meta = dict(kind="character", h=h, d=1)
    elif isinstance(shape, Irreducible):
        h, d = shape.h, shape.d
        if d < 1:
            raise ParameterError("d must be positive")
        if excluded_h(h, d, q):
            raise ParameterError(f"h={h} is of the excluded form for d={d}")
        Phi = [[zero] * d for _ in range(d)]
        for i in range(d - 1):
            Phi[i + 1][i] = S.one()
        Phi[0][d - 1] = _y0_ratio(S, h, F(shape.lam) ** d)
        exps = [Fraction((h + action_h_shift) * q ** i, 1 - q ** d) for i in range(d)]
        meta = dict(kind="irreducible", h=h, d=d)
    elif isinstance(shape, Split):
        h = shape.h
        Phi = [[_y0_ratio(S, h, F(shape.lam0)), zero], [zero, S.mono([0] * S.f, F(shape.lam1))]]
        exps = [Fraction(h + action_h_shift, 1 - q), Fraction(0)]
        meta = dict(kind="split", h=h, d=1)
    else:
        raise ParameterError(f"unknown shape {shape!r}")
    r = len(Phi)
    meta["exps"] = exps

    def action(a: OKElem) -> Matrix:
        G = [[zero] * r for _ in range(r)]
        for i, e in enumerate(exps):
            G[i][i] = _ratio_power(S, a, e)
        return G

    return EtaleModule(S, Phi, action, PHI_Q, meta=meta)


def build_DA_otimes(base: EtaleModule, f: Optional[int] = None) -> EtaleModule:
    """Tensor induction: basis E_i = (x)_j phi^{f-1-j}(e_{i_j}), phi shifting slots to the left."""
    if base.semilinear != PHI_Q:
        raise ParameterError("the base must be a phi_q-type module")
    S = base.scalars
    f = S.f if f is None else f
    if f != S.f:
        raise ParameterError("tensor length must equal f")
    n = base.rank
    size = n ** f
    Phi = [[S.zero() for _ in range(size)] for _ in range(size)]
    for c in range(size):
        i = multi_index(c, n, f)
        for k in range(n):
            x = base.Phi[k][i[0]]
            if _is_exact_zero(x):
                continue
            Phi[encode(i[1:] + (k,), n)][c] = x
    labels = ["E" + "".join(map(str, multi_index(c, n, f))) for c in range(size)]

    def action(a: OKElem) -> Matrix:
        G = base.G(a)
        return kron([mat_map(lambda x, j=j: S.phi(x, f - 1 - j), G) for j in range(f)], S)

    return EtaleModule(S, Phi, action, PHI, labels, meta=dict(kind="otimes", base=base.meta, n=n))


def twist_by_character(D: EtaleModule, chi: Tuple[int, object]) -> EtaleModule:
    """D (x) chi for chi = (h_chi, lam_chi): omega_f^{h_chi} unr(lam_chi)."""
    h, lam = int(chi[0]), D.scalars.F(chi[1])
    S = D.scalars
    if D.semilinear == PHI:
        scal = S.mono([0] * S.f, lam)
        Phi = mat_map(lambda x: x * scal, D.Phi)

        def action(a: OKElem) -> Matrix:
            c = S.ring.sigma_bar(a, 0) ** h
            return mat_map(lambda x: x.scale(c), D.G(a))
    else:
        scal = _y0_ratio(S, h, lam)
        Phi = mat_map(lambda x: x * scal, D.Phi)

        def action(a: OKElem) -> Matrix:
            c = _ratio_power(S, a, Fraction(h, 1 - S.q))
            return mat_map(lambda x: (x * c).truncate(x.valuation() + S.N), D.G(a))

    return EtaleModule(S, Phi, action, D.semilinear, list(D.labels), dict(D.meta, twist=(h, lam)))


def dual_module(D: EtaleModule) -> EtaleModule:
    """Dual basis: Phi^v = (Phi^{-1})^T and G^v(a) = (G(a)^{-1})^T."""
    S = D.scalars
    try:
        inv, _ = mat_inverse_det(D.Phi, S)
    except ValuationError as exc:
        raise ParameterError(f"module is not etale: {exc}") from exc

    def action(a: OKElem) -> Matrix:
        return mat_transpose(mat_inverse_det(D.G(a), S)[0])

    return EtaleModule(S, mat_transpose(inv), action, D.semilinear,
                       [l + "*" for l in D.labels], dict(D.meta, dual=True))


def pairing(x: List[TruncLaurent], y: List[TruncLaurent], S: AScalars) -> TruncLaurent:
    out = S.zero()
    for u, v in zip(x, y):
        out = out + u * v
    return out


# ---------------------------------------------------------------------------
# psi

def psi_on_module(D: EtaleModule, x: List[TruncLaurent]) -> List[TruncLaurent]:
    """psi(sum_j z_j phi(e_j)) = sum_j psi(z_j) e_j with z = Phi^{-1} x."""
    S = D.scalars
    z = mat_vec(D.phi_inverse(), x, S)
    return [S.psi_power(zj, D.frob_power) for zj in z]


def reconstruct_on_module(D: EtaleModule, x: List[TruncLaurent],
                          omit: Optional[Sequence[int]] = None) -> List[TruncLaurent]:
    """sum_n delta_n phi(psi(delta_n^{-1} x)) for a phi-type module."""
    if D.semilinear != PHI:
        raise ParameterError("reconstruction is implemented for phi-type modules")
    S = D.scalars
    z = mat_vec(D.phi_inverse(), x, S)
    return mat_vec(D.Phi, [S.reconstruct(zj, omit) for zj in z], S)


# ---------------------------------------------------------------------------
# equivariance

def _unit_json(a) -> list:
    return list(a.c) if isinstance(a, OKElem) else [int(a)]


def check_equivariance(D: EtaleModule, units: Sequence, params: Optional[dict] = None) -> CheckReport:
    """Commutation on every basis vector for each unit, etale determinant, and the
    fixed-point and membership conditions of semi-simple constructors."""
    S = D.scalars
    prm = dict(params or {}, rank=D.rank, semilinear=D.semilinear, units=len(units))
    witness: dict = {}
    ok = True
    try:
        det = D.det_phi()
        exp, c = det.leading_term()
        witness["det_leading"] = {"exponent": list(exp), "coef": c}
    except ValuationError as exc:
        ok = False
        witness["etale"] = str(exc)
    for a in units:
        a = S.unit(a)
        diff = D.commutation_defect(a)
        if diff is not None:
            ok = False
            witness["commutation"] = dict(diff, a=_unit_json(a), basis=diff["entry"][1])
            break
    kind = D.meta.get("kind")
    if kind in ("character", "irreducible", "split") and not ({"twist", "traced", "dual"} & set(D.meta)) and units:
        a = S.unit(units[0])
        h, d, exps = D.meta["h"], D.meta["d"], D.meta["exps"]
        G = D.G(a)
        C0 = G[0][0]
        rhs = (_ratio_power(S, a, h) * S.phi(C0, d * S.f)).truncate(S.N)
        diff = C0.first_difference(rhs)
        if diff is not None:
            ok = False
            witness["fixed_point"] = dict(_diff_json(diff), a=_unit_json(a))
        for i in range(len(exps)):
            eps = G[i][i] - 1
            need = min(S.q ** i * (S.p - 1), int(eps.prec))
            off = [G[k][i] for k in range(len(exps)) if k != i and not G[k][i].is_zero()]
            if eps.valuation() < need or off:
                ok = False
                witness["membership"] = {"basis": i, "valuation": eps.valuation(), "need": need}
                break
    return CheckReport("phigamma.equivariance", prm, PASS if ok else FAIL, witness)


# ---------------------------------------------------------------------------
# trace

def trace_base_change(D: EtaleModule) -> EtaleModule:
    """Entrywise trace to F((T)) = F((u)), restricting the action to Z_p^x."""
    S = D.scalars
    if isinstance(S, UScalars):
        raise ParameterError("module is already traced")
    T = UScalars(S)
    Phi = [[S.trace(x) for x in row] for row in D.Phi]

    def action(a: OKElem) -> Matrix:
        return [[S.trace(x) for x in row] for row in D.G(T.unit(a))]

    return EtaleModule(T, Phi, action, D.semilinear, list(D.labels), dict(D.meta, traced=True))


# ---------------------------------------------------------------------------
# the explicit isomorphism

@dataclass
class IsoWitness:
    params: dict
    mu: Dict[int, FFElem]
    alpha: Dict[int, FFElem]
    diagonal: Dict[int, dict]
    ledger: Dict[str, str] = field(default_factory=dict)

    def serialize(self) -> dict:
        return {
            "params": self.params,
            "mu": {str(k): v for k, v in sorted(self.mu.items())},
            "alpha": {str(k): v for k, v in sorted(self.alpha.items())},
            "diagonal": {str(k): v for k, v in sorted(self.diagonal.items())},
            "ledger": dict(sorted(self.ledger.items())),
        }


def source_module(params, N: int) -> Tuple[EtaleModule, FFElem]:
    """D_A^(x)(rho) twisted by unr(c) so that det(p) = 1; returns the module and c."""
    from .serre_weights import IRREDUCIBLE, ff_sqrt

    ring = ring_for(params.p, params.f, N, params.e)
    F = ring.F
    s = params.scalars()
    if params.kind == IRREDUCIBLE:
        shape = Irreducible(2, params.h, s["lam"])
        c = ff_sqrt(F(-1) / (s["lam"] * s["lam"]))
    else:
        shape = Split(params.h, s["lam0"], s["lam1"])
        c = ff_sqrt(F.one / (s["lam0"] * s["lam1"]))
    if c is None:
        raise ParameterError("det(p) normalization needs a square root outside F")
    base = build_semisimple_module(shape, N, ring)
    return twist_by_character(build_DA_otimes(base), (0, c)), c


def verify_main_isomorphism(params, N: int, n_units: int = 10, seed: int = 0,
                            perturb_b: Optional[Tuple[int, int]] = None,
                            equivariance: bool = True) -> Tuple[List[CheckReport], IsoWitness]:
    """Build both sides and certify E_{i_J} -> alpha_J Y^{b_J - 1} x_J^* as an isomorphism.

    ``perturb_b = (mask, i)`` adds 1 to b_{J,i} for the subset with that bitmask.
    """
    from . import serre_weights as sw

    p, f, q = params.p, params.f, params.q
    if N < 2 * (p - 1) + 2:
        raise ParameterError(f"N must be at least 2(p-1)+2 = {2 * (p - 1) + 2}")
    src, c = source_module(params, N)
    S = src.scalars
    F = S.F
    P = sw.normalized_params(params)
    base = dict(params.describe(), N=N)
    reports: List[CheckReport] = []
    rng = np.random.default_rng(seed)
    units = S.random_units(n_units, rng)

    subsets = sw.all_subsets(f)
    idx = {J: encode(sw.i_vector(params, J), 2) for J in subsets}
    bvec = {}
    for J in subsets:
        b = list(sw.b_exponents(params, J))
        if perturb_b is not None and sw.bitmask(J) == perturb_b[0]:
            b[perturb_b[1]] += 1
        bvec[J] = b
    steps = {J: sw.delta_step(params, J) for J in subsets}
    sign = F((-1) ** (f - 1))

    # mu witness: 1 on every step of an orbit except the last, which carries lambda_sigma^{-1}
    mu: Dict = {}
    orbits = []
    seen = set()
    for J in sorted(subsets, key=sw.bitmask):
        if J in seen:
            continue
        orb = sw.orbit_of(params, J)
        orbits.append(orb)
        seen.update(orb.orbit)
        lam = sw.lambda_sigma(P, orb)
        for k, K in enumerate(orb.orbit):
            mu[K] = lam.inverse() if k == orb.d - 1 else F.one
        prod_mu = F.one
        for K in orb.orbit:
            prod_mu = prod_mu * mu[K]
        reports.append(check("iso.mu_product", dict(base, J=sw.bitmask(J)),
                             prod_mu * lam == F.one, {"lambda_sigma": lam, "product": prod_mu}))

    # target module on x_J^*
    size = 2 ** f
    TPhi = [[S.zero() for _ in range(size)] for _ in range(size)]
    for J in subsets:
        st = steps[J]
        TPhi[idx[st.J_next]][idx[J]] = S.mono(st.c1, sign * mu[J])
    chi = {}
    for J in subsets:
        two = sw.chi_exponent2(params, J)
        if two % 2:
            raise ParameterError("chi exponent is not integral")
        chi[J] = -(two // 2) + sum(p ** i * params.r[i] for i in range(f))
    closed = {J: sw.orbit_of(params, J).closed_forms for J in subsets}

    def target_action(a: OKElem) -> Matrix:
        G = [[S.zero() for _ in range(size)] for _ in range(size)]
        nrm = F(S.ring.tower.norm(a.reduce()))
        s0 = S.ring.sigma_bar(a, 0)
        for J in subsets:
            u = S.one(S.N)
            for i in range(f):
                u = (u * S.f_power(a, i, closed[J][i])).truncate(S.N)
            G[idx[J]][idx[J]] = u.scale(nrm * s0 ** chi[J])
        return G

    tgt = EtaleModule(S, TPhi, target_action, PHI, [f"x{sw.bitmask(J)}*" for J in sorted(subsets, key=idx.get)],
                      meta=dict(kind="target"))

    if equivariance:
        for name, mod in (("source", src), ("target", tgt)):
            rep = check_equivariance(mod, units, base)
            rep.id = f"iso.{name}_equivariance"
            reports.append(rep)

    # alpha: propagate along each orbit using the actual source scalars
    alpha: Dict = {}
    for orb in orbits:
        J0 = orb.orbit[0]
        cur = F.one
        alpha[J0] = cur
        wit = {"orbit": [sw.bitmask(K) for K in orb.orbit]}
        solvable = True
        for k, J in enumerate(orb.orbit):
            Jn = steps[J].J_next
            entry = src.Phi[idx[Jn]][idx[J]]
            if entry.is_zero() or len(entry) != 1:
                solvable = False
                wit["bad_entry"] = {"J": sw.bitmask(J), "entry": entry.serialize()}
                break
            kappa = _ffe(F, entry.coefs[0])
            cur = cur * mu[J] * sign / kappa
            if k < orb.d - 1:
                alpha[Jn] = cur
        if solvable:
            wit["wrap_ratio"] = cur
            solvable = cur == F.one
        _, sw_ratio = sw.solve_alpha(params, orb)
        wit["weights_wrap_ratio"] = sw_ratio
        reports.append(check("iso.alpha_system", dict(base, J=sw.bitmask(J0)),
                             solvable and sw_ratio.is_one(), wit))
        for K in orb.orbit:
            alpha.setdefault(K, F.one)

    theta = {J: S.mono([v - 1 for v in bvec[J]], alpha[J]) for J in subsets}

    # Frobenius: theta Phi_S = Phi_T phi(theta), column by column, exactly
    for J in subsets:
        col = idx[J]
        lhs = [theta[K] * src.Phi[idx[K]][col] for K in sorted(subsets, key=idx.get)]
        rhs = [TPhi[idx[K]][col] * apply_phi(theta[J]) for K in sorted(subsets, key=idx.get)]
        diff = None
        for row, (x, y) in enumerate(zip(lhs, rhs)):
            d = x.first_difference(y)
            if d is not None:
                diff = {"row": row, "column": col, "monomial": _diff_json(d)}
                break
        reports.append(check("iso.frobenius", dict(base, J=sw.bitmask(J)), diff is None,
                             diff or {"b": bvec[J], "alpha": alpha[J]}))

    # action: theta G_S(a) = G_T(a) a(theta) to degree N
    for J in subsets:
        col = idx[J]
        diff = None
        for a in units:
            GS, GT = src.G(a), tgt.G(a)
            ath = S.act(a, theta[J])
            for K in subsets:
                row = idx[K]
                x = theta[K] * GS[row][col]
                y = GT[row][col] * ath if row == col else GT[row][col]
                d = x.first_difference(y)
                if d is not None:
                    diff = {"a": _unit_json(a), "row": row, "column": col, "monomial": _diff_json(d)}
                    break
            if diff:
                break
        reports.append(check("iso.action", dict(base, J=sw.bitmask(J), units=n_units), diff is None,
                             diff or {"units": n_units}))

    witness = IsoWitness(
        params=base,
        mu={sw.bitmask(J): v for J, v in mu.items()},
        alpha={sw.bitmask(J): v for J, v in alpha.items()},
        diagonal={sw.bitmask(J): {"alpha": alpha[J], "exponent": [v - 1 for v in bvec[J]],
                                  "index": idx[J]} for J in subsets},
        ledger={},
    )
    for r in reports:
        k = r.id + ":" + str(r.params.get("J", ""))
        witness.ledger[k] = r.status
    return reports, witness
