"""Truncated series over finite fields.

Two models are used side by side.

``TruncLaurent`` is a sparse element of a Laurent ring in ``nvars``
variables with a coordinate tag ('Y', 'T', 'Z' or 'U' for univariate).  It
stores its terms as numpy arrays (exponent rows, coefficient rows) and an
absolute precision ``prec``: every monomial of total degree >= prec is
unknown and dropped.  ``prec = inf`` marks an exact element.

``DenseT`` is a dense power series in T_0..T_{f-1} truncated at total
degree N, used for group-ring expansions, psi and mu.

``CoordChange`` links the two through the expansions of the Y_i in the T_j
and the linear change of variables between T and Z.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np
import scipy.fft

from .base_arith import (
    FFElem,
    FieldTower,
    GF,
    OKRing,
    ParameterError,
    PrecisionError,
    ndigits,
    padic_binomial_table,
    zp_residue,
)

INF = math.inf


class CoordinateError(TypeError):
    """Operands live in different coordinate systems."""


class ValuationError(ValueError):
    """A series that should be topologically nilpotent is not."""


# ---------------------------------------------------------------------------
# vectorised arithmetic on arrays of field elements (last axis = coefficients)

def _reduce_poly(C: np.ndarray, field: GF) -> np.ndarray:
    """Reduce an array of polynomials (last axis length 2n-1) modulo the field modulus."""
    n, p = field.n, field.p
    C = C % p
    if C.shape[-1] <= n:
        return C
    mod = np.array(field.modulus[:n], dtype=np.int64)
    for d in range(C.shape[-1] - 1, n - 1, -1):
        c = C[..., d]
        if np.any(c):
            C[..., d - n:d] = (C[..., d - n:d] - c[..., None] * mod) % p
    return C[..., :n]


def fmul(A: np.ndarray, B: np.ndarray, field: GF) -> np.ndarray:
    """Elementwise product of broadcastable arrays of field elements."""
    n = field.n
    if n == 1:
        return (A * B) % field.p
    shape = np.broadcast_shapes(A.shape[:-1], B.shape[:-1])
    C = np.zeros(shape + (2 * n - 1,), dtype=np.int64)
    for a in range(n):
        C[..., a:a + n] += A[..., a:a + 1] * B
    return _reduce_poly(C, field)


def fscale(A: np.ndarray, c: FFElem) -> np.ndarray:
    """Multiply every entry of A by the constant c."""
    field = c.field
    return (A @ field.mul_matrix(c).T) % field.p


def felem_row(x: FFElem) -> np.ndarray:
    return np.array(x.c, dtype=np.int64)


def fpow_matrix(field: GF, k: int) -> np.ndarray:
    """Matrix of x -> x^(p^k) on coefficient vectors."""
    F = field.frobenius_matrix()
    out = np.eye(field.n, dtype=np.int64)
    for _ in range(k % field.n):
        out = F @ out % field.p
    return out


def _ffe(field: GF, row) -> FFElem:
    return FFElem(field, tuple(int(v) for v in row))


# ---------------------------------------------------------------------------
# sparse truncated Laurent elements

class TruncLaurent:
    """Sparse truncated Laurent element over a finite field."""

    __slots__ = ("field", "nvars", "coords", "exps", "coefs", "prec")

    def __init__(self, field: GF, nvars: int, coords: str, exps: np.ndarray,
                 coefs: np.ndarray, prec=INF, _canonical: bool = False):
        self.field = field
        self.nvars = nvars
        self.coords = coords
        self.prec = prec
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, nvars)
        coefs = np.asarray(coefs, dtype=np.int64).reshape(-1, field.n) % field.p
        if not _canonical:
            exps, coefs = _canonicalise(exps, coefs, field, prec)
        self.exps = exps
        self.coefs = coefs

    # constructors -------------------------------------------------------------
    @classmethod
    def zero(cls, field, nvars, coords, prec=INF):
        return cls(field, nvars, coords, np.zeros((0, nvars)), np.zeros((0, field.n)), prec)

    @classmethod
    def constant(cls, field, nvars, coords, c, prec=INF):
        c = field(c)
        return cls(field, nvars, coords, np.zeros((1, nvars)), np.array([c.c]), prec)

    @classmethod
    def one(cls, field, nvars, coords, prec=INF):
        return cls.constant(field, nvars, coords, 1, prec)

    @classmethod
    def monomial(cls, field, exp, coef=1, coords="Y", prec=INF):
        exp = tuple(int(v) for v in exp)
        c = field(coef)
        return cls(field, len(exp), coords, np.array([exp]), np.array([c.c]), prec)

    @classmethod
    def from_dict(cls, field, nvars, coords, terms: Dict[tuple, object], prec=INF):
        if not terms:
            return cls.zero(field, nvars, coords, prec)
        exps = np.array([tuple(k) for k in terms], dtype=np.int64)
        coefs = np.array([field(v).c for v in terms.values()], dtype=np.int64)
        return cls(field, nvars, coords, exps, coefs, prec)

    def like(self, exps, coefs, prec=None, canonical=False):
        return TruncLaurent(self.field, self.nvars, self.coords, exps, coefs,
                            self.prec if prec is None else prec, _canonical=canonical)

    # inspection ----------------------------------------------------------------
    def __len__(self):
        return len(self.exps)

    def degrees(self) -> np.ndarray:
        return self.exps.sum(axis=1)

    def valuation(self):
        """Least total degree of a stored term (prec if the element is zero mod prec)."""
        if len(self.exps) == 0:
            return self.prec
        return int(self.degrees().min())

    def is_zero(self) -> bool:
        return len(self.exps) == 0

    def is_exact(self) -> bool:
        return self.prec == INF

    def terms(self) -> Dict[tuple, FFElem]:
        return {tuple(int(v) for v in e): _ffe(self.field, c) for e, c in zip(self.exps, self.coefs)}

    def coefficient(self, exp) -> FFElem:
        exp = np.asarray(exp, dtype=np.int64)
        hit = np.nonzero((self.exps == exp).all(axis=1))[0]
        if len(hit) == 0:
            if exp.sum() >= self.prec:
                raise PrecisionError("coefficient beyond the known precision")
            return self.field.zero
        return _ffe(self.field, self.coefs[hit[0]])

    def leading_term(self):
        """(exponent, coefficient) of the unique term of least degree."""
        if self.is_zero():
            raise ValuationError("zero element has no leading term")
        deg = self.degrees()
        idx = np.nonzero(deg == deg.min())[0]
        if len(idx) != 1:
            raise ValuationError("leading form is not a monomial")
        i = idx[0]
        return tuple(int(v) for v in self.exps[i]), _ffe(self.field, self.coefs[i])

    def serialize(self) -> list:
        """Canonical sorted (exponent, coefficient) pairs."""
        return [[list(map(int, e)), list(map(int, c))] for e, c in zip(self.exps, self.coefs)]

    def __repr__(self):
        parts = []
        for e, c in list(zip(self.exps, self.coefs))[:8]:
            parts.append(f"{_ffe(self.field, c)}*{self.coords}^{tuple(int(v) for v in e)}")
        more = "" if len(self.exps) <= 8 else f" + ...({len(self.exps)} terms)"
        prec = "" if self.prec == INF else f" + O(deg {self.prec})"
        return (" + ".join(parts) or "0") + more + prec

    # arithmetic ---------------------------------------------------------------
    def _check(self, other: "TruncLaurent"):
        if self.coords != other.coords or self.nvars != other.nvars:
            raise CoordinateError(f"coordinate mismatch: {self.coords} vs {other.coords}")
        if self.field != other.field:
            raise CoordinateError("field mismatch")

    def _lift(self, other) -> "TruncLaurent":
        if isinstance(other, TruncLaurent):
            self._check(other)
            return other
        return TruncLaurent.constant(self.field, self.nvars, self.coords, other)

    def __add__(self, other):
        o = self._lift(other)
        prec = min(self.prec, o.prec)
        return self.like(np.vstack([self.exps, o.exps]), np.vstack([self.coefs, o.coefs]), prec)

    __radd__ = __add__

    def __neg__(self):
        return self.like(self.exps, (-self.coefs) % self.field.p, canonical=True)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "TruncLaurent":
        c = self.field(c)
        if c.is_zero():
            return TruncLaurent.zero(self.field, self.nvars, self.coords, self.prec)
        return self.like(self.exps, fscale(self.coefs, c), canonical=True)

    def __mul__(self, other):
        if not isinstance(other, TruncLaurent):
            return self.scale(other)
        self._check(other)
        vx, vy = self.valuation(), other.valuation()
        prec = min(self.prec + vy, other.prec + vx)
        if self.is_zero() or other.is_zero():
            return TruncLaurent.zero(self.field, self.nvars, self.coords, prec)
        # drop terms that cannot contribute below prec
        a_ex, a_co = self.exps, self.coefs
        b_ex, b_co = other.exps, other.coefs
        if prec != INF:
            ka = a_ex.sum(1) + vy < prec
            kb = b_ex.sum(1) + vx < prec
            a_ex, a_co, b_ex, b_co = a_ex[ka], a_co[ka], b_ex[kb], b_co[kb]
        exps, coefs = _sparse_product(a_ex, a_co, b_ex, b_co, self.field)
        return self.like(exps, coefs, prec)

    __rmul__ = __mul__

    def monomial_multiply(self, exp, coef=1) -> "TruncLaurent":
        """Multiply by c*X^exp exactly (shifts the precision)."""
        exp = np.asarray(exp, dtype=np.int64)
        prec = self.prec + int(exp.sum())
        out = self.like(self.exps + exp, self.coefs, prec, canonical=True)
        c = self.field(coef)
        return out if c.is_one() else out.scale(c)

    def truncate(self, prec) -> "TruncLaurent":
        return self.like(self.exps, self.coefs, min(prec, self.prec))

    def with_prec(self, prec) -> "TruncLaurent":
        """Declare a (possibly larger) precision; used for exact inputs."""
        return self.like(self.exps, self.coefs, prec)

    def inverse(self, prec=None) -> "TruncLaurent":
        """Inverse of c*X^k*(1 + eps) with eps of positive valuation."""
        k, c = self.leading_term()
        lead = TruncLaurent.monomial(self.field, k, c, self.coords)
        inv_lead = TruncLaurent.monomial(self.field, tuple(-v for v in k), c.inverse(), self.coords)
        eps = (self * inv_lead) - 1
        target = self.prec - sum(k) if self.prec != INF else INF
        if prec is not None:
            target = min(target, prec + sum(k))
        if eps.is_zero() and target == INF:
            return inv_lead
        if target == INF:
            raise PrecisionError("inverse of a non-monomial exact element needs a precision")
        unit_inv = geometric_inverse(eps, target)
        out = unit_inv.monomial_multiply(tuple(-v for v in k), c.inverse())
        return out

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        if len(self.exps) == 1:
            # monomial: exact power
            c = _ffe(self.field, self.coefs[0]) ** e
            v = int(self.exps[0].sum())
            prec = INF if self.prec == INF else self.prec + (e - 1) * v
            if e == 0:
                prec = INF if self.prec == INF else self.prec - v
            return TruncLaurent(self.field, self.nvars, self.coords, self.exps * e,
                                np.array([c.c]), prec)
        result = TruncLaurent.one(self.field, self.nvars, self.coords)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, TruncLaurent):
            return self * other.inverse()
        return self.scale(self.field(other).inverse())

    # comparison -----------------------------------------------------------------
    def first_difference(self, other) -> Optional[tuple]:
        """Least-degree monomial where self and other differ below the common precision."""
        d = self - self._lift(other)
        if d.is_zero():
            return None
        deg = d.degrees()
        i = int(np.argmin(deg))
        e = tuple(int(v) for v in d.exps[i])
        return e, self.coefficient_or_zero(e), self._lift(other).coefficient_or_zero(e)

    def coefficient_or_zero(self, exp) -> FFElem:
        exp = np.asarray(exp, dtype=np.int64)
        hit = np.nonzero((self.exps == exp).all(axis=1))[0]
        return _ffe(self.field, self.coefs[hit[0]]) if len(hit) else self.field.zero

    def agrees(self, other) -> bool:
        return self.first_difference(other) is None

    def __eq__(self, other):
        if not isinstance(other, TruncLaurent):
            try:
                other = self._lift(other)
            except Exception:
                return NotImplemented
        return self.agrees(other)

    __hash__ = None

    # structure maps -------------------------------------------------------------
    def map_exponents(self, matrix: np.ndarray, scale_prec) -> "TruncLaurent":
        """Monomial substitution X^k -> X^(k @ matrix.T); prec multiplied by scale_prec."""
        exps = self.exps @ np.asarray(matrix, dtype=np.int64).T
        prec = self.prec * scale_prec if self.prec != INF else INF
        return self.like(exps, self.coefs, prec)

    def frob_coefficients(self, k: int) -> "TruncLaurent":
        """Apply x -> x^(p^k) to every coefficient."""
        mat = fpow_matrix(self.field, k)
        return self.like(self.exps, self.coefs @ mat.T % self.field.p, canonical=True)

    def support_degrees(self) -> list:
        return sorted(set(int(d) for d in self.degrees()))


def _canonicalise(exps, coefs, field, prec):
    if len(exps) == 0:
        return exps.reshape(0, exps.shape[1]), coefs.reshape(0, field.n)
    if prec != INF:
        keep = exps.sum(1) < prec
        exps, coefs = exps[keep], coefs[keep]
        if len(exps) == 0:
            return exps, coefs
    uniq, inv = np.unique(exps, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    if len(uniq) != len(exps):
        acc = np.zeros((len(uniq), field.n), dtype=np.int64)
        np.add.at(acc, inv, coefs)
        coefs = acc % field.p
        exps = uniq
    else:
        order = np.argsort(inv)
        exps, coefs = uniq, coefs[order] % field.p
    nz = coefs.any(axis=1)
    return exps[nz], coefs[nz]


def _sparse_product(a_ex, a_co, b_ex, b_co, field, chunk=4_000_000):
    """All pairwise products, grouped by exponent."""
    la, lb = len(a_ex), len(b_ex)
    if la == 0 or lb == 0:
        return np.zeros((0, a_ex.shape[1]), dtype=np.int64), np.zeros((0, field.n), dtype=np.int64)
    rows = max(1, chunk // max(1, lb * (2 * field.n - 1)))
    exps_parts, coef_parts = [], []
    for s in range(0, la, rows):
        ae, ac = a_ex[s:s + rows], a_co[s:s + rows]
        ex = (ae[:, None, :] + b_ex[None, :, :]).reshape(-1, a_ex.shape[1])
        co = fmul(ac[:, None, :], b_co[None, :, :], field).reshape(-1, field.n)
        exps_parts.append(ex)
        coef_parts.append(co)
    return np.vstack(exps_parts), np.vstack(coef_parts)


def geometric_inverse(eps: TruncLaurent, target) -> TruncLaurent:
    """(1 + eps)^(-1) to absolute precision target, eps of positive valuation."""
    v = eps.valuation()
    if v <= 0:
        raise ValuationError("1 + eps is not a 1-unit")
    result = TruncLaurent.one(eps.field, eps.nvars, eps.coords).with_prec(target)
    term = TruncLaurent.one(eps.field, eps.nvars, eps.coords)
    neg = -eps.truncate(target)
    k = 0
    while True:
        k += 1
        if k * v >= target:
            break
        term = (term * neg).truncate(target)
        result = result + term
    return result.truncate(target)


def series_mul(x: TruncLaurent, y: TruncLaurent) -> TruncLaurent:
    return x * y


def zp_power(u: TruncLaurent, x, N=None, M: Optional[int] = None) -> TruncLaurent:
    """u^x = sum_k binom(x, k) (u - 1)^k for a 1-unit u and a p-adic integer x.

    ``x`` may be an int or a p-integral Fraction.  The result is known to
    absolute precision min(u.prec, N).
    """
    p = u.field.p
    eps = u - 1
    target = u.prec if N is None else min(u.prec, N)
    if target == INF:
        if eps.is_zero():
            return u
        raise PrecisionError("zp_power of an exact non-trivial 1-unit needs N")
    if eps.is_zero():
        return TruncLaurent.one(u.field, u.nvars, u.coords, target)
    v = eps.valuation()
    if v <= 0:
        raise ValuationError("u - 1 must have positive valuation")
    kmax = -(-int(target) // v)  # ceil
    need = ndigits(max(kmax, 1), p) + 1
    if M is None:
        M = need
    elif M < need:
        raise PrecisionError(f"exponent known mod p^{M}; need p^{need} for {kmax} binomial terms")
    xr = zp_residue(x, p, M)
    binoms = padic_binomial_table(np.array([xr]), kmax + 1, p, M)[0]
    result = TruncLaurent.one(u.field, u.nvars, u.coords).with_prec(target)
    power = TruncLaurent.one(u.field, u.nvars, u.coords)
    eps = eps.truncate(target)
    for k in range(1, kmax + 1):
        if k * v >= target:
            break
        power = (power * eps).truncate(target)
        b = int(binoms[k])
        if b:
            result = result + power.scale(b)
    return result.truncate(target)


def apply_phi(x: TruncLaurent) -> TruncLaurent:
    """phi on Y-coordinates: Y_i -> Y_{i-1}^p, coefficients fixed."""
    if x.coords != "Y":
        raise CoordinateError("apply_phi expects Y-coordinates")
    f, p = x.nvars, x.field.p
    # new exponent at slot i is p * old exponent at slot i+1
    mat = np.zeros((f, f), dtype=np.int64)
    for i in range(f):
        mat[i, (i + 1) % f] = p
    return x.map_exponents(mat, p)


def apply_phi_q(x: TruncLaurent, q: int) -> TruncLaurent:
    """phi_q = phi^f: every exponent multiplied by q (Y- or univariate coordinates)."""
    return x.map_exponents(np.eye(x.nvars, dtype=np.int64) * q, q)


def frob_shift(x: TruncLaurent, i: int) -> TruncLaurent:
    """Coefficientwise Frobenius^i combined with the index shift Y_j -> Y_{j+i}."""
    f = x.nvars
    mat = np.zeros((f, f), dtype=np.int64)
    for j in range(f):
        mat[(j + i) % f, j] = 1
    return x.map_exponents(mat, 1).frob_coefficients(i)


# ---------------------------------------------------------------------------
# dense power series in f variables truncated by total degree

@lru_cache(maxsize=None)
def degree_grid(N: int, f: int) -> np.ndarray:
    grids = np.indices((N,) * f)
    g = grids.sum(axis=0)
    g.setflags(write=False)
    return g


class DenseT:
    """Power series sum c_k T^k with |k| < N, coefficients in a GF (last axis)."""

    __slots__ = ("field", "f", "N", "data", "coords")

    def __init__(self, field: GF, f: int, N: int, data: np.ndarray, coords: str = "T",
                 clean: bool = False):
        self.field, self.f, self.N, self.coords = field, f, N, coords
        if not clean:
            data = np.asarray(data, dtype=np.int64) % field.p
            data = data * (degree_grid(N, f) < N)[..., None]
        self.data = data

    @classmethod
    def zero(cls, field, f, N, coords="T"):
        return cls(field, f, N, np.zeros((N,) * f + (field.n,), dtype=np.int64), coords, clean=True)

    @classmethod
    def from_terms(cls, field, f, N, terms: Dict[tuple, object], coords="T"):
        data = np.zeros((N,) * f + (field.n,), dtype=np.int64)
        for k, c in terms.items():
            if sum(k) < N:
                data[tuple(k)] = (data[tuple(k)] + np.array(field(c).c)) % field.p
        return cls(field, f, N, data, coords, clean=True)

    @classmethod
    def one(cls, field, f, N, coords="T"):
        return cls.from_terms(field, f, N, {(0,) * f: 1}, coords)

    @classmethod
    def variable(cls, field, f, N, j, coords="T"):
        k = [0] * f
        k[j] = 1
        return cls.from_terms(field, f, N, {tuple(k): 1}, coords)

    def like(self, data, N=None, clean=False):
        return DenseT(self.field, self.f, self.N if N is None else N, data, self.coords, clean)

    def __repr__(self):
        t = self.terms()
        items = list(t.items())[:8]
        return " + ".join(f"{c}*{self.coords}^{k}" for k, c in items) + f" + O(deg {self.N})"

    def terms(self) -> Dict[tuple, FFElem]:
        nz = np.argwhere(self.data.any(axis=-1))
        return {tuple(int(v) for v in k): _ffe(self.field, self.data[tuple(k)]) for k in nz}

    def order(self) -> int:
        nz = self.data.any(axis=-1)
        if not nz.any():
            return self.N
        return int(degree_grid(self.N, self.f)[nz].min())

    def coefficient(self, k) -> FFElem:
        return _ffe(self.field, self.data[tuple(k)])

    def _check(self, other):
        if not isinstance(other, DenseT) or other.f != self.f or other.field != self.field:
            raise CoordinateError("incompatible dense series")
        if other.coords != self.coords:
            raise CoordinateError(f"coordinate mismatch: {self.coords} vs {other.coords}")

    def truncate(self, N: int) -> "DenseT":
        if N >= self.N:
            if N == self.N:
                return self
            data = np.zeros((N,) * self.f + (self.field.n,), dtype=np.int64)
            data[(slice(0, self.N),) * self.f] = self.data
            return self.like(data, N, clean=True)
        data = self.data[(slice(0, N),) * self.f]
        return self.like(data, N)

    def __add__(self, other):
        self._check(other)
        N = min(self.N, other.N)
        a, b = self.truncate(N), other.truncate(N)
        return self.like((a.data + b.data) % self.field.p, N, clean=True)

    def __neg__(self):
        return self.like((-self.data) % self.field.p, clean=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DenseT":
        return self.like(fscale(self.data, self.field(c)), clean=True)

    def __mul__(self, other):
        if not isinstance(other, DenseT):
            return self.scale(other)
        self._check(other)
        N = min(self.N, other.N)
        data = dense_mul(self.data, other.data, self.field, self.f, N,
                         self.order(), other.order())
        return self.like(data, N, clean=True)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = DenseT.one(self.field, self.f, self.N, self.coords)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, DenseT):
            return NotImplemented
        N = min(self.N, other.N)
        return bool(np.array_equal(self.truncate(N).data, other.truncate(N).data))

    __hash__ = None

    def first_difference(self, other):
        N = min(self.N, other.N)
        d = (self.truncate(N) - other.truncate(N))
        if d.order() >= N:
            return None
        nz = np.argwhere(d.data.any(axis=-1))
        degs = nz.sum(axis=1)
        k = tuple(int(v) for v in nz[np.argmin(degs)])
        return k, self.coefficient(k), other.coefficient(k)

    def homogeneous(self, d: int) -> np.ndarray:
        """Degree-d part as a dense (d+1,)*f array."""
        out = np.zeros((d + 1,) * self.f + (self.field.n,), dtype=np.int64)
        if d >= self.N:
            raise PrecisionError(f"degree {d} beyond truncation {self.N}")
        m = min(d + 1, self.N)
        sub = self.data[(slice(0, m),) * self.f]
        mask = degree_grid(m, self.f) == d
        out[(slice(0, m),) * self.f][mask] = sub[mask]
        return out

    def phi(self) -> "DenseT":
        """T_j -> T_j^p (F-linear)."""
        p, N = self.field.p, self.N
        data = np.zeros_like(self.data)
        m = -(-N // p)
        data[(slice(0, N, p),) * self.f] = self.data[(slice(0, m),) * self.f]
        return self.like(data)

    def psi(self) -> "DenseT":
        """Identity component of the decomposition over N_0/N_0^p.

        psi(T^m) = (-1)^(sum r) T^((m - r)/p) with r_j = m_j mod p.  The output
        keeps only the degrees determined by x mod degree N (``psi_precision``).
        """
        p, N, f = self.field.p, self.N, self.f
        Nout = psi_precision(N, p, f)
        if Nout <= 0:
            return DenseT.zero(self.field, f, 1, self.coords)
        out = np.zeros((Nout,) * f + (self.field.n,), dtype=np.int64)
        for r in np.ndindex(*(p,) * f):
            sl = tuple(slice(r[j], None, p) for j in range(f))
            block = self.data[sl]
            cut = tuple(slice(0, min(Nout, block.shape[j])) for j in range(f))
            sign = -1 if sum(r) % 2 else 1
            out[cut] += sign * block[cut]
        return DenseT(self.field, f, Nout, out % p, self.coords)

    def frob_coefficients(self, k: int) -> "DenseT":
        mat = fpow_matrix(self.field, k)
        return self.like(self.data @ mat.T % self.field.p, clean=True)

    def mul_axis(self, axis: int, u: np.ndarray) -> "DenseT":
        """Multiply by a univariate series u(T_axis) with F_p coefficients."""
        N, p = self.N, self.field.p
        u = np.asarray(u, dtype=np.int64)[:N] % p
        out = np.zeros_like(self.data)
        for s in np.nonzero(u)[0]:
            src = [slice(None)] * (self.f + 1)
            dst = [slice(None)] * (self.f + 1)
            src[axis] = slice(0, N - s)
            dst[axis] = slice(s, N)
            out[tuple(dst)] += u[s] * self.data[tuple(src)]
        return self.like(out % p)

    def psi_axis(self, axis: int, Nout: int) -> "DenseT":
        """psi in the single variable T_axis (other variables untouched), box output."""
        p = self.field.p
        shape = list(self.data.shape)
        shape[axis] = Nout
        out = np.zeros(shape, dtype=np.int64)
        for r in range(p):
            sl = [slice(None)] * (self.f + 1)
            sl[axis] = slice(r, None, p)
            block = self.data[tuple(sl)]
            m = min(Nout, block.shape[axis])
            dst = [slice(None)] * (self.f + 1)
            dst[axis] = slice(0, m)
            src = [slice(None)] * (self.f + 1)
            src[axis] = slice(0, m)
            out[tuple(dst)] += (-1 if r % 2 else 1) * block[tuple(src)]
        return out % p

    def to_sparse(self, coords=None) -> TruncLaurent:
        nz = np.argwhere(self.data.any(axis=-1))
        coefs = self.data[tuple(nz.T)] if len(nz) else np.zeros((0, self.field.n))
        return TruncLaurent(self.field, self.f, coords or self.coords, nz, coefs, self.N)

    @classmethod
    def from_sparse(cls, x: TruncLaurent, N: int) -> "DenseT":
        if len(x) and x.exps.min() < 0:
            raise CoordinateError("negative exponents cannot be placed in the dense T-model")
        data = np.zeros((N,) * x.nvars + (x.field.n,), dtype=np.int64)
        keep = x.degrees() < N
        ex, co = x.exps[keep], x.coefs[keep]
        if len(ex):
            data[tuple(ex.T)] = co
        N = int(min(N, x.prec))
        return cls(x.field, x.nvars, N, data[(slice(0, N),) * x.nvars], x.coords)


def psi_precision(N: int, p: int, f: int) -> int:
    """Degrees of psi(x) determined by x mod degree N.

    An unknown term T^m with |m| >= N maps to degree (|m| - |r|)/p >=
    (N - f(p-1))/p, so psi(x) is known in degrees below that bound.
    """
    return max(0, -(-(N - f * (p - 1)) // p))


def dense_mul(A: np.ndarray, B: np.ndarray, field: GF, f: int, N: int,
              va: int = 0, vb: int = 0) -> np.ndarray:
    """Product of two dense truncated series (total degree < N) via FFT."""
    p, n = field.p, field.n
    sa = max(0, min(N - vb, A.shape[0]))
    sb = max(0, min(N - va, B.shape[0]))
    out = np.zeros((N,) * f + (n,), dtype=np.int64)
    if sa == 0 or sb == 0 or va + vb >= N:
        return out
    A = A[(slice(0, sa),) * f]
    B = B[(slice(0, sb),) * f]
    half = p // 2
    Ac = np.where(A > half, A - p, A).astype(np.float64)
    Bc = np.where(B > half, B - p, B).astype(np.float64)
    L = min(sa + sb - 1, N + max(sa, sb))
    shape = [scipy.fft.next_fast_len(sa + sb - 1, real=True)] * f + [2 * n - 1]
    axes = list(range(f + 1))
    if n == 1:
        shape, axes = shape[:-1], axes[:-1]
        FA = scipy.fft.rfftn(Ac[..., 0], shape, axes=axes)
        FB = scipy.fft.rfftn(Bc[..., 0], shape, axes=axes)
        C = scipy.fft.irfftn(FA * FB, shape, axes=axes)[..., None]
    else:
        FA = scipy.fft.rfftn(Ac, shape, axes=axes)
        FB = scipy.fft.rfftn(Bc, shape, axes=axes)
        C = scipy.fft.irfftn(FA * FB, shape, axes=axes)
    m = min(N, C.shape[0])
    C = C[(slice(0, m),) * f]
    Ci = np.rint(C)
    if Ci.size and np.abs(C - Ci).max() > 0.2:
        raise ArithmeticError("FFT rounding error too large")
    Ci = _reduce_poly(Ci.astype(np.int64), field)
    Ci = Ci * (degree_grid(m, f) < N)[..., None]
    out[(slice(0, m),) * f] = Ci
    del L
    return out


# ---------------------------------------------------------------------------
# linear change of variables on dense forms

def _elementary_factors(B: list, field: GF) -> list:
    """Write B = E_1 ... E_m with elementary E (returned in that order).

    Entries are FFElem.  Factor types: ('swap', i, j), ('scale', i, c),
    ('shear', i, j, c) meaning T_i -> T_i + c T_j.
    """
    n = len(B)
    A = [row[:] for row in B]
    ops = []  # row operations R with R_m...R_1 B = I
    for col in range(n):
        piv = next((r for r in range(col, n) if not A[r][col].is_zero()), None)
        if piv is None:
            raise ParameterError("singular change of variables")
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            ops.append(("swap", col, piv))
        c = A[col][col]
        if not c.is_one():
            inv = c.inverse()
            A[col] = [v * inv for v in A[col]]
            ops.append(("scale", col, inv))
        for r in range(n):
            if r != col and not A[r][col].is_zero():
                c = A[r][col]
                A[r] = [a - c * b for a, b in zip(A[r], A[col])]
                ops.append(("shear", r, col, -c))
    # B = R_1^{-1} ... R_m^{-1}
    factors = []
    for op in ops:
        if op[0] == "swap":
            factors.append(op)
        elif op[0] == "scale":
            factors.append(("scale", op[1], op[2].inverse()))
        else:
            factors.append(("shear", op[1], op[2], -op[3]))
    return factors


def _binom_mod_p_array(n: int, p: int) -> np.ndarray:
    """C[k, l] = binom(k, l) mod p for k, l < n."""
    C = np.zeros((n, n), dtype=np.int64)
    for k in range(n):
        C[k, 0] = 1
        for l in range(1, k + 1):
            C[k, l] = (C[k - 1, l - 1] + (C[k - 1, l] if l < k else 0)) % p
    return C


def linear_substitute(arr: np.ndarray, factors: list, field: GF,
                      cap: Optional[int] = None) -> np.ndarray:
    """Given P(T) as a dense array, return Q(W) = P(B W) for B = E_1...E_m.

    Row substitution of elementary type E: (E W)_i = W_i + c W_j for a shear,
    c W_i for a scale, swap of W_i, W_j.  Exponent boxes are enlarged as
    needed so the result is exact for polynomial inputs.  With ``cap`` every
    axis is cropped to length cap, which is lossless when P has total degree
    below cap.
    """
    p = field.p
    f = arr.ndim - 1
    for op in factors:
        if op[0] == "swap":
            _, i, j = op
            perm = list(range(f + 1))
            perm[i], perm[j] = perm[j], perm[i]
            arr = np.transpose(arr, perm).copy()
        elif op[0] == "scale":
            _, i, c = op
            n = arr.shape[i]
            pw = [field.one]
            for _ in range(1, n):
                pw.append(pw[-1] * c)
            mats = np.stack([field.mul_matrix(x) for x in pw])  # (n, d, d)
            moved = np.moveaxis(arr, i, 0)
            moved = np.einsum("kab,k...b->k...a", mats, moved) % p
            arr = np.moveaxis(moved, 0, i)
        else:
            _, i, j, c = op
            # (T_i + c T_j)^{k_i} T_j^{k_j} = sum_l binom(k_i, l) c^l T_i^{k_i - l} T_j^{k_j + l}
            ni, nj = arr.shape[i], arr.shape[j]
            newshape = list(arr.shape)
            newshape[j] = nj + ni - 1
            out = np.zeros(newshape, dtype=np.int64)
            C = _binom_mod_p_array(ni, p)
            cl = field.one
            for l in range(ni):
                if cap is not None and l >= cap:
                    break
                # terms with k_i >= l
                src = [slice(None)] * (f + 1)
                src[i] = slice(l, ni)
                block = arr[tuple(src)]
                coeff = C[l:ni, l]
                shape = [1] * (f + 1)
                shape[i] = ni - l
                block = block * coeff.reshape(shape) % p
                if not cl.is_one():
                    block = fscale(block, cl)
                dst = [slice(None)] * (f + 1)
                dst[i] = slice(0, ni - l)
                dst[j] = slice(l, l + nj)
                out[tuple(dst)] += block
                cl = cl * c
            if cap is not None and out.shape[j] > cap:
                out = np.take(out, np.arange(cap), axis=j)
            arr = out % p
    return arr


def coefficient_functional(factors: list, field: GF, t: Sequence[int]) -> np.ndarray:
    """Vector c with [W^t] P(BW) = sum_k P_k c_k for forms P of degree |t|.

    Computed as L^T e_t by applying the transposed elementary substitutions
    in reverse order.
    """
    p, f, d = field.p, len(t), int(sum(t))
    v = np.zeros((d + 1,) * f + (field.n,), dtype=np.int64)
    v[tuple(t) + (0,)] = 1
    C = _binom_mod_p_array(d + 1, p)
    for op in reversed(factors):
        if op[0] == "swap":
            _, i, j = op
            perm = list(range(f + 1))
            perm[i], perm[j] = perm[j], perm[i]
            v = np.transpose(v, perm).copy()
        elif op[0] == "scale":
            _, i, c = op
            pw = [field.one]
            for _ in range(d):
                pw.append(pw[-1] * c)
            mats = np.stack([field.mul_matrix(x) for x in pw])
            moved = np.einsum("kab,k...b->k...a", mats, np.moveaxis(v, i, 0)) % p
            v = np.moveaxis(moved, 0, i)
        else:
            # (S^T v)[k] = sum_l binom(k_i, l) c^l v[k - l e_i + l e_j]
            _, i, j, c = op
            out = np.zeros_like(v)
            cl = field.one
            for l in range(d + 1):
                src = [slice(None)] * (f + 1)
                dst = [slice(None)] * (f + 1)
                src[i], src[j] = slice(0, d + 1 - l), slice(l, d + 1)
                dst[i], dst[j] = slice(l, d + 1), slice(0, d + 1 - l)
                shape = [1] * (f + 1)
                shape[i] = d + 1 - l
                block = v[tuple(src)] * C[l:, l].reshape(shape) % p
                if not cl.is_one():
                    block = fscale(block, cl)
                out[tuple(dst)] += block
                cl = cl * c
            v = out % p
    return v


# ---------------------------------------------------------------------------
# group-ring expansions and the coordinate change

def group_ring_sum(weights: np.ndarray, coords: np.ndarray, N: int, field: GF,
                   p: int, M: int) -> np.ndarray:
    """Dense expansion of sum_l w_l prod_j (1+T_j)^{coords[l, j]} to total degree < N.

    Writing x = x_0 + p x' with 0 <= x_0 < p, (1+T)^x = (1+T)^{x_0} (1+T^p)^{x'}
    in characteristic p.  The second factor contributes monomials T^{p m}
    with coefficient prod_j binom(x'_j, m_j); the first is a polynomial of
    degree < p in each variable, obtained from the cell sums over x_0 by a
    binomial transform along each axis.
    """
    L, f = coords.shape
    n = field.n
    coords = np.asarray(coords, dtype=np.int64) % (p ** M)
    x0 = coords % p
    x1 = coords // p
    mmax = (N - 1) // p
    if mmax > 0 and M - 1 < ndigits(mmax, p) + 1:
        raise PrecisionError("precision too small for the group-ring expansion")
    B1 = [padic_binomial_table(x1[:, j], mmax + 1, p, max(M - 1, 1)) for j in range(f)]
    cell = np.ravel_multi_index(tuple(x0.T), (p,) * f)
    C = small_binom_table_np(p)
    W = np.asarray(weights, dtype=np.int64) % p
    out = np.zeros((N,) * f + (n,), dtype=np.int64)
    for m in _multi_indices(f, mmax):
        coeff = np.ones(L, dtype=np.int64)
        for j in range(f):
            coeff = coeff * B1[j][:, m[j]] % p
        if not coeff.any():
            continue
        V = np.zeros((p ** f, n), dtype=np.int64)
        np.add.at(V, cell, W * coeff[:, None])
        V = (V % p).reshape((p,) * f + (n,))
        for j in range(f):
            V = np.moveaxis(np.tensordot(V, C, axes=([j], [0])) % p, -1, j)
        shift = [p * mj for mj in m]
        box = tuple(slice(0, max(0, min(p, N - shift[j]))) for j in range(f))
        dst = tuple(slice(shift[j], shift[j] + (box[j].stop or 0)) for j in range(f))
        out[dst] += V[box]
    out %= p
    return out * (degree_grid(N, f) < N)[..., None]


def _multi_indices(f: int, total: int):
    """All m in N^f with |m| <= total."""
    if f == 1:
        for a in range(total + 1):
            yield (a,)
        return
    for a in range(total + 1):
        for rest in _multi_indices(f - 1, total - a):
            yield (a,) + rest


@lru_cache(maxsize=None)
def small_binom_table_np(p: int) -> np.ndarray:
    from .base_arith import small_binom_table

    return small_binom_table(p)


class CoordChange:
    """Expansions of Y_i in the T_j, and the linear coordinates Z_j.

    All dense data live over F_q (identified with sigma_0(F_q) inside F).
    Y_0 = sum_{lambda in F_q^x} lambda^{-1} delta_{[lambda]} and Y_i is its
    coefficientwise Frobenius twist.  Z_j = sum_i a_ij T_i is the linear part
    of Y_j.
    """

    def __init__(self, tower: FieldTower, N: int, M: Optional[int] = None,
                 ring: Optional[OKRing] = None):
        from .base_arith import precision_for_degree

        self.tower = tower
        self.p, self.f, self.N = tower.p, tower.f, N
        self.M = M if M is not None else precision_for_degree(N, tower.p)
        if self.M < ndigits(max(N - 1, 1), tower.p) + 1:
            raise PrecisionError("precision too small for the requested degree")
        self.ok = ring if ring is not None else OKRing(tower, self.M)
        self.Fq = tower.Fq
        self._Y = {}
        self._pow_cache = {}
        self._mono_cache = {}
        self._zfun_cache = {}
        table = self.ok.teich_table()  # rows [w^k]
        self.teich_rows = table
        self.lam_coords = self.ok.basis_coords_array(table)
        # weights lambda^{-1} for lambda = w^k, i.e. w^{-k}
        Fq = self.Fq
        winv = Fq.gen.inverse()
        ws, x = [], Fq.one
        for _ in range(tower.q - 1):
            ws.append(x.c)
            x = x * winv
        self.weights0 = np.array(ws, dtype=np.int64)
        self.Y0 = DenseT(Fq, self.f, N,
                         group_ring_sum(self.weights0, self.lam_coords, N, Fq, self.p, self.M))
        self._Y[0] = self.Y0
        self.A = self._linear_matrix()
        # Z = A^T T, so T = (A^T)^{-1} Z
        self._factors_t_to_z = _elementary_factors(_inverse_matrix(_transpose(self.A), Fq), Fq)
        self._factors_z_to_t = _elementary_factors(_transpose(self.A), Fq)

    # Y expansions ---------------------------------------------------------------
    def Y(self, i: int) -> DenseT:
        i %= self.f
        if i not in self._Y:
            self._Y[i] = self.Y0.frob_coefficients(i)
        return self._Y[i]

    def _linear_matrix(self) -> list:
        """a_ij = coefficient of T_i in Y_j."""
        A = []
        for i in range(self.f):
            k = [0] * self.f
            k[i] = 1
            A.append([self.Y(j).coefficient(tuple(k)) for j in range(self.f)])
        return A

    def y_power(self, i: int, m: int, N: Optional[int] = None) -> DenseT:
        """Y_i^m for m >= 0, using Y_i^(p m') = phi(Y_{i+1}^m')."""
        N = self.N if N is None else N
        key = (i % self.f, m, N)
        if key in self._pow_cache:
            return self._pow_cache[key]
        if m == 0:
            out = DenseT.one(self.Fq, self.f, N)
        elif m * 1 >= N:
            out = DenseT.zero(self.Fq, self.f, N)
        elif m == 1:
            out = self.Y(i).truncate(N)
        else:
            mp, r = divmod(m, self.p)
            if mp:
                base = self.y_power(i + 1, mp, -(-N // self.p)).truncate(N).phi()
            else:
                base = DenseT.one(self.Fq, self.f, N)
            out = base
            if r:
                out = out * self._small_power(i, r, N)
        self._pow_cache[key] = out
        return out

    def _small_power(self, i, r, N):
        key = ("small", i % self.f, r, N)
        if key not in self._pow_cache:
            if r == 1:
                val = self.Y(i).truncate(N)
            else:
                h = r // 2
                val = self._small_power(i, h, N) * self._small_power(i, r - h, N)
            self._pow_cache[key] = val
        return self._pow_cache[key]

    def y_monomial(self, k: Sequence[int], N: Optional[int] = None) -> DenseT:
        N = self.N if N is None else N
        k = tuple(int(v) for v in k)
        key = (k, N)
        if key not in self._mono_cache:
            if min(k) < 0:
                raise CoordinateError("negative Y-exponent has no T-expansion")
            total = sum(k)
            out = DenseT.one(self.Fq, self.f, N)
            for i, m in enumerate(k):
                if m:
                    # the other factors have valuation total - m
                    Ni = max(1, N - (total - m))
                    out = out * self.y_power(i, m, Ni).truncate(N)
            self._mono_cache[key] = out
        return self._mono_cache[key]

    # coordinate conversions ------------------------------------------------------
    def form_t_to_z(self, form: np.ndarray) -> np.ndarray:
        """Homogeneous form in T (dense (d+1)^f array) rewritten in Z."""
        return linear_substitute(form, self._factors_t_to_z, self.Fq, cap=form.shape[0])

    def z_functional(self, t: Sequence[int]) -> np.ndarray:
        """Cached c with [Z^t] H = sum_k H_k c_k for T-forms H of degree |t|."""
        key = tuple(int(x) for x in t)
        if key not in self._zfun_cache:
            self._zfun_cache[key] = coefficient_functional(self._factors_t_to_z, self.Fq, key)
        return self._zfun_cache[key]

    def form_z_to_t(self, form: np.ndarray) -> np.ndarray:
        return linear_substitute(form, self._factors_z_to_t, self.Fq, cap=form.shape[0])

    def t_to_z(self, x: DenseT) -> DenseT:
        """Full conversion of a dense T-series into Z-coordinates."""
        out = np.zeros_like(x.data)
        for d in range(x.N):
            H = self.form_t_to_z(x.homogeneous(d))
            _add_form(out, H, d, x.N)
        return DenseT(x.field, x.f, x.N, out % self.p, coords="Z")

    def z_to_t(self, x: DenseT) -> DenseT:
        out = np.zeros_like(x.data)
        for d in range(x.N):
            H = self.form_z_to_t(x.homogeneous(d))
            _add_form(out, H, d, x.N)
        return DenseT(x.field, x.f, x.N, out % self.p, coords="T")

    def t_to_y(self, x: DenseT) -> TruncLaurent:
        """Rewrite a dense T-series as a polynomial in the Y_i (exact to degree N)."""
        if x.coords != "T":
            raise CoordinateError("t_to_y expects T-coordinates")
        N = x.N
        residual = x
        terms: Dict[tuple, np.ndarray] = {}
        for d in range(N):
            if residual.order() > d:
                continue
            H = self.form_t_to_z(residual.homogeneous(d))
            nz = np.argwhere(H.any(axis=-1))
            for k in nz:
                k = tuple(int(v) for v in k)
                if sum(k) != d:
                    continue
                c = H[k]
                terms[k] = c
                mono = self.y_monomial(k, N)
                residual = residual - mono.scale(_ffe(self.Fq, c))
        if terms:
            exps = np.array(list(terms), dtype=np.int64)
            coefs = np.array(list(terms.values()), dtype=np.int64)
        else:
            exps = np.zeros((0, self.f), dtype=np.int64)
            coefs = np.zeros((0, self.Fq.n), dtype=np.int64)
        sparse = TruncLaurent(self.Fq, self.f, "Y", exps, coefs, N)
        return self.embed(sparse)

    def y_to_t(self, x: TruncLaurent, N: Optional[int] = None) -> DenseT:
        """Expand a Y-polynomial (nonnegative exponents) in the T_j."""
        N = self.N if N is None else int(min(N, x.prec))
        xq = self.unembed(x)
        out = DenseT.zero(self.Fq, self.f, N)
        for e, c in zip(xq.exps, xq.coefs):
            if e.sum() < N:
                out = out + self.y_monomial(e, N).scale(_ffe(self.Fq, c))
        return out

    # F_q <-> F ---------------------------------------------------------------------
    def embed(self, x: TruncLaurent) -> TruncLaurent:
        """Coefficients from F_q to F through sigma_0."""
        if x.field == self.tower.F:
            return x
        coefs = self.tower.embed_array(x.coefs)
        return TruncLaurent(self.tower.F, x.nvars, x.coords, x.exps, coefs, x.prec)

    def unembed(self, x: TruncLaurent) -> TruncLaurent:
        if x.field == self.Fq:
            return x
        coefs = unembed_array(self.tower, x.coefs)
        return TruncLaurent(self.Fq, x.nvars, x.coords, x.exps, coefs, x.prec)

    def embed_dense(self, x: DenseT) -> DenseT:
        return DenseT(self.tower.F, x.f, x.N, self.tower.embed_array(x.data), x.coords)


def _add_form(out: np.ndarray, H: np.ndarray, d: int, N: int):
    f = out.ndim - 1
    m = min(H.shape[0], N)
    sub = H[(slice(0, m),) * f]
    mask = degree_grid(m, f) == d
    view = out[(slice(0, m),) * f]
    view[mask] = (view[mask] + sub[mask])


def _transpose(A: list) -> list:
    return [list(r) for r in zip(*A)]


def _inverse_matrix(A: list, field: GF) -> list:
    n = len(A)
    aug = [list(row) + [field.one if i == j else field.zero for j in range(n)]
           for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise ParameterError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                c = aug[r][col]
                aug[r] = [a - c * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def unembed_array(tower: FieldTower, coefs: np.ndarray) -> np.ndarray:
    """Inverse of sigma_0 on arrays of F-coefficients lying in sigma_0(F_q)."""
    return tower.unembed_array(coefs)


def change_coords(x, target: str, cc: CoordChange):
    """Dispatch between Y (sparse), T and Z (dense) coordinates."""
    src = x.coords
    if src == target:
        return x
    if src == "Y" and target == "T":
        return cc.y_to_t(x)
    if src == "Y" and target == "Z":
        return cc.t_to_z(cc.y_to_t(x))
    if src == "T" and target == "Z":
        return cc.t_to_z(x)
    if src == "Z" and target == "T":
        return cc.z_to_t(x)
    if src == "T" and target == "Y":
        return cc.t_to_y(x)
    if src == "Z" and target == "Y":
        return cc.t_to_y(cc.z_to_t(x))
    raise CoordinateError(f"unsupported conversion {src} -> {target}")
