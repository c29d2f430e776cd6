"""The ring A as a computational object.

Dense data (group-ring expansions, psi, mu, trace) live in the T-model over
F_q; the O_K^x-action is computed directly on group elements: an element of
F[[N_0]] mod degree N is rewritten as a combination of delta_n, and a sends
delta_n to delta_{a n}.  The units f_{a,i} are carried in the sparse
Y-model over F.
"""
from __future__ import annotations

import itertools
import math
from typing import Dict, Optional, Sequence

import numpy as np

from .base_arith import (
    FFElem,
    FieldTower,
    OKElem,
    OKRing,
    ParameterError,
    PrecisionError,
    precision_for_degree,
    small_binom_table,
)
from .series import (
    INF,
    CoordChange,
    CoordinateError,
    DenseT,
    TruncLaurent,
    _binom_mod_p_array,
    _ffe,
    apply_phi,
    degree_grid,
    fmul,
    frob_shift,
    group_ring_sum,
    psi_precision,
)


def unit_key(a: OKElem) -> tuple:
    return tuple(a.c)


class ARing:
    """Truncated model of A attached to a FieldTower at degree cap N."""

    def __init__(self, tower: FieldTower, N: int, M: Optional[int] = None):
        self.tower = tower
        self.p, self.f, self.q = tower.p, tower.f, tower.q
        self.N = N
        self.M = M if M is not None else precision_for_degree(N + 1, tower.p)
        # one extra degree: dividing a(Y_0) by Y_0 loses one
        self.cc = CoordChange(tower, N + 1, self.M)
        self.ok = self.cc.ok
        self.F = tower.F
        self._act_cache: Dict[tuple, DenseT] = {}
        self._f_cache: Dict[tuple, TruncLaurent] = {}
        self._box_cache: Dict[tuple, tuple] = {}

    def __repr__(self):
        return f"ARing(p={self.p}, f={self.f}, N={self.N})"

    # Y-model helpers ----------------------------------------------------------------
    def Y(self, i: int, prec=INF) -> TruncLaurent:
        e = [0] * self.f
        e[i % self.f] = 1
        return TruncLaurent.monomial(self.F, e, 1, "Y", prec)

    def mono(self, exp, coef=1, prec=INF) -> TruncLaurent:
        return TruncLaurent.monomial(self.F, exp, coef, "Y", prec)

    def one(self, prec=INF) -> TruncLaurent:
        return TruncLaurent.one(self.F, self.f, "Y", prec)

    def sigma_bar(self, a: OKElem, i: int = 0) -> FFElem:
        """sigma_i(a mod p) in F."""
        return self.tower.sigma(i, a.reduce())

    # group-ring action --------------------------------------------------------------
    def alpha_matrix(self, a: OKElem) -> np.ndarray:
        """Matrix of multiplication by a in the basis (alpha_j), entries mod p^M."""
        ok = self.ok
        cols = [ok.basis_coords(a * al) for al in ok.alpha]
        return np.array(cols, dtype=np.int64).T

    def act_Y0_dense(self, a: OKElem, N: Optional[int] = None) -> DenseT:
        """a(Y_0) = sum_lambda lambda^{-1} delta_{a [lambda]} expanded in the T_j."""
        N = self.cc.N if N is None else N
        key = ("Y0", unit_key(a), N)
        if key not in self._act_cache:
            ok, cc = self.ok, self.cc
            rows = cc.teich_rows @ ok.mul_matrix(a).T % ok.mod
            coords = ok.basis_coords_array(rows)
            data = group_ring_sum(cc.weights0, coords, N, self.tower.Fq, self.p, self.M)
            self._act_cache[key] = DenseT(self.tower.Fq, self.f, N, data)
        return self._act_cache[key]

    def act_Y_dense(self, a: OKElem, i: int, N: Optional[int] = None) -> DenseT:
        return self.act_Y0_dense(a, N).frob_coefficients(i % self.f)

    def _delta_box(self, N: int):
        """Multi-indices i with |i| < N and the T -> delta change of basis per axis."""
        if N not in self._box_cache:
            idx = np.argwhere(degree_grid(N, self.f) < N)
            # T^k = prod_j (delta_j - 1)^{k_j} = sum_{i <= k} (-1)^{k-i} binom(k, i) delta^i
            C = _binom_mod_p_array(N, self.p)  # C[k, i]
            sign = np.fromfunction(lambda k, i: (-1) ** ((k - i) % 2), (N, N), dtype=np.int64)
            S = (C * sign) % self.p  # S[k, i]
            self._box_cache[N] = (idx, S)
        return self._box_cache[N]

    def ok_act_dense(self, a: OKElem, x: DenseT) -> DenseT:
        """Action of a unit a on a dense T-series, via delta_n -> delta_{a n}."""
        if x.coords != "T":
            raise CoordinateError("ok_act expects T-coordinates")
        N = x.N
        idx, S = self._delta_box(N)
        d = x.data
        for j in range(self.f):
            # d[.., i_j, ..] = sum_k S[k, i] d[.., k, ..]
            d = np.moveaxis(np.tensordot(d, S[:N, :N], axes=([j], [0])) % self.p, -1, j)
        weights = d[tuple(idx.T)]
        nz = weights.any(axis=1)
        idx, weights = idx[nz], weights[nz]
        if len(idx) == 0:
            return DenseT.zero(x.field, self.f, N)
        A = self.alpha_matrix(a)
        coords = (idx @ A.T) % self.ok.mod
        if x.field != self.tower.Fq:
            raise ParameterError("ok_act_dense works over F_q")
        data = group_ring_sum(weights, coords, N, x.field, self.p, self.M)
        return DenseT(x.field, self.f, N, data)

    # the units f_{a,i} ----------------------------------------------------------------
    def f_a(self, a: OKElem, i: int = 0) -> TruncLaurent:
        """f_{a,sigma_i} = sigma_i(abar) Y_i / a(Y_i) in the Y-model, known to degree N."""
        if not a.is_unit():
            raise ParameterError("a must be a unit")
        key = unit_key(a)
        if key not in self._f_cache:
            aY0 = self.act_Y0_dense(a)
            s = self.cc.t_to_y(aY0)  # exact to degree N+1
            lead = self.mono([1] + [0] * (self.f - 1), self.sigma_bar(a, 0))
            u = (s * lead.inverse()).truncate(self.N)
            self._f_cache[key] = u.inverse()
        f0 = self._f_cache[key]
        return f0 if i % self.f == 0 else frob_shift(f0, i % self.f)

    def act_Y(self, a: OKElem, i: int) -> TruncLaurent:
        """a(Y_i) = sigma_i(abar) Y_i f_{a,i}^{-1} in the Y-model."""
        return self.f_a(a, i).inverse() * self.mono(_unit_vec(self.f, i), self.sigma_bar(a, i))

    def ok_act(self, a: OKElem, x: TruncLaurent) -> TruncLaurent:
        """Action on a Y-model element: Y^k -> prod (sigma_i(abar) Y_i f_{a,i}^{-1})^{k_i}."""
        if x.coords != "Y":
            raise CoordinateError("ok_act expects Y-coordinates")
        finv = [self.f_a(a, i).inverse() for i in range(self.f)]
        sig = [self.sigma_bar(a, i) for i in range(self.f)]
        out = None
        cache: Dict[tuple, TruncLaurent] = {}
        for e, c in zip(x.exps, x.coefs):
            unit = self.one()
            for i, k in enumerate(e):
                k = int(k)
                if k:
                    kk = (i, k)
                    if kk not in cache:
                        cache[kk] = finv[i] ** k if k > 0 else self.f_a(a, i) ** (-k)
                    unit = unit * cache[kk]
            coef = _ffe(self.F, c)
            for i, k in enumerate(e):
                coef = coef * sig[i] ** int(k)
            term = unit.monomial_multiply(e, coef)
            out = term if out is None else out + term
        if out is None:
            return TruncLaurent.zero(self.F, self.f, "Y", x.prec)
        # unknown terms of x have degree >= prec and a preserves degrees
        return out.truncate(x.prec)

    # psi ------------------------------------------------------------------------
    def psi_T(self, x: DenseT) -> DenseT:
        return x.psi()

    def reconstruct_T(self, x: DenseT, omit: Optional[Sequence[int]] = None) -> DenseT:
        """sum_n delta_n phi(psi(delta_n^{-1} x)) over n = sum_j i_j alpha_j, 0 <= i_j <= p-1.

        The sum over n factors as a composition of one-variable sums, so it is
        evaluated axis by axis.  ``omit`` drops the term of one representative
        n (a negative control).
        """
        p, N, f = self.p, x.N, self.f
        binom = small_binom_table(p)
        data = x.data
        for j in range(f):
            acc = np.zeros_like(data)
            for i in range(p):
                acc = (acc + self._axis_term(data, j, i, N, binom)) % p
            data = acc
        if omit is not None:
            single = x.data
            for j in range(f):
                single = self._axis_term(single, j, int(omit[j]) % p, N, binom)
            data = (data - single) % p
        return DenseT(x.field, f, N, data)

    def _axis_term(self, data, j, i, N, binom):
        """delta^i phi(psi(delta^{-i} x)) in variable j, exact below T_j-degree N.

        Uses delta^{-i} = delta^{p-i} phi(delta^{-1}) and psi(phi(u) y) = u psi(y).
        """
        p = self.p
        shape = list(data.shape)
        big = N + p
        shape[j] = big
        ext = np.zeros(shape, dtype=np.int64)
        sl = [slice(None)] * data.ndim
        sl[j] = slice(0, N)
        ext[tuple(sl)] = data
        if i == 0:
            y = ext
        else:
            # multiply by (1+T)^{p-i}, a polynomial
            poly = binom[p - i, : p - i + 1]
            y = _mul_axis_poly(ext, j, poly, big, p)
        ps = _psi_axis(y, j, -(-big // p), p)
        # phi back, then multiply by delta^i and (when i > 0) phi(delta^{-1})
        ph = _phi_axis(ps, j, N, p)
        if i > 0:
            # delta^i phi(delta^{-1}) = (1+T)^i (1+T^p)^{-1}
            u = np.zeros(N, dtype=np.int64)
            u[::p] = [(-1) ** (k % 2) % p for k in range(len(u[::p]))]
            ph = _mul_axis_poly(ph, j, u, N, p)
            ph = _mul_axis_poly(ph, j, binom[i, : i + 1], N, p)
        return ph

    # mu -------------------------------------------------------------------------
    def mu(self, x: "ZLaurent") -> FFElem:
        """Coefficient of Z^{-1} in x * prod_j (1+T_j)^{-1}, as an element of F."""
        target = tuple(-1 - s for s in x.shift)
        if min(target) < 0:
            return self.F.zero
        d = sum(target)
        if d >= x.dense.N:
            raise PrecisionError("element not known far enough to evaluate mu")
        Q = x.dense
        inv = np.array([(-1) ** k for k in range(Q.N)], dtype=np.int64) % self.p
        for j in range(self.f):
            Q = Q.mul_axis(j, inv)
        H = Q.homogeneous(d)
        c = fmul(H, self.cc.z_functional(target), self.tower.Fq)
        c = c.reshape(-1, c.shape[-1]).sum(axis=0) % self.p
        return self.tower.sigma0(_ffe(self.tower.Fq, c))

    def mu_by_conversion(self, x: "ZLaurent") -> FFElem:
        """mu through a full T -> Z conversion of the relevant form (oracle)."""
        target = tuple(-1 - s for s in x.shift)
        if min(target) < 0:
            return self.F.zero
        d = sum(target)
        Q = x.dense
        inv = np.array([(-1) ** k for k in range(Q.N)], dtype=np.int64) % self.p
        for j in range(self.f):
            Q = Q.mul_axis(j, inv)
        H = self.cc.form_t_to_z(Q.homogeneous(d))
        return self.tower.sigma0(_ffe(self.tower.Fq, H[target]))

    def psi_Z(self, x: "ZLaurent") -> "ZLaurent":
        """psi on Z^{-p m} P with P in the T-model: psi(phi(Z^{-m}) P) = Z^{-m} psi(P)."""
        if any(s % self.p for s in x.shift) or len(set(x.shift)) != 1:
            raise CoordinateError("psi_Z expects a shift of the form -p m (1,...,1)")
        m = x.shift[0] // self.p
        return ZLaurent((m,) * self.f, x.dense.psi())

    def act_inverse_Z(self, a: OKElem, x: "ZLaurent") -> "ZLaurent":
        """a^{-1}(Z^{-m} P) with Z = prod_j Z_j and P known below degree N_P.

        Writing u = a^{-1}(Z) = cZ + R, we use
        u^{-m} = (cZ)^{-(m+K-1)} sum_{k<K} binom(-m, k) R^k (cZ)^{K-1-k}
        with K = N_P, which keeps the relative precision of x.
        """
        if len(set(x.shift)) != 1 or x.shift[0] > 0:
            raise CoordinateError("expects a shift -m (1,...,1) with m >= 0")
        m = -x.shift[0]
        f, Fq = self.f, self.tower.Fq
        K = x.dense.N
        Nd = max(f * (K - 1) + K, f + 1)
        ainv = a.inverse()
        zprod = self._zprod_dense(Nd)
        u = self.ok_act_dense(ainv, zprod)
        form = self.cc.form_t_to_z(u.homogeneous(f))
        c = _ffe(Fq, form[(1,) * f])
        cz = zprod.scale(c)
        R = u - cz
        S = DenseT.zero(Fq, f, Nd)
        Rk = DenseT.one(Fq, f, Nd)
        for k in range(K):
            b = _binom_neg(m, k, self.p)
            if b:
                S = S + (Rk * cz ** (K - 1 - k)).scale(b)
            Rk = Rk * R
        Pn = self.ok_act_dense(ainv, x.dense).truncate(Nd)
        body = (S * Pn).scale(c ** (-(m + K - 1)))
        return ZLaurent((-(m + K - 1),) * f, body)

    def _zprod_dense(self, N: int) -> DenseT:
        out = DenseT.one(self.tower.Fq, self.f, N)
        for j in range(self.f):
            zj = self.Z_dense(j, N)
            out = out * zj
        return out

    def Z_dense(self, j: int, N: Optional[int] = None) -> DenseT:
        N = self.cc.N if N is None else N
        terms = {}
        for i in range(self.f):
            k = [0] * self.f
            k[i] = 1
            terms[tuple(k)] = self.cc.A[i][j]
        return DenseT.from_terms(self.tower.Fq, self.f, N, terms)

    # trace ------------------------------------------------------------------------
    def trace_exponents(self) -> list:
        return [self.ok.trace(al) for al in self.ok.alpha]

    def trace_to_zp(self, x: DenseT) -> TruncLaurent:
        """Ring map (1+T_j) -> (1+T)^{Tr(alpha_j)} into F((T)), coefficients in F."""
        N, p, f = x.N, self.p, self.f
        U = []
        for t in self.trace_exponents():
            # powers of u = (1+T)^t - 1
            u = _univariate_binomial(t, N, p, self.M)
            u[0] = (u[0] - 1) % p
            pw = np.zeros((N, N), dtype=np.int64)
            cur = np.zeros(N, dtype=np.int64)
            cur[0] = 1
            for k in range(N):
                pw[k] = cur
                cur = np.convolve(cur, u)[:N] % p
            U.append(pw)
        Q = np.tensordot(x.data, U[f - 1], axes=([f - 1], [0])) % p
        Q = np.moveaxis(Q, -1, -2)  # (N,)*(f-1) + (N_T, n)
        for j in range(f - 2, -1, -1):
            # new[.., m, c] = sum_k sum_{a+b=m} U_j[k, a] Q[.., k, b, c]
            new = np.zeros(Q.shape[:j] + Q.shape[-2:], dtype=np.int64)
            for a_ in range(N):
                w = U[j][:, a_]
                if w.any():
                    part = np.tensordot(w, Q, axes=([0], [j])) % p
                    new[..., a_:, :] += part[..., : N - a_, :]
            Q = new % p
        coefs = self.tower.embed_array(Q)
        exps = np.arange(N).reshape(-1, 1)
        return TruncLaurent(self.F, 1, "U", exps, coefs, N)

    # recette --------------------------------------------------------------------
    def recette_embed(self, x: TruncLaurent) -> TruncLaurent:
        """F((T^{q-1})) -> A, T^{q-1} -> Y_{f-1}^p Y_0^{-1}."""
        q, p, f = self.q, self.p, self.f
        if x.coords != "U":
            raise CoordinateError("recette_embed expects a univariate series")
        ex = x.exps[:, 0]
        if np.any(ex % (q - 1)):
            raise ParameterError("exponents must be multiples of q-1")
        k = ex // (q - 1)
        step = np.zeros(f, dtype=np.int64)
        step[0] -= 1
        step[f - 1] += p
        exps = k[:, None] * step[None, :]
        if x.prec == INF:
            prec = INF
        else:
            kmin = -(-int(x.prec) // (q - 1))
            prec = kmin * (p - 1)
        return TruncLaurent(self.F, f, "Y", exps, x.coefs, prec)


class ZLaurent:
    """Z^shift * P(T) with P a dense T-series (shift may be negative)."""

    def __init__(self, shift: Sequence[int], dense: DenseT):
        self.shift = tuple(int(s) for s in shift)
        self.dense = dense

    def __mul__(self, other: "ZLaurent") -> "ZLaurent":
        return ZLaurent(tuple(a + b for a, b in zip(self.shift, other.shift)), self.dense * other.dense)

    def __add__(self, other: "ZLaurent") -> "ZLaurent":
        if self.shift != other.shift:
            raise CoordinateError("ZLaurent addition needs equal shifts")
        return ZLaurent(self.shift, self.dense + other.dense)

    def scale(self, c) -> "ZLaurent":
        return ZLaurent(self.shift, self.dense.scale(c))

    def __repr__(self):
        return f"Z^{self.shift} * ({self.dense!r})"


def _binom_neg(m: int, k: int, p: int) -> int:
    """binom(-m, k) mod p."""
    return ((-1) ** k * math.comb(m + k - 1, k)) % p


def _unit_vec(f: int, i: int) -> list:
    e = [0] * f
    e[i % f] = 1
    return e


def _univariate_binomial(t: int, N: int, p: int, M: int) -> np.ndarray:
    from .base_arith import padic_binomial_table

    return padic_binomial_table(np.array([t]), N, p, M)[0].copy()


def _mul_axis_poly(arr, axis, poly, N, p):
    out = np.zeros_like(arr)
    n = arr.shape[axis]
    for s, c in enumerate(poly):
        c = int(c) % p
        if not c or s >= n:
            continue
        src = [slice(None)] * arr.ndim
        dst = [slice(None)] * arr.ndim
        src[axis] = slice(0, n - s)
        dst[axis] = slice(s, n)
        out[tuple(dst)] += c * arr[tuple(src)]
    return out % p


def _psi_axis(arr, axis, Nout, p):
    shape = list(arr.shape)
    shape[axis] = Nout
    out = np.zeros(shape, dtype=np.int64)
    for r in range(p):
        sl = [slice(None)] * arr.ndim
        sl[axis] = slice(r, None, p)
        block = arr[tuple(sl)]
        m = min(Nout, block.shape[axis])
        dst = [slice(None)] * arr.ndim
        dst[axis] = slice(0, m)
        src = [slice(None)] * arr.ndim
        src[axis] = slice(0, m)
        out[tuple(dst)] += (-1 if r % 2 else 1) * block[tuple(src)]
    return out % p


def _phi_axis(arr, axis, N, p):
    shape = list(arr.shape)
    shape[axis] = N
    out = np.zeros(shape, dtype=np.int64)
    m = min(arr.shape[axis], -(-N // p))
    dst = [slice(None)] * arr.ndim
    dst[axis] = slice(0, p * m, p)
    src = [slice(None)] * arr.ndim
    src[axis] = slice(0, m)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def lemma_coefficient(b: Sequence[FFElem], p: int) -> FFElem:
    """Coefficient of prod_i x_i^{p-1} in prod_j (sum_i b_i^{p^j} x_i)^{p-1}."""
    f = len(b)
    field = b[0].field
    poly = {(0,) * f: field.one}
    for j in range(f):
        lin = {}
        for i in range(f):
            e = [0] * f
            e[i] = 1
            lin[tuple(e)] = b[i] ** (p ** j)
        for _ in range(p - 1):
            new = {}
            for e1, c1 in poly.items():
                for e2, c2 in lin.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    if max(e) > p - 1:
                        continue
                    new[e] = new.get(e, field.zero) + c1 * c2
            poly = new
    return poly.get((p - 1,) * f, field.zero)


def lemma_product(b: Sequence[FFElem], p: int) -> FFElem:
    """(-1)^{(p^f-1)/(p-1)} prod_{c in F_p^f, c != 0} sum_i c_i b_i."""
    f = len(b)
    field = b[0].field
    out = field.one
    for c in itertools.product(range(p), repeat=f):
        if any(c):
            s = field.zero
            for ci, bi in zip(c, b):
                s = s + bi * ci
            out = out * s
    sign = (-1) ** (((p ** f - 1) // (p - 1)) % 2)
    return out * sign


def phi_univariate(x: TruncLaurent) -> TruncLaurent:
    """phi on F((T)): T -> (1+T)^p - 1 = T^p."""
    p = x.field.p
    return TruncLaurent(x.field, 1, x.coords, x.exps * p, x.coefs, x.prec * p)


def zp_act_univariate(a: int, x: TruncLaurent, M: Optional[int] = None) -> TruncLaurent:
    """a in Z_p^x acting on F((T)) by T -> (1+T)^a - 1 (a given as an integer)."""
    p = x.field.p
    if a % p == 0:
        raise ParameterError("a must be a p-adic unit")
    prec = x.prec
    if prec == INF:
        raise PrecisionError("zp_act_univariate needs a truncated input")
    v = x.valuation() if not x.is_zero() else 0
    v = min(v, 0) if v != INF else 0
    # s = (1+T)^a - 1 = abar T (1 + eps); relative precision prec - v suffices
    rel = int(prec) - int(v)
    M = M if M is not None else precision_for_degree(rel + 1, p)
    row = _univariate_binomial(a % p ** M, rel + 1, p, M)
    row[0] = 0
    terms = {(k,): int(c) for k, c in enumerate(row) if c}
    s = TruncLaurent.from_dict(x.field, 1, x.coords, terms, rel + 1)
    sinv = s.inverse()
    out = TruncLaurent.zero(x.field, 1, x.coords, prec)
    cache = {}
    for e, c in zip(x.exps[:, 0], x.coefs):
        e = int(e)
        if e not in cache:
            base = s if e >= 0 else sinv
            cache[e] = (base ** abs(e)) if e else TruncLaurent.one(x.field, 1, x.coords)
        out = out + cache[e].scale(_ffe(x.field, c)).truncate(prec)
    return out.truncate(prec)
