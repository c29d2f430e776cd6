"""Finite fields, truncated unramified p-adic integers and p-adic binomials.

The tower is F_p inside F_q = F_{p^f} inside F = F_{p^{fe}}.  F_q and F are
realised with primitive moduli found by a deterministic search, and the
embedding sigma_0 : F_q -> F sends the generator of F_q to a fixed root of
its modulus in F.  O_K/p^M is (Z/p^M)[t]/(lift of the F_q modulus).
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np
import sympy


class PrecisionError(ArithmeticError):
    """Raised when a truncated computation would need more p-adic digits."""


class ParameterError(ValueError):
    """Raised on invalid parameters (bad prime, singular basis, ...)."""


# ---------------------------------------------------------------------------
# integer helpers

def ndigits(k: int, p: int) -> int:
    """Number of base-p digits of a nonnegative integer (0 has one digit)."""
    if k < 0:
        raise ValueError("ndigits expects k >= 0")
    n = 1
    while k >= p:
        k //= p
        n += 1
    return n


def precision_for_degree(N: int, p: int) -> int:
    """Default p-adic precision M = ceil(log_p N) + 2."""
    k = 0
    while p ** k < N:
        k += 1
    return k + 2


def zp_residue(x, p: int, M: int) -> int:
    """Reduce an integer or a p-integral rational to Z/p^M."""
    mod = p ** M
    if isinstance(x, (int, np.integer)):
        return int(x) % mod
    x = Fraction(x)
    if x.denominator % p == 0:
        raise ParameterError(f"{x} is not p-integral for p={p}")
    return x.numerator * pow(x.denominator, -1, mod) % mod


def _small_binom_table(p: int) -> np.ndarray:
    t = np.zeros((p, p), dtype=np.int64)
    for n in range(p):
        for k in range(n + 1):
            t[n, k] = math.comb(n, k) % p
    return t


@lru_cache(maxsize=None)
def small_binom_table(p: int) -> np.ndarray:
    """binom(n, k) mod p for 0 <= n, k < p."""
    t = _small_binom_table(p)
    t.setflags(write=False)
    return t


def padic_binomial(x: int, k: int, p: int, M: int) -> int:
    """binom(x, k) mod p for x known modulo p^M, via Lucas' theorem."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if M < ndigits(k, p) + 1:
        raise PrecisionError(f"precision M={M} too small for binomial index k={k}")
    x %= p ** M
    table = small_binom_table(p)
    out = 1
    while k:
        out = out * int(table[x % p, k % p]) % p
        if out == 0:
            return 0
        x //= p
        k //= p
    return out


def padic_binomial_table(xs: np.ndarray, kmax: int, p: int, M: int) -> np.ndarray:
    """Array B[i, k] = binom(xs[i], k) mod p for 0 <= k < kmax."""
    if kmax <= 0:
        return np.zeros((len(xs), 0), dtype=np.int64)
    nd = ndigits(kmax - 1, p)
    if M < nd + 1:
        raise PrecisionError(f"precision M={M} too small for binomial index {kmax - 1}")
    table = small_binom_table(p)
    xs = np.asarray(xs, dtype=np.int64) % (p ** M)
    ks = np.arange(kmax, dtype=np.int64)
    out = np.ones((len(xs), kmax), dtype=np.int64)
    for _ in range(nd):
        out = out * table[(xs % p)[:, None], (ks % p)[None, :]] % p
        xs = xs // p
        ks = ks // p
    return out


# ---------------------------------------------------------------------------
# polynomials over F_p (coefficient tuples, low degree first)

def _poly_mulmod(a: Sequence[int], b: Sequence[int], mod: Sequence[int], p: int) -> tuple:
    n = len(mod) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for d in range(len(prod) - 1, n - 1, -1):
        c = prod[d] % p
        if c:
            for j in range(n):
                prod[d - n + j] -= c * mod[j]
        prod[d] = 0
    return tuple(v % p for v in prod[:n]) + (0,) * max(0, n - len(prod))


def _poly_powmod(a: Sequence[int], e: int, mod: Sequence[int], p: int) -> tuple:
    n = len(mod) - 1
    result = (1,) + (0,) * (n - 1)
    base = tuple(a)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        e >>= 1
        if e:
            base = _poly_mulmod(base, base, mod, p)
    return result


@lru_cache(maxsize=None)
def find_primitive_modulus(p: int, n: int) -> tuple:
    """Smallest (in a fixed enumeration order) monic primitive polynomial of degree n."""
    if n == 1:
        # x - g for the least primitive root g mod p
        g = int(sympy.primitive_root(p))
        return ((-g) % p, 1)
    order = p ** n - 1
    primes = list(sympy.factorint(order))
    one = (1,) + (0,) * (n - 1)
    x = (0, 1) + (0,) * (n - 2)
    for tail in itertools.product(range(p), repeat=n):
        mod = tuple(reversed(tail)) + (1,)
        if mod[0] == 0:
            continue
        if _poly_powmod(x, order, mod, p) != one:
            continue
        if all(_poly_powmod(x, order // ell, mod, p) != one for ell in primes):
            return mod
    raise ParameterError(f"no primitive polynomial of degree {n} over F_{p}")


# ---------------------------------------------------------------------------
# finite fields

class GF:
    """The field F_p[x]/(modulus) with a primitive modulus."""

    def __init__(self, p: int, n: int, modulus: Sequence[int] | None = None):
        if p < 2 or not sympy.isprime(p):
            raise ParameterError(f"p={p} is not prime")
        self.p = p
        self.n = n
        self.modulus = tuple(modulus) if modulus is not None else find_primitive_modulus(p, n)
        if len(self.modulus) != n + 1 or self.modulus[-1] != 1:
            raise ParameterError("modulus must be monic of degree n")
        self.order = p ** n
        self._frob = None

    def __repr__(self):
        return f"GF({self.p}^{self.n})"

    def __eq__(self, other):
        return isinstance(other, GF) and (self.p, self.modulus) == (other.p, other.modulus)

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __call__(self, value) -> "FFElem":
        if isinstance(value, FFElem):
            if value.field != self:
                raise ParameterError("element of a different field")
            return value
        if isinstance(value, (int, np.integer)):
            return FFElem(self, (int(value) % self.p,) + (0,) * (self.n - 1))
        c = tuple(int(v) % self.p for v in value)
        if len(c) != self.n:
            raise ParameterError("wrong coefficient length")
        return FFElem(self, c)

    @property
    def zero(self) -> "FFElem":
        return self(0)

    @property
    def one(self) -> "FFElem":
        return self(1)

    @property
    def gen(self) -> "FFElem":
        """Class of x; a primitive element because the modulus is primitive."""
        if self.n == 1:
            return self((-self.modulus[0]) % self.p)
        return FFElem(self, (0, 1) + (0,) * (self.n - 2))

    def elements(self) -> Iterator["FFElem"]:
        for c in itertools.product(range(self.p), repeat=self.n):
            yield FFElem(self, tuple(reversed(c)))

    def nonzero(self) -> list:
        """Nonzero elements listed as powers g^0, g^1, ... of the generator."""
        out, x, g = [], self.one, self.gen
        for _ in range(self.order - 1):
            out.append(x)
            x = x * g
        return out

    def random(self, rng: np.random.Generator, nonzero: bool = False) -> "FFElem":
        while True:
            x = FFElem(self, tuple(int(v) for v in rng.integers(0, self.p, self.n)))
            if not (nonzero and x.is_zero()):
                return x

    def mul_matrix(self, x: "FFElem") -> np.ndarray:
        """Matrix of y -> x*y on coefficient vectors (columns are images of basis)."""
        cols = []
        for j in range(self.n):
            e = [0] * self.n
            e[j] = 1
            cols.append((x * self(e)).c)
        return np.array(cols, dtype=np.int64).T

    def frobenius_matrix(self) -> np.ndarray:
        if self._frob is None:
            cols = []
            for j in range(self.n):
                e = [0] * self.n
                e[j] = 1
                cols.append((self(e) ** self.p).c)
            self._frob = np.array(cols, dtype=np.int64).T
            self._frob.setflags(write=False)
        return self._frob


class FFElem:
    """Element of a GF, stored as a coefficient tuple (low degree first)."""

    __slots__ = ("field", "c")

    def __init__(self, field: GF, c: tuple):
        self.field = field
        self.c = c

    def _coerce(self, other) -> "FFElem":
        if isinstance(other, FFElem):
            if other.field is not self.field and other.field != self.field:
                raise ParameterError("field mismatch")
            return other
        return self.field(other)

    def __add__(self, other):
        o = self._coerce(other)
        p = self.field.p
        return FFElem(self.field, tuple((a + b) % p for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FFElem(self.field, tuple((-a) % p for a in self.c))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        fld = self.field
        if fld.n == 1:
            return FFElem(fld, (self.c[0] * o.c[0] % fld.p,))
        return FFElem(fld, _poly_mulmod(self.c, o.c, fld.modulus, fld.p))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        fld = self.field
        if fld.n == 1:
            return FFElem(fld, (pow(self.c[0], e, fld.p),))
        return FFElem(fld, _poly_powmod(self.c, e, fld.modulus, fld.p))

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.order - 2)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.field(other)
        if not isinstance(other, FFElem):
            return NotImplemented
        return self.c == other.c and self.field == other.field

    def __hash__(self):
        return hash(self.c)

    def is_zero(self) -> bool:
        return not any(self.c)

    def is_one(self) -> bool:
        return self.c[0] == 1 and not any(self.c[1:])

    def frob(self, k: int = 1):
        """x -> x^(p^k)."""
        k %= self.field.n
        return self ** (self.field.p ** k)

    def to_int(self) -> int:
        """Packed integer sum c_i p^i (used for canonical ordering)."""
        out = 0
        for v in reversed(self.c):
            out = out * self.field.p + v
        return out

    def __repr__(self):
        if self.field.n == 1:
            return str(self.c[0])
        return "[" + ",".join(map(str, self.c)) + "]"

    def __lt__(self, other):
        return self.to_int() < other.to_int()


class FieldTower:
    """F_p inside F_q inside F with the embeddings sigma_i = sigma_0 o Frob^i.

    ``g`` selects the generator of F_q used for the basis alpha_j = [g^j]
    (default: the class of x modulo the primitive modulus).
    """

    def __init__(self, p: int, f: int, e: int = 2, g: Sequence[int] | None = None):
        if p < 3:
            raise ParameterError("p must be an odd prime (p >= 3)")
        if f < 1 or e < 1:
            raise ParameterError("f and e must be positive")
        self.p, self.f, self.e = p, f, e
        self.q = p ** f
        self.Fq = GF(p, f)
        self.F = GF(p, f * e)
        self.g = self.Fq.gen if g is None else self.Fq(g)
        if not self.g.is_zero() and f > 1:
            # the powers of g must span F_q over F_p
            mat = np.array([(self.g ** j).c for j in range(f)], dtype=np.int64)
            if int(round(sympy.Matrix(mat.tolist()).det())) % p == 0:
                raise ParameterError("g does not generate F_q over F_p")
        self.root = self._find_root()
        self._embed = np.array([(self.root ** j).c for j in range(f)], dtype=np.int64).T

    def _find_root(self) -> FFElem:
        """Root of the F_q modulus in F, chosen as the least power of w."""
        F, mod = self.F, self.Fq.modulus
        w = F.gen ** ((F.order - 1) // (self.q - 1))
        x = F.one
        for _ in range(self.q - 1):
            val = F.zero
            for coef in reversed(mod):
                val = val * x + coef
            if val.is_zero():
                # x must generate a field of degree exactly f
                if all(x ** (self.p ** k) != x for k in range(1, self.f)):
                    return x
            x = x * w
        raise ParameterError("no root of the F_q modulus found in F")

    def __repr__(self):
        return f"FieldTower(p={self.p}, f={self.f}, e={self.e})"

    def sigma0(self, x: FFElem) -> FFElem:
        x = self.Fq(x)
        v = self._embed @ np.array(x.c, dtype=np.int64) % self.p
        return FFElem(self.F, tuple(int(a) for a in v))

    def sigma(self, i: int, x: FFElem) -> FFElem:
        return self.sigma0(self.Fq(x).frob(i % self.f))

    def embed_array(self, arr: np.ndarray) -> np.ndarray:
        """Apply sigma_0 to an array of F_q coefficient vectors (last axis)."""
        return np.tensordot(arr, self._embed, axes=([-1], [1])) % self.p

    def norm(self, x: FFElem) -> int:
        """N_{F_q/F_p}(x) as an integer in [0, p)."""
        y = self.Fq(x) ** ((self.q - 1) // (self.p - 1))
        if any(y.c[1:]):
            raise AssertionError("norm did not land in F_p")
        return y.c[0]

    def unembed_array(self, coefs: np.ndarray) -> np.ndarray:
        """Inverse of sigma_0 on arrays of F-vectors lying in sigma_0(F_q)."""
        if not hasattr(self, "_unembed"):
            rows = []
            for r in range(self._embed.shape[0]):
                if _rank_mod_p(self._embed[rows + [r]].tolist(), self.p) == len(rows) + 1:
                    rows.append(r)
                if len(rows) == self.f:
                    break
            block = self._embed[rows].tolist()
            self._unembed = (rows, np.array(solve_mod_pm(block, self.p, 1), dtype=np.int64))
        rows, inv = self._unembed
        coefs = np.asarray(coefs, dtype=np.int64) % self.p
        out = coefs[..., rows] @ inv.T % self.p
        if not np.array_equal(self.embed_array(out), coefs):
            raise ParameterError("coefficients do not lie in sigma_0(F_q)")
        return out

    def unembed(self, y: FFElem) -> FFElem:
        return self.Fq(tuple(int(v) for v in self.unembed_array(np.array(y.c))))

    def in_image(self, y: FFElem) -> bool:
        """Whether y in F lies in sigma_0(F_q)."""
        return y ** self.q == y


# ---------------------------------------------------------------------------
# O_K / p^M

class OKRing:
    """O_K/p^M = (Z/p^M)[t]/(m~(t)) with m~ the integer lift of the F_q modulus."""

    def __init__(self, tower: FieldTower, M: int):
        if M < 1:
            raise ParameterError("precision M must be >= 1")
        self.tower = tower
        self.p, self.f, self.M = tower.p, tower.f, M
        self.mod = tower.p ** M
        self.lift = tuple(tower.Fq.modulus)
        self._teich_g = None
        self._alpha = None
        self._binv = None

    def __repr__(self):
        return f"OKRing(p={self.p}, f={self.f}, M={self.M})"

    # raw tuple arithmetic ---------------------------------------------------
    def _mul(self, a: Sequence[int], b: Sequence[int]) -> tuple:
        f, mod, lift = self.f, self.mod, self.lift
        prod = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for d in range(2 * f - 2, f - 1, -1):
            c = prod[d]
            if c:
                for j in range(f):
                    prod[d - f + j] -= c * lift[j]
        return tuple(v % mod for v in prod[:f])

    def __call__(self, value) -> "OKElem":
        if isinstance(value, OKElem):
            return OKElem(self, tuple(v % self.mod for v in value.c))
        if isinstance(value, (int, np.integer, Fraction)):
            return OKElem(self, (zp_residue(value, self.p, self.M),) + (0,) * (self.f - 1))
        c = tuple(int(v) % self.mod for v in value)
        if len(c) != self.f:
            raise ParameterError("wrong coefficient length")
        return OKElem(self, c)

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def lift_fq(self, x: FFElem) -> "OKElem":
        """Naive lift: same coefficients in [0, p)."""
        return OKElem(self, tuple(self.tower.Fq(x).c))

    def reduce(self, x: "OKElem") -> FFElem:
        return self.tower.Fq(tuple(v % self.p for v in x.c))

    # Teichmueller -------------------------------------------------------------
    def teichmuller(self, lam: FFElem) -> "OKElem":
        """Multiplicative representative of lam, by Newton iteration on x^(q-1) = 1."""
        lam = self.tower.Fq(lam)
        if lam.is_zero():
            return self.zero
        x = self.lift_fq(lam)
        q = self.tower.q
        prec = 1
        while prec < self.M:
            prec = min(2 * prec, self.M)
            # x <- x - (x^(q-1) - 1) / ((q-1) x^(q-2)) = x - (x^q - x) / ((q-1) x^(q-1))
            xq1 = x ** (q - 1)
            num = x * xq1 - x
            den = xq1 * (q - 1)
            x = x - num * den.inverse()
        return x

    def teichmuller_by_iteration(self, lam: FFElem) -> "OKElem":
        """Oracle: iterate x -> x^q from the naive lift until it stabilises."""
        x = self.lift_fq(lam)
        while True:
            y = x ** self.tower.q
            if y == x:
                return x
            x = y

    def teich_table(self) -> np.ndarray:
        """Rows are [w^k] for k = 0..q-2, w the primitive generator of F_q."""
        if self._teich_g is None:
            tg = self.teichmuller(self.tower.Fq.gen)
            rows, x = [], self.one.c
            for _ in range(self.tower.q - 1):
                rows.append(x)
                x = self._mul(x, tg.c)
            self._teich_g = np.array(rows, dtype=np.int64)
            self._teich_g.setflags(write=False)
        return self._teich_g

    # basis alpha_j = [g^j] -------------------------------------------------------
    @property
    def alpha(self) -> list:
        if self._alpha is None:
            tg = self.teichmuller(self.tower.g)
            self._alpha = [tg ** j for j in range(self.f)]
        return self._alpha

    def _basis_inverse(self) -> np.ndarray:
        if self._binv is None:
            B = [[a.c[i] for a in self.alpha] for i in range(self.f)]
            self._binv = np.array(solve_mod_pm(B, self.p, self.M), dtype=np.int64)
            self._binv.setflags(write=False)
        return self._binv

    def basis_coords(self, x: "OKElem") -> tuple:
        v = self._basis_inverse() @ np.array(x.c, dtype=np.int64) % self.mod
        return tuple(int(a) for a in v)

    def basis_coords_array(self, rows: np.ndarray) -> np.ndarray:
        """basis_coords for many power-basis rows at once."""
        return (rows @ self._basis_inverse().T) % self.mod

    def from_coords(self, coords: Sequence[int]) -> "OKElem":
        out = self.zero
        for c, a in zip(coords, self.alpha):
            out = out + a * c
        return out

    def mul_matrix(self, a: "OKElem") -> np.ndarray:
        cols = []
        for j in range(self.f):
            e = [0] * self.f
            e[j] = 1
            cols.append(self._mul(a.c, e))
        return np.array(cols, dtype=np.int64).T

    def trace(self, x: "OKElem") -> int:
        """Tr_{K/Q_p}(x) mod p^M as the trace of multiplication by x."""
        return int(np.trace(self.mul_matrix(x))) % self.mod

    def frobenius(self, x: "OKElem") -> "OKElem":
        """Arithmetic Frobenius: t -> the root of m~ congruent to t^p."""
        if self.f == 1:
            return x
        r = OKElem(self, (0, 1) + (0,) * (self.f - 2)) ** self.p
        # Newton on m~(r) = 0
        for _ in range(self.M + 1):
            val, der = self.zero, self.zero
            for k, coef in reversed(list(enumerate(self.lift))):
                der = der * r + val
                val = val * r + coef
            r = r - val * der.inverse()
        out, rk = self.zero, self.one
        for c in x.c:
            out = out + rk * c
            rk = rk * r
        return out

    def random_unit(self, rng: np.random.Generator) -> "OKElem":
        while True:
            c = tuple(int(v) for v in rng.integers(0, self.mod, self.f))
            x = OKElem(self, c)
            if not self.reduce(x).is_zero():
                return x


class OKElem:
    """Element of O_K/p^M in the power basis of t."""

    __slots__ = ("ring", "c")

    def __init__(self, ring: OKRing, c: tuple):
        self.ring = ring
        self.c = c

    def _coerce(self, other) -> "OKElem":
        if isinstance(other, OKElem):
            return other
        return self.ring(other)

    def __add__(self, other):
        o, mod = self._coerce(other), self.ring.mod
        return OKElem(self.ring, tuple((a + b) % mod for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        mod = self.ring.mod
        return OKElem(self.ring, tuple((-a) % mod for a in self.c))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            mod = self.ring.mod
            return OKElem(self.ring, tuple(a * int(other) % mod for a in self.c))
        o = self._coerce(other)
        return OKElem(self.ring, self.ring._mul(self.c, o.c))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.ring.one, self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def is_unit(self) -> bool:
        return not self.ring.reduce(self).is_zero()

    def inverse(self) -> "OKElem":
        if not self.is_unit():
            raise ZeroDivisionError("not a unit in O_K/p^M")
        ring = self.ring
        y = ring.lift_fq(ring.reduce(self).inverse())
        prec = 1
        while prec < ring.M:
            prec *= 2
            y = y * (2 - self * y)
        return y

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ring(other)
        if not isinstance(other, OKElem):
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def reduce(self) -> FFElem:
        return self.ring.reduce(self)

    def valuation(self) -> int:
        """p-adic valuation, capped at M."""
        v = self.ring.M
        for a in self.c:
            if a:
                k = 0
                while a % self.ring.p == 0:
                    a //= self.ring.p
                    k += 1
                v = min(v, k)
        return v

    def __repr__(self):
        return f"OK({list(self.c)} mod {self.ring.p}^{self.ring.M})"


def teichmuller(lam: FFElem, tower: FieldTower, M: int) -> OKElem:
    return OKRing(tower, M).teichmuller(lam)


def basis_coords(x: OKElem) -> tuple:
    return x.ring.basis_coords(x)


def solve_mod_pm(B: Sequence[Sequence[int]], p: int, M: int) -> list:
    """Inverse of a square matrix over Z/p^M by Gaussian elimination."""
    mod = p ** M
    n = len(B)
    aug = [[int(v) % mod for v in row] + [1 if i == j else 0 for j in range(n)]
           for i, row in enumerate(B)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] % p), None)
        if piv is None:
            raise ParameterError("basis matrix is singular mod p")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, mod)
        aug[col] = [v * inv % mod for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                c = aug[r][col]
                aug[r] = [(a - c * b) % mod for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _rank_mod_p(rows: list, p: int) -> int:
    rows = [[int(v) % p for v in r] for r in rows]
    rank = 0
    ncol = len(rows[0]) if rows else 0
    for c in range(ncol):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [v * inv % p for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                t = rows[i][c]
                rows[i] = [(a - t * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def random_units(ring: OKRing, count: int, rng: np.random.Generator,
                 include_special: bool = True) -> list:
    """Reproducible sample of units: [g], 1+p and random elements."""
    out = []
    if include_special and count >= 2:
        out.append(ring.teichmuller(ring.tower.g))
        out.append(ring(1 + ring.p))
    while len(out) < count:
        out.append(ring.random_unit(rng))
    return out[:count]


def sum_iter(items: Iterable, start):
    for x in items:
        start = start + x
    return start
