import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from artifact.base_arith import (
    GF,
    FieldTower,
    OKRing,
    ParameterError,
    padic_binomial,
    precision_for_degree,
    random_units,
    teichmuller,
    zp_residue,
)


@pytest.fixture(scope="module")
def t52():
    return FieldTower(5, 2)


def test_teichmuller_of_minus_one():
    tw = FieldTower(3, 1)
    assert teichmuller(tw.Fq(2), tw, 2).c == (8,)


@pytest.mark.parametrize("p,f,M", [(3, 1, 4), (5, 2, 3), (3, 3, 2)])
def test_teichmuller_of_one(p, f, M):
    tw = FieldTower(p, f)
    assert teichmuller(tw.Fq.one, tw, M) == OKRing(tw, M).one


def test_teichmuller_generator_matches_iteration_oracle(t52):
    ok = OKRing(t52, 3)
    x = ok.lift_fq(t52.g)
    while True:
        y = x ** t52.q
        if y == x:
            break
        x = y
    assert ok.teichmuller(t52.g) == x


@pytest.mark.parametrize("p,f", [(3, 1), (3, 2), (5, 1), (5, 2), (3, 3)])
def test_teichmuller_multiplicative_exhaustive(p, f):
    tw = FieldTower(p, f)
    ok = OKRing(tw, 3)
    els = tw.Fq.nonzero()
    tl = {e.c: ok.teichmuller(e) for e in els}
    for a, b in itertools.product(els, repeat=2):
        assert tl[(a * b).c] == tl[a.c] * tl[b.c]
    for a in els:
        assert tl[a.c] ** tw.q == tl[a.c]
        assert tl[a.c].reduce() == a


def test_basis_coords_of_basis_vectors(t52):
    ok = OKRing(t52, 3)
    assert ok.basis_coords(ok.alpha[1]) == (0, 1)
    assert ok.basis_coords(ok.alpha[0]) == (1, 0)
    assert ok.basis_coords(ok.zero) == (0, 0)


def test_basis_coords_linear_solve_oracle():
    tw = FieldTower(3, 2)
    ok = OKRing(tw, 2)
    x = ok.teichmuller(tw.g) ** 2
    B = sympy.Matrix([[a.c[i] for a in ok.alpha] for i in range(2)])
    sol = (B.inv_mod(9) * sympy.Matrix(x.c)).applyfunc(lambda v: v % 9)
    assert ok.basis_coords(x) == tuple(int(v) for v in sol)


@given(st.lists(st.integers(0, 5 ** 3 - 1), min_size=3, max_size=3))
def test_basis_coords_roundtrip(coords):
    ok = OKRing(FieldTower(5, 3), 3)
    assert ok.basis_coords(ok.from_coords(coords)) == tuple(coords)


def test_padic_binomial_examples():
    assert padic_binomial(17, 0, 3, 3) == 1
    assert padic_binomial(5, 1, 5, 2) == 0
    assert padic_binomial(4, 2, 3, 3) == math.comb(4, 2) % 3 == 0


@given(st.integers(0, 3 ** 4 - 1), st.integers(0, 8))
def test_padic_binomial_matches_integer_binomial(x, k):
    # k < p^M / p, so binom(x, k) mod p only depends on x mod p^M
    assert padic_binomial(x, k, 3, 4) == math.comb(x, k) % 3


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (3, 4), (5, 2), (7, 2)])
def test_frobenius_order_and_norm(p, n):
    F = GF(p, n)
    g = F.gen
    assert g.frob(n) == g
    assert all(g.frob(k) != g for k in range(1, n))
    for x in F.nonzero():
        prod = F.one
        for k in range(n):
            prod = prod * x.frob(k)
        assert prod == x ** ((p ** n - 1) // (p - 1))


def test_norm_lands_in_prime_field(t52):
    for x in t52.Fq.nonzero():
        n = t52.norm(x)
        assert 0 < n < 5


def test_sigma_is_field_embedding(t52):
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = t52.Fq.random(rng), t52.Fq.random(rng)
        assert t52.sigma0(a * b) == t52.sigma0(a) * t52.sigma0(b)
        assert t52.sigma0(a + b) == t52.sigma0(a) + t52.sigma0(b)
        assert t52.sigma(1, a) == t52.sigma0(a) ** 5


def test_precision_for_degree():
    assert precision_for_degree(40, 3) == 6
    assert precision_for_degree(60, 29) == 4


def test_zp_residue_rational():
    assert zp_residue(Fraction(1, 2), 3, 2) * 2 % 9 == 1
    with pytest.raises(ParameterError):
        zp_residue(Fraction(1, 3), 3, 2)


def test_rejects_p_equal_two():
    with pytest.raises(ParameterError):
        FieldTower(2, 1)


def test_random_units_reproducible(t52):
    ok = OKRing(t52, 4)
    a = random_units(ok, 6, np.random.default_rng(3))
    b = random_units(ok, 6, np.random.default_rng(3))
    assert a == b
    assert all(u.is_unit() for u in a)
    assert a[1] == ok(6)


@given(st.integers(1, 5 ** 4 - 1).filter(lambda v: v % 5), st.integers(0, 5 ** 4 - 1))
def test_ok_inverse(a0, a1):
    ok = OKRing(FieldTower(5, 2), 4)
    x = ok((a0, a1))
    assert x * x.inverse() == ok.one
