from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.base_arith import GF, FieldTower, PrecisionError
from artifact.series import (
    INF,
    CoordChange,
    CoordinateError,
    DenseT,
    TruncLaurent,
    apply_phi,
    apply_phi_q,
    change_coords,
    series_mul,
    zp_power,
)

F9 = GF(3, 2)
F25 = GF(5, 2)


def laurent(field, nvars, draw_terms, prec=INF, coords="Y"):
    return TruncLaurent.from_dict(field, nvars, coords, draw_terms, prec)


@st.composite
def elements(draw, field=F25, nvars=2, lo=-3, hi=5, prec=12):
    n = draw(st.integers(1, 5))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(lo, hi)) for _ in range(nvars))
        terms[e] = tuple(draw(st.integers(0, field.p - 1)) for _ in range(field.n))
    return laurent(field, nvars, terms, prec)


def test_mul_identity_and_inverse_monomial():
    x = laurent(F9, 2, {(1, 0): 1, (0, 2): (1, 2)}, 10)
    one = TruncLaurent.one(F9, 2, "Y")
    assert series_mul(x, one) == x
    y0 = TruncLaurent.monomial(F9, (1, 0))
    assert y0 * TruncLaurent.monomial(F9, (-1, 0)) == one
    assert y0 * y0.inverse() == one


def test_square_of_one_plus_t():
    F3 = GF(3, 1)
    u = laurent(F3, 1, {(0,): 1, (1,): 1}, coords="T")
    assert u * u == laurent(F3, 1, {(0,): 1, (1,): 2, (2,): 1}, coords="T")


@given(elements(), elements(), elements())
def test_ring_axioms(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x


def test_coordinate_mismatch_raises():
    a = TruncLaurent.one(F9, 1, "Y")
    b = TruncLaurent.one(F9, 1, "T")
    with pytest.raises(CoordinateError):
        a + b


@st.composite
def one_units(draw, field=F25, nvars=2, prec=15):
    eps = draw(elements(field, nvars, lo=0, hi=4, prec=prec))
    # force positive valuation: shift every monomial up by one in the first variable
    eps = eps.monomial_multiply((1,) + (0,) * (nvars - 1))
    return eps + 1


@given(one_units(), st.integers(-50, 50), st.integers(-50, 50))
def test_zp_power_exponent_homomorphism(u, a, b):
    assert zp_power(u, a) * zp_power(u, b) == zp_power(u, a + b)


@given(one_units())
def test_zp_power_basic(u):
    assert zp_power(u, 0) == TruncLaurent.one(F25, 2, "Y", u.prec)
    assert zp_power(u, -1) * u == TruncLaurent.one(F25, 2, "Y", u.prec)
    assert zp_power(u, 3) == u * u * u


@given(one_units())
def test_zp_power_fractional_roundtrip(u):
    q = 25
    r = zp_power(u, Fraction(1, 1 - q))
    assert zp_power(r, 1 - q) == u
    assert r ** (q - 1) * u == TruncLaurent.one(F25, 2, "Y", u.prec)


def test_zp_power_exact_input_needs_precision():
    u = laurent(F25, 1, {(0,): 1, (1,): 1})
    with pytest.raises(PrecisionError):
        zp_power(u, 5)


def test_apply_phi_examples():
    y1 = TruncLaurent.monomial(F9, (0, 1))
    assert apply_phi(y1) == TruncLaurent.monomial(F9, (3, 0))
    c = TruncLaurent.constant(F9, 2, "Y", (1, 2))
    assert apply_phi(c) == c
    m = TruncLaurent.monomial(F9, (2, -1))
    x = m
    for _ in range(2):
        x = apply_phi(x)
    assert x == apply_phi_q(m, 9) == TruncLaurent.monomial(F9, (18, -9))


@given(elements(), elements())
def test_apply_phi_is_ring_map(x, y):
    assert apply_phi(x * y) == apply_phi(x) * apply_phi(y)
    assert apply_phi(x + y) == apply_phi(x) + apply_phi(y)


@given(st.integers(-5, 5), st.integers(-5, 5))
def test_apply_phi_scales_valuation(a, b):
    m = TruncLaurent.monomial(F25, (a, b), (1, 1))
    assert apply_phi(m).valuation() == 5 * m.valuation()


def test_change_coords_y_to_t_small():
    tw = FieldTower(3, 1)
    cc = CoordChange(tw, 3)
    y = TruncLaurent.monomial(tw.F, (1,))
    t = change_coords(y, "T", cc)
    # Y = [1] - [2] = (1+T) - (1+T)^2 over F_3, embedded into F
    expect = DenseT.from_terms(tw.Fq, 1, 3, {(1,): 2, (2,): 2})
    assert t == expect
    one = TruncLaurent.one(tw.F, 1, "Y")
    assert change_coords(one, "T", cc) == DenseT.one(tw.Fq, 1, 3)


@pytest.mark.parametrize("p,f", [(3, 2), (3, 3), (5, 2)])
def test_linear_matrix_is_frobenius_twisted(p, f):
    cc = CoordChange(FieldTower(p, f), 4)
    for i in range(f):
        for j in range(f):
            assert cc.A[i][j] == cc.A[i][0] ** (p ** j)


@pytest.mark.parametrize("p,f", [(3, 2), (5, 2), (3, 3)])
def test_leading_form_of_y_is_z(p, f):
    tw = FieldTower(p, f)
    cc = CoordChange(tw, 4)
    for j in range(f):
        z = cc.t_to_z(cc.Y(j))
        lin = {k: v for k, v in z.terms().items() if sum(k) == 1}
        e = tuple(int(i == j) for i in range(f))
        assert lin == {e: tw.Fq.one}


@pytest.mark.parametrize("p,f", [(3, 2), (5, 2)])
def test_t_z_roundtrip(p, f):
    tw = FieldTower(p, f)
    cc = CoordChange(tw, 6)
    rng = np.random.default_rng(0)
    data = rng.integers(0, p, size=(6,) * f + (f,))
    x = DenseT(tw.Fq, f, 6, data)
    assert cc.z_to_t(cc.t_to_z(x)) == x


@pytest.mark.parametrize("p,f", [(3, 2), (5, 2)])
def test_y_t_roundtrip(p, f):
    tw = FieldTower(p, f)
    cc = CoordChange(tw, 8)
    x = TruncLaurent.from_dict(tw.F, f, "Y", {(1, 2): 1, (3, 0): tw.sigma0(tw.Fq.gen), (0, 1): 2}, 8)
    assert cc.t_to_y(cc.y_to_t(x)) == x


def test_dense_phi_psi():
    tw = FieldTower(3, 2)
    rng = np.random.default_rng(2)
    data = np.zeros((9, 9, 2), dtype=np.int64)
    data[:2, :2] = rng.integers(0, 3, size=(2, 2, 2))
    x = DenseT(tw.Fq, 2, 9, data)
    back = x.phi().psi()
    assert back == x.truncate(back.N)
    assert back.N >= 2
