import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.base_arith import FieldTower, random_units
from artifact.iwasawa_ring import ARing, ZLaurent, lemma_coefficient, lemma_product
from artifact.series import DenseT, TruncLaurent, apply_phi, apply_phi_q


@pytest.fixture(scope="module")
def r31():
    return ARing(FieldTower(3, 1), 8)


@pytest.fixture(scope="module")
def r32():
    return ARing(FieldTower(3, 2), 8)


def test_teichmuller_action_on_y(r32):
    tw = r32.tower
    for lam in tw.Fq.nonzero():
        a = r32.ok.teichmuller(lam)
        for i in range(2):
            assert r32.act_Y_dense(a, i) == r32.cc.Y(i).scale(lam ** (3 ** i))
            assert r32.f_a(a, i) == r32.one(r32.N)


def test_action_fixes_one(r32):
    a = r32.ok(4)
    one = DenseT.one(r32.tower.Fq, 2, 8)
    assert r32.ok_act_dense(a, one) == one


def group_ring_oracle(a: int, p: int, N: int, M: int = 6):
    """a(Y) for f = 1 from Y = sum_l l^-1 (1+T)^[l], expanded by integer binomials."""
    mod = p ** M
    out = [0] * N
    for lam in range(1, p):
        t = lam
        for _ in range(M + 2):
            t = pow(t, p, mod)
        e = a * t % mod
        inv = pow(lam, -1, p)
        for k in range(N):
            out[k] = (out[k] + inv * math.comb(e, k)) % p
    return out


def test_unit_action_matches_group_ring_oracle(r31):
    got = r31.act_Y_dense(r31.ok(4), 0, 6)
    expect = group_ring_oracle(4, 3, 6)
    assert [got.coefficient((k,)).c[0] for k in range(6)] == expect
    d = got - r31.cc.Y(0).truncate(6)
    assert d.order() >= 3


def test_f_a_is_quotient(r31):
    a = r31.ok(4)
    fa_t = r31.cc.y_to_t(r31.f_a(a, 0), 7)
    lhs = fa_t * r31.act_Y_dense(a, 0, 7)
    assert lhs == r31.cc.Y(0).truncate(7).scale(a.reduce())


@pytest.mark.parametrize("p,f", [(3, 2), (5, 2)])
def test_f_a_membership_and_phi(p, f):
    R = ARing(FieldTower(p, f), 10)
    for a in random_units(R.ok, 4, np.random.default_rng(1)):
        for i in range(f):
            assert (R.f_a(a, i) - 1).valuation() >= p - 1
            assert apply_phi(R.f_a(a, i)) == R.f_a(a, i - 1) ** p


@given(seed=st.integers(0, 1000))
def test_psi_left_inverse_and_orthogonality(seed):
    tw = FieldTower(3, 2)
    rng = np.random.default_rng(seed)
    N = 9
    data = np.zeros((N, N, 2), dtype=np.int64)
    data[:3, :3] = rng.integers(0, 3, size=(3, 3, 2))
    x = DenseT(tw.Fq, 2, N, data)
    back = x.phi().psi()
    assert back == x.truncate(back.N)
    shifted = (DenseT.one(tw.Fq, 2, N) + DenseT.variable(tw.Fq, 2, N, 0)) * x.phi()
    assert shifted.psi().order() >= shifted.psi().N


def test_mu_examples(r32):
    tw = r32.tower
    one = ZLaurent((0, 0), DenseT.one(tw.Fq, 2, 3))
    assert r32.mu(one).is_zero()
    prod = DenseT.one(tw.Fq, 2, 3)
    for j in range(2):
        prod = prod * (DenseT.one(tw.Fq, 2, 3) + DenseT.variable(tw.Fq, 2, 3, j))
    assert r32.mu(ZLaurent((-1, -1), prod)).is_one()


def test_mu_by_conversion_agrees(r32):
    tw = r32.tower
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = ZLaurent((-3, -3), DenseT(tw.Fq, 2, 7, rng.integers(0, 3, size=(7, 7, 2))))
        assert r32.mu(x) == r32.mu_by_conversion(x)


@pytest.mark.parametrize("p,f", [(3, 2), (3, 3), (5, 2)])
def test_lemma_coefficient_brute_force(p, f):
    R = ARing(FieldTower(p, f), 3)
    b = [R.cc.A[i][0] for i in range(f)]
    assert lemma_coefficient(b, p) == lemma_product(b, p)
    rng = np.random.default_rng(0)
    for _ in range(3):
        b = [R.tower.Fq.random(rng, nonzero=True) for _ in range(f)]
        assert lemma_coefficient(b, p) == lemma_product(b, p)


def test_trace_to_zp_examples():
    R1 = ARing(FieldTower(3, 1), 6)
    x = DenseT(R1.tower.Fq, 1, 6, np.array([[1], [2], [0], [1], [0], [2]]))
    expect = {k: R1.tower.sigma0(v) for k, v in x.terms().items()}
    assert R1.trace_to_zp(x) == TruncLaurent.from_dict(R1.F, 1, "U", expect, 6)
    R = ARing(FieldTower(3, 2), 6)
    Fq = R.tower.Fq
    one = DenseT.one(Fq, 2, 6)
    assert R.trace_to_zp(one) == TruncLaurent.one(R.F, 1, "U", 6)
    t0 = R.ok.trace(R.ok.alpha[0])
    assert t0 == 2
    expect = {(k,): math.comb(t0, k) % 3 for k in range(1, 6) if math.comb(t0, k) % 3}
    got = R.trace_to_zp(DenseT.variable(Fq, 2, 6, 0))
    assert got == TruncLaurent.from_dict(R.F, 1, "U", expect, 6)


def test_recette(r32):
    q = 9
    x = TruncLaurent.monomial(r32.F, (q - 1,), 1, "U")
    assert r32.recette_embed(x) == r32.mono([-1, 3])
    assert r32.recette_embed(TruncLaurent.one(r32.F, 1, "U")) == r32.one()
    y = TruncLaurent.from_dict(r32.F, 1, "U", {(8,): 1, (-16,): 2, (24,): r32.F.gen})
    assert r32.recette_embed(apply_phi_q(y, q)) == apply_phi_q(r32.recette_embed(y), q)
