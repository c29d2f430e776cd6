from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.base_arith import FieldTower, OKRing, ParameterError, random_units
from artifact.lubin_tate import (
    Character,
    Irreducible,
    Split,
    compose,
    denominator_budget,
    dk_module,
    excluded_h,
    f_a_lt,
    in_fixed_model,
    lt_action,
)
from artifact.series import TruncLaurent


def ok_for(tw, N):
    return OKRing(tw, 1 + denominator_budget(N + 1, tw.q))


def log_conjugation_oracle(a: int, p: int, N: int):
    """[a](T) over Q for f = 1 from l([a](T)) = a l(T), l(T) = sum p^-n T^(p^n)."""
    logc = {}
    k = 1
    n = 0
    while k < N:
        logc[k] = Fraction(1, p ** n)
        k *= p
        n += 1

    def mul(x, y):
        out = [Fraction(0)] * N
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y[: N - i]):
                    out[i + j] += xi * yj
        return out

    c = [Fraction(0)] * N
    for d in range(1, N):
        c[d] = Fraction(0)
        # coefficient of T^d in l(g) with c_d unknown enters linearly with weight 1
        total = [Fraction(0)] * N
        for e, w in logc.items():
            pw = [Fraction(0)] * N
            pw[0] = Fraction(1)
            for _ in range(e):
                pw = mul(pw, c)
            total = [t + w * v for t, v in zip(total, pw)]
        c[d] = a * logc.get(d, 0) - total[d]
    return c


def test_log_conjugation_oracle_for_four():
    tw = FieldTower(3, 1)
    N = 10
    got = lt_action(ok_for(tw, N)(4), N).series
    c = log_conjugation_oracle(4, 3, N)
    for d in range(N):
        assert c[d].denominator % 3 != 0
        expect = c[d].numerator * pow(c[d].denominator, -1, 3) % 3
        assert got.coefficient_or_zero((d,)) == tw.F(expect)


@pytest.mark.parametrize("p,f", [(3, 1), (3, 2), (5, 1), (5, 2)])
def test_p_is_t_power_q(p, f):
    tw = FieldTower(p, f)
    N = 30
    s = lt_action("p", N, tw).series
    want = TruncLaurent.monomial(tw.F, (tw.q,), 1, "U", N) if tw.q < N else TruncLaurent.zero(tw.F, 1, "U", N)
    assert s == want


@pytest.mark.parametrize("p,f", [(3, 2), (5, 2)])
def test_teichmuller_acts_linearly(p, f):
    tw = FieldTower(p, f)
    ok = ok_for(tw, 20)
    for lam in tw.Fq.nonzero():
        s = lt_action(ok.teichmuller(lam), 20).series
        assert s == TruncLaurent.monomial(tw.F, (1,), tw.sigma0(lam), "U", 20)
        assert f_a_lt(ok.teichmuller(lam), 19) == TruncLaurent.one(tw.F, 1, "U", 19)


def test_f_a_of_one_is_one():
    tw = FieldTower(3, 2)
    assert f_a_lt(ok_for(tw, 20).one, 19) == TruncLaurent.one(tw.F, 1, "U", 19)


def test_f_a_leading_correction_degree():
    tw = FieldTower(3, 1)
    f = f_a_lt(ok_for(tw, 12)(4), 11)
    d = f - 1
    assert not d.is_zero()
    assert d.valuation() == tw.q - 1


@pytest.mark.parametrize("p,f", [(3, 1), (5, 2)])
@given(seed=st.integers(0, 10_000))
def test_composition_property(p, f, seed):
    tw = FieldTower(p, f)
    N = 25
    ok = ok_for(tw, N)
    a, b = random_units(ok, 2, np.random.default_rng(seed), include_special=False)
    lhs = compose(lt_action(a, N).series, lt_action(b, N).series)
    assert lhs == lt_action(a * b, N).series
    assert lt_action(a, N).linear_coefficient() == tw.sigma0(a.reduce())
    assert in_fixed_model(f_a_lt(a, N - 1), tw.q)


def test_dk_character_trivial():
    tw = FieldTower(3, 2)
    lam = tw.F.gen
    D = dk_module(Character(0, lam), 20, tw)
    assert D.phi_matrix()[0][0] == TruncLaurent.constant(tw.F, 1, "U", lam)
    a = ok_for(tw, 20)(4)
    assert D.action_matrix(a)[0][0] == TruncLaurent.one(tw.F, 1, "U", 20)


def test_dk_irreducible_matrix():
    tw = FieldTower(3, 2)
    lam = tw.F.gen
    h = 2
    D = dk_module(Irreducible(2, h, lam), 20, tw)
    Phi = D.phi_matrix()
    assert Phi[0][0].is_zero() and Phi[1][1].is_zero()
    assert Phi[1][0] == TruncLaurent.one(tw.F, 1, "U")
    assert Phi[0][1] == TruncLaurent.monomial(tw.F, (-h * 8,), lam ** 2, "U")
    t = ok_for(tw, 20).teichmuller(tw.Fq.gen)
    G = D.action_matrix(t)
    assert G[0][0] == TruncLaurent.one(tw.F, 1, "U", 20) == G[1][1]


def test_excluded_h_rejected():
    tw = FieldTower(3, 1)
    assert excluded_h(4, 2, 3)
    with pytest.raises(ParameterError):
        dk_module(Irreducible(2, 4, tw.F.one), 10, tw)


@pytest.mark.parametrize("shape_name", ["character", "irreducible", "split"])
def test_dk_commutation(shape_name):
    tw = FieldTower(3, 1)
    N = 40
    lam = tw.F.gen
    shape = {"character": Character(2, lam), "irreducible": Irreducible(2, 1, lam),
             "split": Split(3, lam, lam ** 2)}[shape_name]
    D = dk_module(shape, N, tw)
    for a in random_units(ok_for(tw, N), 4, np.random.default_rng(0)):
        assert D.commutation_defect(a) is None
    assert D.det_valuation() == -shape.h * (tw.q - 1)


def test_dk_negative_control():
    tw = FieldTower(3, 1)
    N = 40
    D = dk_module(Character(2, tw.F.gen), N, tw)
    a = ok_for(tw, N)(4)
    G = D.action_matrix(a)
    bad = [[G[0][0] * D.f_a(a)]]
    assert D.commutation_defect(a, bad) is not None
