from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.base_arith import ParameterError
from artifact.lubin_tate import Character, Irreducible, Split
from artifact.phigamma import (
    AScalars,
    build_DA_otimes,
    build_semisimple_module,
    check_equivariance,
    dual_module,
    mat_first_difference,
    mat_map,
    pairing,
    psi_on_module,
    ring_for,
    trace_base_change,
    twist_by_character,
    verify_main_isomorphism,
)
from artifact.serre_weights import IRREDUCIBLE, REDUCIBLE, WeightParams
from artifact.series import TruncLaurent, zp_power
from artifact.suites import suite_otimes, suite_reconstruction

P, F_, N = 5, 2, 30


@pytest.fixture(scope="module")
def S():
    return AScalars(ring_for(P, F_, N))


@pytest.fixture(scope="module")
def units(S):
    return S.random_units(4, np.random.default_rng(0))


def rand_y(S, rng, deg=3, n=4):
    terms = {}
    for _ in range(n):
        terms[tuple(int(v) for v in rng.integers(0, deg, S.f))] = S.F(int(rng.integers(1, S.p)))
    return TruncLaurent.from_dict(S.F, S.f, "Y", terms, S.N)


def test_character_structure(S, units):
    lam, h = S.F.gen, 7
    D = build_semisimple_module(Character(h, lam), N, S.ring)
    want = S.mono([h, -P * h], lam)
    assert D.Phi[0][0] == want
    a = units[2]
    fa = S.ring.f_a(a, 0)
    ratio = (fa * S.phi(fa).inverse()).truncate(N)
    assert D.G(a)[0][0] == zp_power(ratio, Fraction(h, 1 - S.q), N)


def test_split_second_line(S, units):
    lam0, lam1 = S.F.gen, S.F(3)
    D = build_semisimple_module(Split(7, lam0, lam1), N, S.ring)
    assert D.Phi[1][1] == S.mono([0, 0], lam1)
    assert D.Phi[0][1].is_zero() and D.Phi[1][0].is_zero()
    G = D.G(units[3])
    assert G[1][1] == S.one(N) and G[0][1].is_zero()


def test_teichmuller_acts_trivially(S):
    t = S.ring.ok.teichmuller(S.ring.tower.Fq.gen)
    D = build_semisimple_module(Irreducible(2, 7, S.F.gen), N, S.ring)
    G = D.G(t)
    assert G[0][0] == S.one(N) == G[1][1]


@pytest.mark.parametrize("name", ["character", "irreducible", "split"])
def test_equivariance(S, units, name):
    lam = S.F.gen
    shape = {"character": Character(7, lam), "irreducible": Irreducible(2, 7, lam),
             "split": Split(7, lam, lam ** 3)}[name]
    rep = check_equivariance(build_semisimple_module(shape, N, S.ring), units)
    assert rep.ok, rep.witness


def test_equivariance_negative_control(S, units):
    D = build_semisimple_module(Irreducible(2, 7, S.F.gen), N, S.ring, action_h_shift=1)
    rep = check_equivariance(D, units[:1])
    assert not rep.ok
    assert "commutation" in rep.witness


def test_excluded_h(S):
    with pytest.raises(ParameterError):
        build_semisimple_module(Irreducible(2, S.q + 1, S.F.gen), N, S.ring)


def test_dual_character(S, units):
    lam, h = S.F.gen, 7
    D = build_semisimple_module(Character(h, lam), N, S.ring)
    Dv = dual_module(D)
    assert Dv.Phi[0][0] == S.mono([-h, P * h], lam.inverse())
    Dvv = dual_module(Dv)
    assert mat_first_difference(Dvv.Phi, D.Phi) is None
    assert mat_first_difference(Dvv.G(units[1]), D.G(units[1])) is None


@settings(max_examples=5)
@given(seed=st.integers(0, 1000))
def test_dual_pairing_equivariant(S, units, seed):
    rng = np.random.default_rng(seed)
    D = build_semisimple_module(Irreducible(2, 7, S.F.gen), N, S.ring)
    Dv = dual_module(D)
    x = [rand_y(S, rng) for _ in range(2)]
    y = [rand_y(S, rng) for _ in range(2)]
    lhs = pairing(Dv.frob(x), D.frob(y), S)
    assert lhs.first_difference(S.phi(pairing(x, y, S), S.f)) is None
    a = units[int(rng.integers(0, len(units)))]
    assert pairing(Dv.act(a, x), D.act(a, y), S).first_difference(S.act(a, pairing(x, y, S))) is None


@settings(max_examples=5)
@given(seed=st.integers(0, 1000))
def test_psi_left_inverse_on_modules(S, seed):
    rng = np.random.default_rng(seed)
    base = build_semisimple_module(Irreducible(2, 7, S.F.gen), N, S.ring)
    for M in (base, build_DA_otimes(base)):
        x = [rand_y(S, rng) for _ in range(M.rank)]
        back = psi_on_module(M, M.frob(x))
        assert all(u.first_difference(v) is None for u, v in zip(back, x))


def test_reconstruction_and_linearity():
    reps = suite_reconstruction(3, 2, 30)
    assert [r.status for r in reps] == ["pass"] * 3


def test_otimes_structure():
    reps = suite_otimes(P, F_, N)
    assert all(r.ok for r in reps), [r.to_dict() for r in reps if not r.ok]


def test_twists(S, units):
    base = build_semisimple_module(Irreducible(2, 7, S.F.gen), N, S.ring)
    D = build_DA_otimes(base)
    lam = S.F.gen
    un = twist_by_character(D, (0, lam))
    assert mat_first_difference(un.Phi, mat_map(lambda x: x.scale(lam), D.Phi)) is None
    om = twist_by_character(D, (1, 1))
    s0 = S.ring.sigma_bar(units[1], 0)
    assert mat_first_difference(om.G(units[1]), mat_map(lambda x: x.scale(s0), D.G(units[1]))) is None
    # phi_q-type twist by a character is the tensor product with the character module
    ch = build_semisimple_module(Character(3, lam), N, S.ring)
    tw = twist_by_character(ch, (4, S.F.one))
    ch7 = build_semisimple_module(Character(7, lam), N, S.ring)
    assert mat_first_difference(tw.Phi, ch7.Phi) is None
    assert mat_first_difference(tw.G(units[2]), ch7.G(units[2])) is None


def test_trace_f1_identity():
    S1 = AScalars(ring_for(P, 1, N))
    D = build_DA_otimes(build_semisimple_module(Irreducible(2, 2, S1.F.gen), N, S1.ring))
    Dt = trace_base_change(D)
    assert Dt.rank == D.rank
    for i in range(2):
        for j in range(2):
            assert Dt.Phi[i][j].serialize() == D.Phi[i][j].serialize()
    with pytest.raises(ParameterError):
        trace_base_change(Dt)


def test_main_isomorphism_nongeneric_irreducible():
    prm = WeightParams(29, (12, 13), IRREDUCIBLE, enforce_generic=False)
    reps, wit = verify_main_isomorphism(prm, 60, n_units=3)
    assert all(r.ok for r in reps), [r.to_dict() for r in reps if not r.ok]
    assert set(wit.alpha) == {0, 1, 2, 3}


def test_main_isomorphism_negative_control():
    prm = WeightParams(29, (12, 13), REDUCIBLE, lam0=3, lam1=5)
    reps, _ = verify_main_isomorphism(prm, 60, n_units=2, perturb_b=(1, 0))
    failed = [r for r in reps if not r.ok]
    assert {r.id for r in failed} >= {"iso.frobenius"}
    assert all("monomial" in r.witness for r in failed if r.id == "iso.frobenius")


def test_main_isomorphism_needs_precision():
    prm = WeightParams(29, (12, 13), REDUCIBLE)
    with pytest.raises(ParameterError):
        verify_main_isomorphism(prm, 20)
