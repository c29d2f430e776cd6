from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.serre_weights import (
    IRREDUCIBLE,
    REDUCIBLE,
    GenericityError,
    WeightParams,
    a_dprime_closed,
    all_subsets,
    an_vector,
    b_exponents,
    b_recurrence,
    delta_step,
    ff_sqrt,
    lambda_sigma,
    orbit_of,
    solve_alpha,
    verify_weight_identities,
    weight_from_subset,
)

P = 29


def params(r, kind, generic=True, **kw):
    return WeightParams(P, tuple(r), kind, enforce_generic=generic, **kw)


@st.composite
def generic_params(draw):
    f = draw(st.integers(2, 4))
    kind = draw(st.sampled_from([IRREDUCIBLE, REDUCIBLE]))
    r = [draw(st.integers(12, 14)) for _ in range(f)]
    if kind == IRREDUCIBLE:
        r[0] = draw(st.integers(13, 15))
    J = frozenset(j for j in range(f) if draw(st.booleans()))
    return params(r, kind), J


def test_dictionary_examples():
    red = params((12, 13), REDUCIBLE)
    assert weight_from_subset(red, []) == (12, 13)
    assert weight_from_subset(red, [0, 1]) == (P - 3 - 12, P - 3 - 13)
    irr = params((13, 13), IRREDUCIBLE)
    assert weight_from_subset(irr, []) == (13, 13)


def test_delta_examples():
    red = params((12, 13, 14), REDUCIBLE)
    assert delta_step(red, []).J_next == frozenset()
    for J in all_subsets(3):
        assert delta_step(red, J).J_next == frozenset(j for j in range(3) if (j + 1) % 3 in J)
    irr = params((13, 13), IRREDUCIBLE)
    assert delta_step(irr, []).J_next == frozenset({1})
    st0 = delta_step(red, [])
    assert st0.s_next == (12, 13, 14)
    assert all(i not in st0.J_max for i in range(3))
    assert st0.c1 == (P - 1,) * 3


def test_orbit_examples():
    assert orbit_of(params((12, 13), REDUCIBLE), []).d == 1
    irr = orbit_of(params((13, 13), IRREDUCIBLE), [])
    assert [sorted(x) for x in irr.orbit] == [[], [1], [0, 1], [0]]
    assert irr.d == 4
    assert orbit_of(params((12, 13), REDUCIBLE), [0]).d == 2


def test_an_vector_base_cases():
    o = orbit_of(params((13, 12, 14), IRREDUCIBLE), [1])
    assert an_vector(o, 0) == (0, 0, 0)
    assert an_vector(o, 1) == o.c_vector(1)


@given(generic_params())
def test_closed_forms_match_recursion(pj):
    prm, J = pj
    o = orbit_of(prm, J)
    dp = o.dprime
    a = an_vector(o, dp)
    for i in range(prm.f):
        assert a_dprime_closed(o, i) * (1 - P ** dp) == a[i]
    a2 = an_vector(o, 2 * dp)
    assert all(x == P ** dp * y + y for x, y in zip(a2, a))
    assert sum(P ** i * x for i, x in enumerate(a)) % (prm.q - 1) == 0


@given(generic_params())
def test_orbit_invariants(pj):
    prm, J = pj
    o = orbit_of(prm, J)
    assert all(len(s.J_max) == o.m for s in o.steps)
    if prm.kind == IRREDUCIBLE:
        assert o.d % 2 == 0
    else:
        assert prm.f % o.d == 0
    if o.m > 0:
        sums = [sum(an_vector(o, n)) for n in range(1, 2 * o.dprime)]
        assert all(x < y for x, y in zip(sums, sums[1:]))


@given(generic_params())
def test_b_recurrence_holds(pj):
    prm, J = pj
    lhs, rhs = b_recurrence(prm, J)
    assert lhs == rhs


def test_closed_form_table_entries():
    red = params((12, 13), REDUCIBLE)
    o = orbit_of(red, [])
    assert a_dprime_closed(o, 0) == -1
    irr = params((13, 13), IRREDUCIBLE)
    o = orbit_of(irr, [])
    assert a_dprime_closed(o, 0) == -1 + Fraction(irr.h, 1 + irr.q)


def test_b_exponent_examples():
    red = params((12, 13), REDUCIBLE)
    assert b_exponents(red, []) == (0, 0)
    irr = params((13, 13), IRREDUCIBLE)
    # J = {0, 1}: s_0 = p-1-r_0
    assert b_exponents(irr, [0, 1])[0] == -irr.h_from(0) + 1


def test_lambda_sigma_examples():
    irr = params((13, 13), IRREDUCIBLE)
    F = irr.field
    i = ff_sqrt(F(-1))
    unit_det = params((13, 13), IRREDUCIBLE, lam=i.c)
    assert unit_det.det_p().is_one()
    for J in all_subsets(2):
        o = orbit_of(unit_det, J)
        assert lambda_sigma(unit_det, o) == F((-1) ** (o.d * 1 + o.d // 2))
    red1 = WeightParams(P, (12,), REDUCIBLE, lam0=3, lam1=5)
    o = orbit_of(red1, [])
    assert o.d == 1 and lambda_sigma(red1, o) == red1.field(3)
    red = params((12, 13), REDUCIBLE, lam0=3, lam1=5)
    swapped = params((12, 13), REDUCIBLE, lam0=5, lam1=3)
    assert lambda_sigma(red, orbit_of(red, [])) == lambda_sigma(swapped, orbit_of(swapped, [0, 1]))


@given(generic_params())
def test_alpha_system_solvable(pj):
    prm, J = pj
    _, ratio = solve_alpha(prm, orbit_of(prm, J))
    assert ratio.is_one()


def test_genericity_enforced():
    with pytest.raises(GenericityError):
        params((12, 13), IRREDUCIBLE)
    assert not params((12, 13), IRREDUCIBLE, generic=False).generic


def test_identity_suite_nongeneric_example():
    reps = verify_weight_identities(params((12, 13), IRREDUCIBLE, generic=False))
    assert reps and all(r.ok for r in reps)
    assert {r.params["J"] for r in reps} == {0, 1, 2, 3}


def test_identity_suite_negative_control():
    prm = params((12, 13), REDUCIBLE)

    def bump(J, b):
        return (b[0] + 1,) + tuple(b[1:]) if J == frozenset({0}) else b

    reps = verify_weight_identities(prm, perturb=bump)
    failed = [r for r in reps if not r.ok]
    assert any(r.id == "weights.b_recurrence" for r in failed)
    assert all(r.witness for r in failed)


@pytest.mark.parametrize("f", [2, 3, 4])
@pytest.mark.parametrize("kind", [IRREDUCIBLE, REDUCIBLE])
def test_identity_suite_generic(f, kind):
    r = (14, 13, 12, 13)[:f]
    assert all(x.ok for x in verify_weight_identities(params(r, kind, lam=2, lam0=3, lam1=5)))
