from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.base_arith import ParameterError
from artifact.newton import (
    ValuationTuple,
    act_group,
    act_index,
    classify_component,
    oracle_member,
    random_tuple,
    renormalize,
    same_component,
    slope_multiset,
    verify_newton,
)


def V(p, *xs):
    return ValuationTuple(p, tuple(Fraction(x) for x in xs))


def test_single_family():
    s = slope_multiset(V(3, 1), (Fraction(1), Fraction(100)))
    assert s == [2, 6, 18, 54]


def test_scaling_by_q_shifts_one_step():
    v, w = V(3, 1, 2), V(3, 9, 18)
    lo, hi = Fraction(1, 100), Fraction(10 ** 4)
    a = slope_multiset(v, (lo, hi))
    assert slope_multiset(w, (9 * lo, 9 * hi)) == [9 * x for x in a]


def test_explicit_union():
    s = slope_multiset(V(3, 1, 3), (Fraction(1, 10), Fraction(100)))
    assert s == [Fraction(8, 27), Fraction(8, 9), Fraction(8, 3), 8, 24, 72]


def test_classify_examples():
    p = 5
    w = classify_component(V(p, 1, p))
    assert w is not None and w.sigma == (0, 1) and w.m == (0, 0) and w.index == (0, 1)
    assert classify_component(V(p, 1, 1)) is None
    w2 = classify_component(V(p, p ** 2, p ** 3))
    assert w2.sigma == (0, 1) and w2.m == (1, 1)
    assert same_component(w, w2, p) or w2.values(p) == (p ** 2, p ** 3)


def test_act_group_examples():
    p, f = 3, 2
    v = V(p, 1, p)
    assert act_group(v, (0, 0), (0, 1)) == v
    w = classify_component(v)
    shifted = classify_component(act_group(v, (1, 1), (0, 1)))
    assert shifted.index == tuple(n + f for n in w.index)
    swapped = classify_component(act_group(v, (0, 0), (1, 0)))
    assert swapped.index == (w.index[1], w.index[0])


def test_invalid_inputs():
    with pytest.raises(ParameterError):
        V(3, 0, 1)
    with pytest.raises(ParameterError):
        slope_multiset(V(3, 1), (Fraction(2), Fraction(1)))


tuples = st.builds(
    lambda p, f, seed: random_tuple(p, f, np.random.default_rng(seed)),
    st.sampled_from([3, 5, 29]), st.integers(2, 3), st.integers(0, 10 ** 6),
)


@given(tuples)
def test_classification_matches_window_oracle(v):
    w = classify_component(v)
    truth, _ = oracle_member(v)
    assert (w is not None) == truth
    if w is not None:
        assert w.values(v.p) == v.v


@given(tuples, st.data())
def test_group_equivariance(v, data):
    f = v.f
    d = data.draw(st.lists(st.integers(-2, 2), min_size=f, max_size=f))
    sigma = data.draw(st.permutations(range(f)))
    w0, w1 = classify_component(v), classify_component(act_group(v, d, sigma))
    assert (w0 is None) == (w1 is None)
    if w0 is not None:
        assert w1.index == act_index(w0.index, d, sigma, f)


@given(st.sampled_from([3, 29]), st.integers(2, 3), st.integers(0, 10 ** 6), st.integers(-3, 3))
def test_witness_unique_up_to_diagonal(p, f, seed, k):
    v = random_tuple(p, f, np.random.default_rng(seed), member_bias=1.0)
    w = classify_component(v)
    alt = renormalize(w, p, k)
    assert alt.values(p) == v.v and same_component(w, alt, p)
    if k:
        bad = type(w)(w.sigma, tuple(m + (i == 0) for i, m in enumerate(w.m)), w.c)
        assert not same_component(w, bad, p)


@pytest.mark.parametrize("p", [3, 29])
def test_suite(p):
    reps = verify_newton(p, (2, 3), n=100, n_group=30)
    assert len(reps) == 6 and all(r.ok for r in reps)
