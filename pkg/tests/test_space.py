import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab.errors import BadProbabilities, HorizonError, InvalidSpace, NonRefining, NonTrivialRoot
from growthlab.space import (AdaptedProcess, RandomVariable, build_space, cond_expect, dyadic_midpoints,
                             dyadic_space, expectation, geometric_grid_space, grid_space, indicator,
                             is_measurable)


def test_smallest_space(two_atoms):
    assert two_atoms.n_atoms == 2 and two_atoms.depth == 1
    assert two_atoms.n_cells(0) == 1 and two_atoms.n_cells(1) == 2
    assert two_atoms.n_cells(7) == 2  # stationary tail


def test_bad_probabilities():
    with pytest.raises(BadProbabilities):
        build_space([("a", 0.5), ("b", 0.6)], [[["a", "b"]]])
    with pytest.raises(BadProbabilities):
        build_space([("a", 1.0), ("b", 0.0)], [[["a", "b"]]])


def test_non_refining():
    atoms = [(i, 0.25) for i in range(4)]
    parts = [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0, 2], [1, 3]]]
    with pytest.raises(NonRefining):
        build_space(atoms, parts)
    # finer partition listed before the coarser one
    with pytest.raises(NonRefining):
        build_space(atoms, [[[0, 1, 2, 3]], [[0], [1], [2], [3]], [[0, 1], [2, 3]]])


def test_nontrivial_root():
    with pytest.raises(NonTrivialRoot):
        build_space([("a", 0.5), ("b", 0.5)], [[["a"], ["b"]]])


@pytest.mark.parametrize("parts", [
    [[["a"]]],                    # atom b missing
    [[["a", "b"], ["a"]]],        # atom a twice
    [[["a", "zz"], ["b"]]],       # unknown id
])
def test_malformed_partitions(parts):
    with pytest.raises(InvalidSpace):
        build_space([("a", 0.5), ("b", 0.5)], parts)


def test_empty_atoms():
    with pytest.raises(InvalidSpace):
        build_space([], [])


def test_dyadic_structure():
    sp = dyadic_space(1)
    assert sp.n_atoms == 2 and [list(c) for c in sp.cells(1)] == [[0], [1]]
    sp = dyadic_space(3)
    assert sp.n_cells(2) == 4 and all(c.size == 2 for c in sp.cells(2))
    sp = dyadic_space(12)
    assert sp.n_atoms == 4096 and np.all(sp.probs == 2.0 ** -12)
    with pytest.raises(ValueError):
        dyadic_space(0)


def test_dyadic_cells_are_intervals_in_order():
    D = 5
    sp = dyadic_space(D)
    mids = dyadic_midpoints(D)
    for t in range(D + 1):
        for i, cell in enumerate(sp.cells(t)):
            lo, hi = i / 2 ** t, (i + 1) / 2 ** t
            assert np.all((mids[cell] > lo) & (mids[cell] < hi))


def test_measurability(dyadic3):
    mids = RandomVariable(dyadic3, dyadic_midpoints(3))
    assert is_measurable(RandomVariable.constant(dyadic3, 2.0), 0)
    assert not is_measurable(mids, 0)
    assert is_measurable(mids, 3)
    assert is_measurable(cond_expect(mids, 1), 1)


def test_cond_expect_examples(two_atoms, dyadic3):
    X = RandomVariable(two_atoms, [1.0, 3.0])
    assert np.all(cond_expect(X, 0).values == 2.0)
    Y = RandomVariable(two_atoms, [np.inf, -np.inf])
    assert np.all(cond_expect(Y, 0).values == -np.inf)
    mids = RandomVariable(dyadic3, dyadic_midpoints(3))
    left = cond_expect(mids, 1).values[:4]
    # oracle: average of 1/16, 3/16, 5/16, 7/16
    assert np.all(left == sum([1 / 16, 3 / 16, 5 / 16, 7 / 16]) / 4)


def test_cond_expect_infinities(two_atoms):
    assert expectation(RandomVariable(two_atoms, [np.inf, 1.0])) == np.inf
    assert expectation(RandomVariable(two_atoms, [-np.inf, 1.0])) == -np.inf


def test_indicator(dyadic3):
    sp = dyadic_space(2)
    assert np.all(indicator(sp, 1, [0, 1]).values == 1)
    assert np.all(indicator(sp, 1, []).values == 0)
    np.testing.assert_array_equal(indicator(sp, 1, [0]).values, [1, 1, 0, 0])
    with pytest.raises(KeyError):
        indicator(sp, 1, [5])


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=8, max_size=8), st.lists(finite, min_size=8, max_size=8),
       st.floats(-5, 5), st.floats(-5, 5))
def test_tower_and_linearity(xs, ys, a, b):
    sp = dyadic_space(3)
    X, Y = RandomVariable(sp, xs), RandomVariable(sp, ys)
    for s in range(4):
        for t in range(s + 1):
            assert cond_expect(cond_expect(X, s), t).allclose(cond_expect(X, t), atol=1e-12 * (1 + max(map(abs, xs))))
    lhs = cond_expect(RandomVariable(sp, a * X.values + b * Y.values), 1).values
    rhs = a * cond_expect(X, 1).values + b * cond_expect(Y, 1).values
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + 10 * 1e3))


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=8, max_size=8), st.lists(st.floats(0, 10), min_size=8, max_size=8))
def test_cond_expect_monotone(xs, bumps):
    sp = dyadic_space(3)
    X = RandomVariable(sp, xs)
    Y = RandomVariable(sp, np.asarray(xs) + np.asarray(bumps))
    for t in range(4):
        assert cond_expect(X, t) <= cond_expect(Y, t)


def test_random_variable_guards(two_atoms):
    with pytest.raises(ValueError):
        RandomVariable(two_atoms, [1.0])
    with pytest.raises(ValueError):
        RandomVariable(two_atoms, [1.0, np.nan])
    X = RandomVariable(two_atoms, [1.0, 2.0])
    with pytest.raises(ValueError):
        X.values[0] = 5.0


def test_random_variable_arithmetic(two_atoms):
    X = RandomVariable(two_atoms, [np.inf, 0.0])
    Y = RandomVariable(two_atoms, [-np.inf, np.inf])
    np.testing.assert_array_equal((X + Y).values, [-np.inf, np.inf])
    np.testing.assert_array_equal((X * Y).values, [-np.inf, 0.0])
    np.testing.assert_array_equal(RandomVariable(two_atoms, [-1.0, 2.0]).positive_part().values, [0.0, 2.0])


def test_grids():
    sp = grid_space(16)
    assert sp.n_cells(0) == 1 and sp.n_cells(1) == 16 and sp.depth == 1
    g = geometric_grid_space(10)
    # [0, e^-T] is the union of atoms j >= T
    for T in range(11):
        assert g.probs[T:].sum() == pytest.approx(np.exp(-T), rel=1e-12)


def test_adapted_process():
    sp = dyadic_space(2)
    proc = AdaptedProcess.explicit(sp, [[1.0] * 4, [1.0, 1.0, 2.0, 2.0]])
    proc.check_adapted(4)
    assert np.all(proc.values_at(9) == [1, 1, 2, 2])
    bad = AdaptedProcess.explicit(sp, [[1.0, 2.0, 1.0, 1.0]])
    with pytest.raises(Exception):
        bad.check_adapted(0)
    capped = AdaptedProcess(sp, lambda T: np.ones(4), max_horizon=3)
    with pytest.raises(HorizonError):
        capped.at(4)
