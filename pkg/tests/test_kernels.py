"""Both kernel backends must agree, including on infinite entries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab import kernels
from growthlab.space import dyadic_space

BACKENDS = kernels.available_backends()


def _layout(D=3):
    sp = dyadic_space(D)
    return sp, sp.offsets(2)


values = st.lists(st.one_of(st.floats(-50, 50), st.sampled_from([np.inf, -np.inf])), min_size=8, max_size=8)


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_known_values(name):
    impl = BACKENDS[name]
    sp, off = _layout()
    x = np.array([[1, 2, 3, -np.inf, 5, np.inf, 7, 8]], dtype=float)
    ent = kernels.seg_entropic(x, sp.sorted_log_weights, off, sp.log_cell_mass(2), -1.0, impl=impl)
    oracle = [-np.log((np.exp(-1) + np.exp(-2)) / 2), -np.inf, -np.log(np.exp(-5) / 2), -np.log((np.exp(-7) + np.exp(-8)) / 2)]
    np.testing.assert_allclose(ent[0], oracle, rtol=1e-14)
    mean = kernels.seg_mean(x, sp.sorted_weights, off, sp.cell_mass(2), impl=impl)
    np.testing.assert_array_equal(mean[0], [1.5, -np.inf, np.inf, 7.5])
    np.testing.assert_array_equal(kernels.seg_min(x, off, impl=impl)[0], [1, -np.inf, 5, 7])
    np.testing.assert_array_equal(kernels.seg_max(x, off, impl=impl)[0], [2, 3, np.inf, 8])


def test_inf_minus_inf_cell():
    sp, off = _layout()
    x = np.array([np.inf, -np.inf, 0, 0, 0, 0, 0, 0], dtype=float)
    for impl in BACKENDS.values():
        assert kernels.seg_mean(x, sp.sorted_weights, off, sp.cell_mass(2), impl=impl)[0, 0] == -np.inf
        assert kernels.seg_entropic(x, sp.sorted_log_weights, off, sp.log_cell_mass(2), 1.0, impl=impl)[0, 0] == np.inf
        assert kernels.seg_entropic(x, sp.sorted_log_weights, off, sp.log_cell_mass(2), -1.0, impl=impl)[0, 0] == -np.inf


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@settings(max_examples=200, deadline=None)
@given(values, st.floats(-3, 3).filter(lambda g: g != 0))
def test_backends_agree(xs, gamma):
    sp, off = _layout()
    x = np.array([xs])
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for fn, args in ((kernels.seg_mean, (sp.sorted_weights, off, sp.cell_mass(2))),
                     (kernels.seg_entropic, (sp.sorted_log_weights, off, sp.log_cell_mass(2), gamma))):
        a, b = fn(x, *args, impl=py), fn(x, *args, impl=cy)
        same = (a == b) | np.isclose(a, b, rtol=1e-13, atol=1e-13)
        assert np.all(same), (a, b)
    for fn in (kernels.seg_min, kernels.seg_max):
        np.testing.assert_array_equal(fn(x, off, impl=py), fn(x, off, impl=cy))


def test_large_exponents_do_not_overflow():
    sp, off = _layout()
    x = np.full((1, 8), 5000.0)
    for impl in BACKENDS.values():
        out = kernels.seg_entropic(x, sp.sorted_log_weights, off, sp.log_cell_mass(2), 1.0, impl=impl)
        np.testing.assert_allclose(out, 5000.0, rtol=1e-15)
