import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gmorrey.radial import (
    RadialExponent,
    RadialFunction,
    RadiusGrid,
    end_slope,
    integrals_from,
    integrals_to,
    power_segments,
)


def test_log_grid_contains_one():
    for r_min, r_max, K in ((1e-3, 8.0, 64), (0.01, 3.0, 9), (0.5, 2.0, 10)):
        rg = RadiusGrid.log_spaced(r_min, r_max, K)
        assert np.any(rg.nodes == 1.0)
        assert np.all(np.diff(rg.nodes) > 0)
        assert rg.r_min == r_min and rg.r_max == r_max


def test_log_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        RadiusGrid.log_spaced(1.0, 0.5, 16)
    with pytest.raises(ValueError):
        RadiusGrid.log_spaced(0.1, 1.0, 4)


def test_trapezoid_weights_sum_to_span():
    rg = RadiusGrid.log_spaced(0.01, 5.0, 32)
    assert rg.weights.sum() == pytest.approx(5.0 - 0.01)


def test_truncated_and_round_trip():
    rg = RadiusGrid.log_spaced(0.01, 8.0, 64)
    half = rg.truncated(4.0)
    assert half.r_max <= 4.0 and half.K < rg.K
    assert np.array_equal(RadiusGrid.from_dict(rg.to_dict()).nodes, rg.nodes)


def test_lattice_grid_nodes():
    rg = RadiusGrid.lattice(0.1, 1.0)
    np.testing.assert_allclose(rg.nodes[:3], [0.05, 0.15, 0.25])


@given(st.floats(-3.0, 2.0))
def test_power_quadrature_exact_for_powers(s):
    r = RadiusGrid.log_spaced(0.01, 10.0, 16).nodes
    seg = power_segments(r, r**s)
    if abs(s + 1) < 1e-12:
        exact = np.log(r[1:] / r[:-1])
    else:
        exact = (r[1:] ** (s + 1) - r[:-1] ** (s + 1)) / (s + 1)
    np.testing.assert_allclose(seg, exact, rtol=1e-11)


def test_tail_closure_exact_for_decaying_power():
    r = RadiusGrid.log_spaced(0.01, 10.0, 32).nodes
    I, div = integrals_from(r, r**-2.0)
    assert not div
    np.testing.assert_allclose(I, 1.0 / r, rtol=1e-11)


def test_tail_divergence_flagged_at_equality():
    r = RadiusGrid.log_spaced(0.01, 10.0, 32).nodes
    _, div = integrals_from(r, 1.0 / r)
    assert div


def test_head_closure_and_divergence():
    r = RadiusGrid.log_spaced(0.01, 10.0, 32).nodes
    I, div = integrals_to(r, r**0.5)
    assert not div
    np.testing.assert_allclose(I, r**1.5 / 1.5, rtol=1e-11)
    _, div = integrals_to(r, r**-1.0)
    assert div


def test_end_slope():
    r = RadiusGrid.log_spaced(0.1, 10.0, 16).nodes
    assert end_slope(r, r**-1.5, "tail") == pytest.approx(-1.5)
    assert math.isnan(end_slope(r, np.zeros_like(r), "head"))


def test_radial_exponent_tilde_example():
    rg = RadiusGrid.from_nodes(np.linspace(0.1, 4.0, 40))
    th = RadialExponent.piecewise(rg, [1.0, 2.0], [3.0, 2.0, 2.5])
    t = th.tilde().values
    r = rg.nodes
    np.testing.assert_array_equal(t[r < 2.0], 2.0)
    np.testing.assert_array_equal(t[r >= 2.0], 2.5)


def test_radial_exponent_tail_must_be_constant():
    rg = RadiusGrid.from_nodes(np.linspace(0.1, 4.0, 40))
    vals = np.linspace(3.0, 2.0, 40)
    with pytest.raises(ValueError):
        RadialExponent(rg, vals, 1.0)
    with pytest.raises(ValueError):
        RadialExponent.constant(rg, 1.0)


@given(st.lists(st.floats(1.1, 5.0), min_size=12, max_size=12), st.integers(1, 11))
def test_tilde_is_non_decreasing_below_cutoff(vals, cut):
    rg = RadiusGrid.from_nodes(np.linspace(0.1, 1.2, 12))
    v = np.array(vals)
    v[cut:] = v[cut]
    th = RadialExponent(rg, v, rg.nodes[cut])
    t = th.tilde().values
    below = rg.nodes < th.a
    assert np.all(np.diff(t[below]) >= 0)
    assert np.all(t[below] <= v[below])


def test_radial_function_alignment():
    rg = RadiusGrid.log_spaced(0.1, 1.0, 8)
    with pytest.raises(ValueError):
        RadialFunction(rg, np.ones(5))
    f = RadialFunction.from_callable(rg, np.sqrt)
    np.testing.assert_allclose(f.values, np.sqrt(rg.nodes))
