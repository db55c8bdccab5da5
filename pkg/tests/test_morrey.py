import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import constant_field
from gmorrey.fields import Domain, ExponentField, Grid, ScalarField
from gmorrey.morrey import (
    MorreySpaceSpec,
    RadialWeight,
    generalized_morrey_norm,
    gm_lambda_norm,
    gm_norm,
    local_norm_profile,
    nonemptiness_check,
    variable_morrey_lambda_norm,
)
from gmorrey.radial import RadialExponent, RadiusGrid
from gmorrey.vlebesgue import luxemburg_norm


@pytest.fixture
def g():
    return Grid(Domain.whole_space(1, 4.0), 256)


@pytest.fixture
def lattice_radii(g):
    # nodes at (m + 1/2) h: a ball of radius r holds exactly 2r of cells
    return RadiusGrid.lattice(g.h, 2.0)


def chi(grid, a, b):
    x = grid.centers[:, 0]
    return ScalarField(grid, ((x >= a) & (x <= b)).astype(float))


def test_profile_of_one(g, lattice_radii):
    p = ExponentField.constant(g, 2.0)
    prof = local_norm_profile(constant_field(g, 1.0), p, g.nearest_cell([0.0]), lattice_radii)
    r = lattice_radii.nodes
    np.testing.assert_allclose(prof.values, np.sqrt(np.minimum(2 * r, 8.0)), rtol=1e-12)


def test_profile_zero_and_monotone(g):
    rg = RadiusGrid.log_spaced(g.h / 4, 8.0, 32)
    p = ExponentField(g, 2.0 + np.sin(g.centers[:, 0]) ** 2, p_inf=2.0)
    assert not np.any(local_norm_profile(constant_field(g, 0.0), p, 10, rg).values)
    f = ScalarField(g, np.random.default_rng(0).normal(size=g.size))
    prof = local_norm_profile(f, p, [0.3], rg)
    assert np.all(np.diff(prof.values) >= 0)
    # a point between cell centers with r below h/2 can see an empty ball
    assert prof.values[0] >= 0.0


def test_lambda_norm_examples(g, lattice_radii):
    p = ExponentField.constant(g, 2.0)
    one = constant_field(g, 1.0)
    centers = g.sample_centers()
    whole = luxemburg_norm(one, p).norm
    big = RadiusGrid.log_spaced(g.h, 16.0, 32)
    assert variable_morrey_lambda_norm(one, p, 0.0, big, centers) == pytest.approx(whole)
    assert variable_morrey_lambda_norm(constant_field(g, 0.0), p, 1.0, lattice_radii) == 0.0
    interior = [g.nearest_cell([0.0])]
    assert variable_morrey_lambda_norm(one, p, 1.0, lattice_radii, interior) == pytest.approx(math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError):
        variable_morrey_lambda_norm(one, p, 1.5, lattice_radii)


def test_generalized_norm_examples(g, lattice_radii):
    p = ExponentField.constant(g, 2.0)
    one = constant_field(g, 1.0)
    w1 = RadialWeight.power(0.0)
    big = RadiusGrid.log_spaced(g.h, 16.0, 32)
    f = ScalarField(g, np.cos(g.centers[:, 0]))
    assert generalized_morrey_norm(f, p, w1, "unbounded", big) == pytest.approx(luxemburg_norm(f, p).norm)
    assert generalized_morrey_norm(constant_field(g, 0.0), p, w1, "bounded", lattice_radii) == 0.0
    interior = [g.nearest_cell([0.0])]
    assert generalized_morrey_norm(one, p, w1, "bounded", lattice_radii, interior) == pytest.approx(math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError):
        generalized_morrey_norm(one, p, w1, "other", lattice_radii)


def test_gm_theta_inf_examples(g):
    p = ExponentField.constant(g, 2.0)
    rg = RadiusGrid.log_spaced(g.h, 8.0, 48)
    spec = MorreySpaceSpec(p, math.inf, RadialWeight.power(0.5), g.domain, rg)
    f = chi(g, 0.0, 1.0)
    assert gm_norm(f, spec) == pytest.approx(1.0, rel=1e-12)
    assert gm_norm(f, spec) == generalized_morrey_norm(f, p, spec.w, "eta", rg)
    assert gm_norm(constant_field(g, 0.0), spec) == 0.0


def _spec(g, theta=2.0, beta=-0.25, variable=False):
    rg = RadiusGrid.log_spaced(g.h, 8.0, 32)
    if variable:
        p = ExponentField(g, 2.0 + 0.5 * np.exp(-g.centers[:, 0] ** 2), p_inf=2.0)
        th = RadialExponent.piecewise(rg, [0.5, 1.0], [2.5, 2.0, 3.0])
    else:
        p = ExponentField.constant(g, 2.0)
        th = RadialExponent.constant(rg, theta)
    return MorreySpaceSpec(p, th, RadialWeight.power(beta), g.domain, rg)


def test_gm_norm_matches_two_loop_reference():
    g = Grid(Domain.whole_space(1, 2.0), 128)
    spec = _spec(g, theta=3.0, beta=-0.2)
    f = ScalarField(g, np.random.default_rng(1).normal(size=g.size))
    r, dr = spec.radius_grid.nodes, spec.radius_grid.weights
    best = 0.0
    for i in range(g.size):
        total = 0.0
        for k in range(r.size):
            inside = np.abs(g.centers[:, 0] - g.centers[i, 0]) < r[k] * (1 - 1e-12)
            local = (np.sum(np.abs(f.values[inside]) ** 2) * g.h) ** 0.5
            total += (r[k] ** -0.2 * r[k] ** -0.5 * local) ** 3 * dr[k]
        best = max(best, total ** (1 / 3))
    assert gm_norm(f, spec) == pytest.approx(best, rel=1e-10)


@given(st.integers(0, 10**6), st.sampled_from([0.1, 3.0, 100.0]), st.booleans())
def test_gm_norm_homogeneous(seed, c, variable):
    g = Grid(Domain.whole_space(1, 2.0), 64)
    spec = _spec(g, variable=variable)
    f = ScalarField(g, np.random.default_rng(seed).normal(size=g.size))
    centers = g.sample_centers()
    assert gm_norm(f * c, spec, centers) == pytest.approx(c * gm_norm(f, spec, centers), rel=1e-9)


def test_gm_norm_triangle_inequality():
    g = Grid(Domain.whole_space(1, 2.0), 64)
    spec = _spec(g, variable=True)
    r = np.random.default_rng(7)
    centers = g.sample_centers()
    for _ in range(100):
        f = ScalarField(g, r.normal(size=g.size))
        h = ScalarField(g, r.normal(size=g.size))
        lhs = gm_norm(f + h, spec, centers)
        assert lhs <= (gm_norm(f, spec, centers) + gm_norm(h, spec, centers)) * (1 + 1e-9)


@given(st.integers(0, 10**6))
def test_gm_norm_monotone(seed):
    g = Grid(Domain.whole_space(1, 2.0), 64)
    spec = _spec(g, variable=True)
    r = np.random.default_rng(seed)
    big = r.normal(size=g.size)
    small = big * r.uniform(-1, 1, g.size)
    assert gm_norm(ScalarField(g, small), spec) <= gm_norm(ScalarField(g, big), spec) * (1 + 1e-9)


def test_lambda_specialization(g):
    p = ExponentField(g, 2.0 + 0.3 * np.cos(g.centers[:, 0]), p_inf=2.0)
    rg = RadiusGrid.log_spaced(g.h, 8.0, 32)
    f = ScalarField(g, np.exp(-g.centers[:, 0] ** 2))
    centers = g.sample_centers()
    for theta in (math.inf, RadialExponent.constant(rg, 2.0)):
        via_lambda = gm_lambda_norm(f, p, theta, 0.4, rg, centers)
        spec = MorreySpaceSpec(p, theta, RadialWeight.lambda_form(p, 0.4), g.domain, rg)
        assert via_lambda == gm_norm(f, spec, centers)
    # direct form r^{-lambda/p} profile, measured on the same grid
    from gmorrey.morrey import profiles, radial_norms

    P = profiles(f, p, rg, centers)
    G = rg.nodes[None, :] ** (-0.4 / p.values[centers][:, None]) * P
    direct = float(np.max(radial_norms(G, RadialExponent.constant(rg, 2.0), rg.weights)))
    assert gm_lambda_norm(f, p, RadialExponent.constant(rg, 2.0), 0.4, rg, centers) == pytest.approx(direct, rel=1e-12)
    assert gm_lambda_norm(constant_field(g, 0.0), p, math.inf, 0.0, rg) == 0.0


def test_lambda_zero_theta_inf_reduces(g):
    p = ExponentField.constant(g, 2.0)
    rg = RadiusGrid.log_spaced(g.h, 8.0, 32)
    f = chi(g, -1.0, 0.5)
    centers = g.sample_centers()
    spec = MorreySpaceSpec(p, math.inf, RadialWeight.lambda_form(p, 0.0), g.domain, rg)
    assert gm_lambda_norm(f, p, math.inf, 0.0, rg, centers) == gm_norm(f, spec, centers)


def test_nonemptiness_examples(g):
    p = ExponentField.constant(g, 2.0)
    rg = RadiusGrid.log_spaced(g.h, 16.0, 64)
    th = RadialExponent.constant(rg, 2.0)
    finite = nonemptiness_check(MorreySpaceSpec(p, th, RadialWeight.power(0.0, rate=1.0), g.domain, rg))
    assert not finite.divergent
    # oracle: ∫_{r_min}^{r_max} e^{-2r} dr
    exact = math.sqrt(0.5 * (math.exp(-2 * rg.r_min) - math.exp(-2 * rg.r_max)))
    assert finite.value == pytest.approx(exact, rel=0.01)
    assert finite.truncation == (rg.r_min, rg.r_max)
    for beta in (0.0, 0.5):
        rep = nonemptiness_check(MorreySpaceSpec(p, th, RadialWeight.power(beta), g.domain, rg))
        assert rep.divergent and "tail-divergent" in rep.reasons
    with pytest.raises(ValueError):
        RadialWeight.tabulate(lambda r: 0 * r, rg)


def test_weight_kinds(g):
    rg = RadiusGrid.log_spaced(g.h, 8.0, 16)
    r = rg.nodes
    w = RadialWeight.power(0.5, amplitude=2.0, growth=1.0, rate=0.5)
    np.testing.assert_allclose(w.values([0], r)[0], 2 * r**0.5 * (1 + r) * np.exp(-0.5 * r))
    assert not w.is_pure_power and RadialWeight.power(1.0).is_pure_power
    t = RadialWeight.tabulate(lambda r: r**2, rg)
    np.testing.assert_allclose(t.values([3, 4], r), np.vstack([r**2, r**2]))
    with pytest.raises(ValueError):
        t.values([0], [0.123456])
    per_cell = RadialWeight.power(np.linspace(0, 1, g.size))
    assert per_cell.values([g.size - 1], [2.0])[0, 0] == pytest.approx(2.0)
    p = ExponentField.constant(g, 2.0)
    with pytest.raises(ValueError):
        RadialWeight.lambda_form(p, 2.0)


def test_spec_json_round_trip(g):
    spec = _spec(g, variable=True)
    text = json.dumps(spec.to_dict())
    back = MorreySpaceSpec.from_dict(json.loads(text))
    f = ScalarField(g, np.exp(-g.centers[:, 0] ** 2))
    assert gm_norm(f, back) == gm_norm(f, spec)
    brief = {
        "domain": {"n": 1, "box": [[-1, 1]]},
        "points_per_axis": 64,
        "p": 2.0,
        "theta": "inf",
        "w": {"kind": "power", "beta": 0.5},
        "radius_grid": {"r_min": 0.05, "r_max": 4.0, "K": 16},
    }
    s = MorreySpaceSpec.from_dict(brief)
    assert s.theta == math.inf and s.radius_grid.K >= 16


def test_spec_validates_components(g):
    rg = RadiusGrid.log_spaced(g.h, 8.0, 16)
    other = RadiusGrid.log_spaced(g.h, 4.0, 16)
    p = ExponentField.constant(g, 2.0)
    with pytest.raises(ValueError):
        MorreySpaceSpec(p, RadialExponent.constant(other, 2.0), RadialWeight.power(0.0), g.domain, rg)
    with pytest.raises(ValueError):
        MorreySpaceSpec(p, 5.0, RadialWeight.power(0.0), g.domain, rg)
