import math

import numpy as np
import pytest

from gmorrey.fields import ExponentField, ScalarField
from gmorrey.fieldio import sample_scalar
from gmorrey.harness import (
    TestFamily,
    VerifySetup,
    apply_operator,
    estimate_operator_norm,
    verify_local_embedding,
    verify_maximal_local,
    verify_riesz_local,
    verify_weighted_riesz_local,
)
from gmorrey.morrey import MorreySpaceSpec, RadialWeight
from gmorrey.radial import RadialExponent, RadiusGrid

SMALL = VerifySetup(points=256, K=32)
ONE = {"kind": "constant", "value": 1.0}
ZERO = {"kind": "constant", "value": 0.0}


def test_family_parse_and_determinism():
    fam = TestFamily.parse("power-bumps,5,3")
    assert fam.kind == "power-bumps" and fam.count == 5 and fam.seed == 3
    assert fam.descriptors() == TestFamily.parse("power-bumps,5,3").descriptors()
    assert fam.descriptors() != TestFamily.parse("power-bumps,5,4").descriptors()
    for bad in ("power-bumps,5", "nope,3,1"):
        with pytest.raises(ValueError):
            TestFamily.parse(bad)


@pytest.mark.parametrize("kind", ["ball-indicators", "power-bumps", "random-smooth"])
def test_family_prefix_and_membership(kind):
    small = TestFamily(kind, 4, 11).descriptors()
    big = TestFamily(kind, 8, 11).descriptors()
    assert big[:4] == small
    g = SMALL.grid()
    for f in TestFamily(kind, 8, 11).members(g):
        assert np.all(np.isfinite(f.values)) and np.any(f.values)


def test_power_bump_exponents_integrable():
    for d in TestFamily("power-bumps", 50, 0, p_plus=3.0).descriptors():
        assert 0.0 <= d["beta"] < 0.9 / 3.0


def test_local_embedding_constant():
    setup = VerifySetup(points=256, K=32, r_max=2.0)
    rep = verify_local_embedding(ONE, 2.0, setup)
    assert rep.passed and rep.stable and 0 < rep.constant < 2.0
    # at the middle sample point the profile is sqrt(2r), so the right side
    # truncated at r_max is sqrt(2t) ln(r_max / t)
    h = setup.grid().h
    mid = [row for row in rep.rows if abs(row[1][0]) < h and row[2] <= 1.0]
    assert mid
    for _, _, t, lhs, rhs, _ in mid:
        assert abs(lhs**2 - 2 * t) <= 2 * h
        if t >= 0.25:
            assert rhs == pytest.approx(math.sqrt(2 * t) * math.log(2.0 / t), rel=0.05)


def test_local_embedding_radius_refinement():
    coarse = verify_local_embedding(ONE, 2.0, VerifySetup(points=256, K=64))
    fine = verify_local_embedding(ONE, 2.0, VerifySetup(points=256, K=128))
    assert fine.constant == pytest.approx(coarse.constant, rel=0.05)


def test_zero_function_passes_everywhere():
    assert verify_local_embedding(ZERO, 2.0, SMALL).constant == 0.0
    a, b = verify_maximal_local(ZERO, 2.0, SMALL)
    assert a.passed and b.passed and a.constant == 0.0
    assert verify_riesz_local(ZERO, 2.0, 0.25, SMALL).passed
    assert verify_weighted_riesz_local(ZERO, 2.0, 0.25, SMALL).passed


def test_maximal_on_indicator_and_constant():
    chi = {"kind": "interval", "a": -1.0, "b": 1.0}
    sup_form, int_form = verify_maximal_local(chi, 2.0, SMALL)
    for rep in (sup_form, int_form):
        assert rep.passed and math.isfinite(rep.constant)
    assert (sup_form.inequality, int_form.inequality) == ("thm24", "eq27")
    # M is the identity on constants away from the box edge
    setup = VerifySetup(points=256, K=32, r_max=2.0, centers=3)
    emb = verify_local_embedding(ONE, 2.0, setup)
    _, mx = verify_maximal_local(ONE, 2.0, setup)
    mid = [i for i, row in enumerate(emb.rows) if abs(row[1][0]) < 0.1]
    for i in mid:
        assert mx.rows[i][3] == pytest.approx(emb.rows[i][3], rel=1e-12)


def test_riesz_local_indicator():
    chi = {"kind": "interval", "a": 0.0, "b": 1.0}
    rep = verify_riesz_local(chi, 2.0, 0.25, SMALL)
    assert rep.passed and math.isfinite(rep.constant)
    with pytest.raises(ValueError):
        verify_riesz_local(chi, 2.0, 0.5, SMALL)


def test_weighted_riesz_reduces_without_decay():
    chi = {"kind": "interval", "a": 0.0, "b": 1.0}
    plain = verify_riesz_local(chi, 2.0, 0.25, SMALL)
    weighted = verify_weighted_riesz_local(chi, 2.0, 0.25, SMALL)
    assert weighted.extra["decay_constant"] == 0.0
    assert weighted.constant == plain.constant and weighted.rows == plain.rows


def test_weighted_riesz_variable_order():
    p = {"kind": "log-decay", "p_inf": 2.0, "amplitude": 0.5}
    alpha = {"kind": "sin-profile", "base": 0.25, "amplitude": 0.1}
    rep = verify_weighted_riesz_local({"kind": "gaussian-sum", "amplitudes": [1.0], "centers": [[0.3]], "widths": [0.5]}, p, alpha, SMALL)
    assert rep.passed and rep.extra["decay_constant"] > 0


@pytest.mark.parametrize("check", ["lemma21", "thm24", "riesz"])
def test_constants_scale_invariant(check):
    g = SMALL.grid()
    f = sample_scalar({"kind": "gaussian-sum", "amplitudes": [1.0, -0.5], "centers": [[0.0], [1.0]], "widths": [0.4, 0.7]}, g)
    run = {
        "lemma21": lambda h: verify_local_embedding(h, 2.0, SMALL),
        "thm24": lambda h: verify_maximal_local(h, 2.0, SMALL)[0],
        "riesz": lambda h: verify_riesz_local(h, 2.0, 0.25, SMALL),
    }[check]
    a, b = run(f), run(f * 7.5)
    assert b.constant == pytest.approx(a.constant, rel=1e-10)
    np.testing.assert_allclose([r[5] for r in b.rows], [r[5] for r in a.rows], rtol=1e-10)


def test_reports_deterministic():
    fam = TestFamily("random-smooth", 3, 5).members(SMALL.grid())
    a = verify_local_embedding(fam, 2.0, SMALL)
    b = verify_local_embedding(fam, 2.0, SMALL)
    assert a.to_dict() == b.to_dict()


def _space(grid, w, theta=2.0, K=32):
    rg = RadiusGrid.log_spaced(grid.h, 8.0, K)
    return MorreySpaceSpec(ExponentField.constant(grid, 2.0), RadialExponent.constant(rg, theta), w, grid.domain, rg)


def test_identity_operator_ratio_one():
    g = SMALL.grid()
    spec = _space(g, RadialWeight.power(0.0))
    rep = estimate_operator_norm("identity", spec, spec, TestFamily("random-smooth", 4, 1))
    assert rep.ratios == [1.0] * 4 and rep.max_ratio == 1.0


def test_maximal_operator_ratio_stable():
    g = SMALL.grid()
    spec = _space(g, RadialWeight.power(0.0))
    rep = estimate_operator_norm("M", spec, spec, TestFamily("ball-indicators", 16, 0), centers=g.sample_centers())
    assert rep.finite and rep.max_ratio >= 1.0
    assert rep.prefix_max(16) <= 1.2 * rep.prefix_max(8)


def test_fractional_order_zero_equals_maximal():
    g = SMALL.grid()
    spec = _space(g, RadialWeight.power(0.0))
    fam = TestFamily("power-bumps", 4, 2)
    a = estimate_operator_norm("M", spec, spec, fam)
    b = estimate_operator_norm("Malpha", spec, spec, fam, alpha=0.0)
    assert a.ratios == b.ratios


def test_zero_member_skipped():
    class WithZero(TestFamily):
        def members(self, grid):
            return [ScalarField(grid, np.zeros(grid.size))] + super().members(grid)

    g = SMALL.grid()
    spec = _space(g, RadialWeight.power(0.0))
    rep = estimate_operator_norm("identity", spec, spec, WithZero("ball-indicators", 2, 0))
    assert rep.skipped == [0] and math.isnan(rep.ratios[0]) and rep.max_ratio == 1.0


def test_operator_errors():
    g = SMALL.grid()
    f = ScalarField(g, np.ones(g.size))
    with pytest.raises(ValueError):
        apply_operator("H", f)
    other = _space(VerifySetup(points=128).grid(), RadialWeight.power(0.0))
    with pytest.raises(ValueError):
        estimate_operator_norm("M", _space(g, RadialWeight.power(0.0)), other, TestFamily())
