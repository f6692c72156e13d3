import math

import numpy as np
import pytest

from conemass.errors import HypothesisViolation
from conemass.geometry import CrossSection, HornMetric, PerturbationBound
from conemass.horn import (
    BoundaryData,
    boundary_from_horn,
    exact_horn_scal_implication,
    herzlich_condition,
    herzlich_condition_3d,
    horn_threshold,
    perturbed_horn_check,
    yamabe_round_sphere,
)

S2 = CrossSection.unit_round_sphere(2)


def test_flat_unit_sphere_is_equality():
    lhs, rhs, ok, margin = herzlich_condition(BoundaryData(2, 4 * math.pi, 2.0, 8 * math.pi), 3)
    assert abs(lhs - rhs) <= 1e-12 and ok


def test_3d_form_examples():
    assert herzlich_condition_3d(BoundaryData(2, 4 * math.pi, 2.0, 0.0)).rhs == pytest.approx(2.0)
    res = herzlich_condition_3d(BoundaryData(2, 16 * math.pi, 1.0, 0.0))
    assert res.rhs == pytest.approx(1.0) and res.satisfied
    with pytest.raises(ValueError):
        herzlich_condition_3d(BoundaryData(3, 1.0, 1.0, 1.0))


def test_failure_has_negative_margin():
    res = herzlich_condition(BoundaryData(2, 4 * math.pi, 3.0, 8 * math.pi), 3)
    assert not res.satisfied and res.margin < 0


def test_negative_yamabe_rejected():
    with pytest.raises(HypothesisViolation):
        herzlich_condition(BoundaryData(2, 1.0, 1.0, -1.0), 3)


def test_horn_level_set_example():
    res = herzlich_condition(boundary_from_horn(HornMetric(3, S2, 1.5), 0.1), 3)
    assert res.lhs == pytest.approx(30.0)
    assert res.rhs == pytest.approx(63.25, abs=5e-3)
    assert res.satisfied


def test_yamabe_round_sphere():
    assert yamabe_round_sphere(2) == pytest.approx(8 * math.pi)
    assert yamabe_round_sphere(3) == pytest.approx(6 * (2 * math.pi**2) ** (2 / 3))
    with pytest.raises(ValueError):
        yamabe_round_sphere(1)


def test_yamabe_quotient_scale_invariant():
    # Scal * Vol^{2/m} is unchanged under g -> c g (Scal/c, Vol c^{m/2})
    m = 4
    for c in (0.5, 3.0):
        scal, vol = m * (m - 1) / c, CrossSection.unit_round_sphere(m).volume * c ** (m / 2)
        assert scal * vol ** (2 / m) == pytest.approx(yamabe_round_sphere(m))


def test_threshold_value_and_bracketing():
    h = HornMetric(3, S2, 1.5)
    t = horn_threshold(h)
    assert t == pytest.approx(4 / 9, abs=1e-9)
    assert herzlich_condition(boundary_from_horn(h, t / 2), 3).margin > 0
    assert herzlich_condition(boundary_from_horn(h, 2 * t), 3).margin < 0


def test_threshold_grows_with_b_for_unit_sphere():
    # the threshold is b^{-1/(b-1)} here, which increases with b
    ts = [horn_threshold(HornMetric(3, S2, b)) for b in (1.2, 1.5, 2.0)]
    assert ts == sorted(ts)
    assert ts[-1] == pytest.approx(0.5)


def test_threshold_undefined_for_cone():
    with pytest.raises(HypothesisViolation):
        horn_threshold(HornMetric(3, S2, 1.0))


def test_cone_over_round_sphere_on_equality_edge():
    for n in range(3, 7):
        h = HornMetric(n, CrossSection.unit_round_sphere(n - 1), 1.0)
        for r in (0.01, 0.3, 5.0):
            res = herzlich_condition(boundary_from_horn(h, r), n)
            assert abs(res.lhs - res.rhs) <= 1e-12 * res.rhs


def test_perturbed_reduces_to_exact():
    h = HornMetric(3, S2, 1.5)
    res = perturbed_horn_check(h, PerturbationBound(0.5, (0.0, 0.0, 0.0)), 0.1)
    exact = herzlich_condition(boundary_from_horn(h, 0.1), 3)
    assert res.lhs == exact.lhs and res.rhs == pytest.approx(exact.rhs)
    assert res.threshold == pytest.approx(4 / 9, rel=1e-10)


def test_perturbed_threshold_positive_and_monotone():
    h = HornMetric(3, S2, 1.5)
    t1 = perturbed_horn_check(h, PerturbationBound(0.5, (1.0, 1.0, 1.0)), 0.01).threshold
    t2 = perturbed_horn_check(h, PerturbationBound(0.5, (2.0, 2.0, 2.0)), 0.01).threshold
    assert 0 < t2 < t1 < 4 / 9
    assert perturbed_horn_check(h, PerturbationBound(0.5, (1.0, 1.0, 1.0)), 0.9 * t1).satisfied
    assert not perturbed_horn_check(h, PerturbationBound(0.5, (1.0, 1.0, 1.0)), 1.1 * t1).satisfied


def test_scal_implication_examples():
    rep = exact_horn_scal_implication(HornMetric(3, S2, 2.0))
    assert rep.upper == pytest.approx(math.sqrt(1 / 8)) and not rep.empty
    flat = CrossSection(2, 0.0, 1.0)
    assert exact_horn_scal_implication(HornMetric(3, flat, 2.0)).empty
    with pytest.raises(HypothesisViolation):
        exact_horn_scal_implication(HornMetric(3, S2, 1.0))


def test_scal_interval_consistent_with_curvature():
    from conemass.geometry import horn_scalar_curvature

    h = HornMetric(4, CrossSection.unit_round_sphere(3), 1.5)
    rep = exact_horn_scal_implication(h)
    assert horn_scalar_curvature(h, 0.5 * rep.upper) > 0
    assert horn_scalar_curvature(h, 2.0 * rep.upper) < 0
    assert horn_scalar_curvature(h, rep.upper) == pytest.approx(0.0, abs=1e-9)


def test_general_and_3d_forms_agree():
    rng = np.random.default_rng(0)
    for _ in range(100):
        bd = BoundaryData(2, float(rng.uniform(0.1, 50)), float(rng.uniform(0, 3)), 8 * math.pi)
        assert herzlich_condition(bd, 3).rhs == pytest.approx(herzlich_condition_3d(bd).rhs, rel=1e-13)
