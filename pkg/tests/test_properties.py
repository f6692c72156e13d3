"""Property-based checks of the invariants of each module."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conemass.geometry import ConeMetric, CrossSection, HornMetric, cone_scalar_curvature, horn_area, horn_mean_curvature, horn_scalar_curvature
from conemass.horn import BoundaryData, herzlich_condition, herzlich_condition_3d
from conemass.modes import PowerSum, RadialMode, dirac_mode_apply, dirac_mode_solve, green_mode
from conemass.spectral import DiracSpectrum, is_critical_at_cone, noncritical_window, nu_exponent, spectrum_flip
from conemass.weighted import WeightedNormSpec, is_member, weighted_norm

finite = dict(allow_nan=False, allow_infinity=False)
dims = st.integers(min_value=3, max_value=8)
lams = st.floats(-6, 6, **finite)
radius = st.floats(1e-3, 10.0, **finite)


@given(dims, lams)
def test_flip_pairs_indicial_roots(n, lam):
    assert math.isclose(nu_exponent(lam, n) + nu_exponent(-lam, n), 1 - n, abs_tol=1e-12)


@given(st.lists(st.floats(-8, 8, **finite), min_size=1, max_size=12), dims)
def test_flip_is_involution(ev, n):
    s = DiracSpectrum(tuple(ev))
    assert spectrum_flip(spectrum_flip(s)) == s


@given(st.lists(st.floats(-5, 5, **finite), min_size=1, max_size=8), dims, st.floats(-8, 8, **finite))
def test_windows_avoid_critical_weights(ev, n, w):
    s = DiracSpectrum(tuple(ev))
    for a, b in noncritical_window(s, n, (-8.0, 8.0)):
        mid = 0.5 * (a + b)
        assert not is_critical_at_cone(mid, s, n)


@given(dims, st.floats(0.2, 4.0, **finite), radius)
def test_log_area_derivative_is_mean_curvature(n, b, r):
    h = HornMetric(n, CrossSection(n - 1, 1.0, 2.0), b)
    step = 1e-4 * r
    d = (math.log(horn_area(h, r + step)) - math.log(horn_area(h, r - step))) / (2 * step)
    assert math.isclose(d, horn_mean_curvature(h, r), rel_tol=1e-6)


@given(dims, st.floats(-5, 30, **finite), radius)
def test_b_one_horn_is_cone(n, scal, r):
    cs = CrossSection(n - 1, scal, 3.0)
    assert horn_scalar_curvature(HornMetric(n, cs, 1.0), r) == cone_scalar_curvature(ConeMetric(n, cs), r)


@given(st.floats(1e-3, 1e3, **finite), st.floats(-10, 10, **finite))
def test_3d_herzlich_matches_general(area, H):
    bd = BoundaryData(2, area, H, 8 * math.pi)
    g, s = herzlich_condition(bd, 3), herzlich_condition_3d(bd)
    assert math.isclose(g.rhs, s.rhs, rel_tol=1e-12)


@given(st.floats(-3, 3, **finite), st.floats(-3, 3, **finite), st.floats(0.1, 5, **finite))
def test_norm_homogeneity(nu, delta, a):
    u = RadialMode.power(0.0, 3, 1.0, nu)
    spec = WeightedNormSpec(delta=delta)
    base = weighted_norm(u, spec)
    scaled = weighted_norm(RadialMode.power(0.0, 3, a, nu), spec)
    if math.isinf(base):
        assert math.isinf(scaled)
    else:
        assert math.isclose(scaled, a**2 * base, rel_tol=1e-12)


@given(st.floats(-3, 3, **finite), st.floats(-3, 3, **finite))
def test_membership_matches_norm_finiteness(nu, eta):
    if abs(nu - eta) < 1e-9:
        return
    u = RadialMode.power(0.0, 3, 1.0, nu)
    finite_norm = math.isfinite(weighted_norm(u, WeightedNormSpec(k=1, delta=eta)))
    assert finite_norm == is_member(nu, eta)


@given(st.floats(-3, 3, **finite), st.floats(0, 2, **finite), st.floats(-3, 3, **finite))
def test_weight_monotonicity(nu, gap, delta):
    # finite at a larger weight implies finite at a smaller one
    u = RadialMode.power(0.0, 3, 1.0, nu)
    if math.isfinite(weighted_norm(u, WeightedNormSpec(delta=delta + gap))):
        assert math.isfinite(weighted_norm(u, WeightedNormSpec(delta=delta)))


@given(
    dims,
    st.integers(-3, 3),
    st.lists(st.floats(-2, 2, **finite), min_size=1, max_size=5),
    st.floats(0.1, 1.0, **finite),
)
def test_solve_is_right_inverse(n, k, coeffs, r1):
    lam = math.copysign((n - 1) / 2 + abs(k), k if k else 1)
    u = RadialMode.from_terms(lam, n, PowerSum.polynomial(coeffs))
    back = dirac_mode_solve(lam, n, dirac_mode_apply(u), (r1, float(u(r1))))
    r = np.linspace(0.05, 1.0, 40)
    assert np.max(np.abs(back(r) - u(r))) <= 1e-8 * max(1.0, float(np.max(np.abs(u(r)))))


@settings(max_examples=60)
@given(
    st.sampled_from([-3.0, -2.0, -1.0, 1.0, 2.0]),
    st.floats(0.05, 2.5, **finite),
    st.booleans(),
    st.lists(st.tuples(st.floats(-2, 2, **finite), st.floats(0.05, 3.0, **finite)), min_size=1, max_size=3),
    st.floats(0.1, 0.5, **finite),
)
def test_green_estimate(lam, gap, above, terms, r0):
    n = 3
    nu = nu_exponent(lam, n)
    delta = nu + gap if above else nu - gap
    src = PowerSum(tuple((c, delta - 1 + e) for c, e in terms))
    g = green_mode(lam, n, delta, r0, RadialMode(lam, n, (0.0, 2 * r0), terms=src))
    assert g.estimate_holds
