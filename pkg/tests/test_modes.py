import math

import numpy as np
import pytest

from conemass.errors import DivergentIntegralError, HypothesisViolation, NumericalError
from conemass.modes import (
    LogMode,
    PowerSum,
    RadialMode,
    contraction_radius,
    decay_jump_fit,
    dirac_mode_apply,
    dirac_mode_solve,
    green_mode,
    log_transform,
    modes_to_csv,
    perturbed_harmonic_mode,
)
from conemass.spectral import sphere_spectrum

R = np.geomspace(1e-3, 1.0, 60)


def test_powersum_merges_and_drops_zeros():
    p = PowerSum(((1.0, 2.0), (2.0, 2.0), (0.0, 1.0), (-1.0, 0.5)))
    assert p.terms == ((-1.0, 0.5), (3.0, 2.0))
    assert (p - p).is_zero()
    assert p.derivative().terms == ((-0.5, -0.5), (6.0, 1.0))
    assert p.add(PowerSum(((-3.0 + 1e-17, 2.0),)), cancel_tol=1e-12).terms == ((-1.0, 0.5),)


def test_apply_homogeneous_is_zero():
    u = RadialMode.homogeneous(-1.0, 3)
    assert dirac_mode_apply(u).terms.is_zero()


def test_apply_power():
    # u = r^mu gives v = (mu - nu) r^(mu-1)
    u = RadialMode.power(1.0, 3, 1.0, 0.5)
    v = dirac_mode_apply(u)
    assert v.terms.terms == ((0.5 - (-2.0), -0.5),)


def test_apply_callable_and_samples_match_closed_form():
    u = RadialMode.from_terms(0.5, 4, [(1.0, 1.0), (2.0, 2.5)], interval=(0.01, 1.0))
    exact = dirac_mode_apply(u)
    f = RadialMode(0.5, 4, (0.01, 1.0), func=u.terms)
    r = np.linspace(0.1, 0.9, 9)
    assert np.allclose(dirac_mode_apply(f)(r), exact(r), rtol=1e-9)
    nodes = np.geomspace(0.01, 1.0, 400)
    s = RadialMode.from_samples(0.5, 4, nodes, u(nodes))
    vs = dirac_mode_apply(s)
    assert np.allclose(vs.values, exact(nodes), rtol=1e-6)


def test_solve_homogeneous_datum():
    v = RadialMode(1.0, 3, (0.0, 1.0), terms=PowerSum())
    u = dirac_mode_solve(1.0, 3, v, (1.0, 2.5))
    assert np.allclose(u(R), 2.5 * R**-2.0)


def test_solve_particular_power():
    lam, n, mu = -1.0, 3, 1.5  # nu = 0
    v = RadialMode.power(lam, n, 1.0, mu)
    u = dirac_mode_solve(lam, n, v, (1.0, 1.0 / (mu + 1)))
    assert np.allclose(u(R), R ** (mu + 1) / (mu + 1), rtol=1e-14)


def test_solve_resonant_source_gives_log():
    lam, n = -1.0, 3  # nu = 0, source r^-1 is resonant
    v = RadialMode.power(lam, n, 1.0, -1.0, interval=(0.01, 1.0))
    u = dirac_mode_solve(lam, n, v, (1.0, 0.0))
    assert u.meta.get("log_resonance")
    r = np.linspace(0.05, 1, 7)
    assert np.allclose(u(r), np.log(r))


def test_solve_numeric_source_matches_closed_form():
    lam, n = 0.5, 3
    v_exact = RadialMode.from_terms(lam, n, [(1.0, 0.3), (-2.0, 1.0)], interval=(0.01, 1.0))
    v_num = RadialMode(lam, n, (0.01, 1.0), func=v_exact.terms)
    a = dirac_mode_solve(lam, n, v_exact, (0.5, 1.0))
    b = dirac_mode_solve(lam, n, v_num, (0.5, 1.0))
    r = np.geomspace(0.01, 1.0, 30)
    assert np.allclose(b(r), a(r), rtol=1e-12, atol=1e-14)


def test_green_zero_source():
    v = RadialMode(-1.0, 3, (0.0, 0.4), terms=PowerSum())
    g = green_mode(-1.0, 3, -0.5, 0.2, v)
    assert g.mode.terms.is_zero()
    assert g.u_norm == 0.0


def test_green_dirichlet_closed_form():
    lam, n, r0, mu = -1.0, 3, 0.2, 2.0  # nu = 0, delta < nu
    v = RadialMode.power(lam, n, 1.0, mu, interval=(0.0, 2 * r0))
    g = green_mode(lam, n, -0.5, r0, v)
    assert g.representative == "outer-dirichlet"
    expected = (R ** (mu + 1) - (2 * r0) ** (mu + 1)) / (mu + 1)
    assert np.allclose(g.mode(R), expected, atol=1e-15)
    assert abs(g.mode(2 * r0)) <= 1e-15
    assert g.constant == pytest.approx(2.0)
    assert g.estimate_holds


def test_green_tip_branch_for_weight_above_root():
    lam, n, r0 = -1.0, 3, 0.2
    v = RadialMode.power(lam, n, 1.0, 2.0, interval=(0.0, 2 * r0))
    g = green_mode(lam, n, 0.5, r0, v)
    assert g.representative == "tip-decaying"
    assert np.allclose(g.mode(R), R**3 / 3)
    assert g.estimate_holds


def test_green_numeric_source_matches_closed_form():
    lam, n, r0 = 1.0, 3, 0.25
    terms = PowerSum(((1.0, 0.0), (0.5, 1.5)))
    for delta in (-2.5, -1.0):
        exact = green_mode(lam, n, delta, r0, RadialMode(lam, n, (0.0, 0.5), terms=terms))
        num = green_mode(lam, n, delta, r0, RadialMode(lam, n, (0.0, 0.5), func=terms), compute_norms=False)
        r = np.geomspace(1e-3, 0.5, 20)
        assert np.allclose(num.mode(r), exact.mode(r), rtol=1e-10, atol=1e-13)


def test_green_critical_weight_rejected():
    v = RadialMode.power(-1.0, 3, 1.0, 1.0, interval=(0.0, 0.4))
    with pytest.raises(HypothesisViolation, match="critical"):
        green_mode(-1.0, 3, 0.0, 0.2, v)


def test_green_divergent_source():
    v = RadialMode.power(-1.0, 3, 1.0, -1.5, interval=(0.0, 0.4))
    with pytest.raises((DivergentIntegralError, HypothesisViolation)):
        green_mode(-1.0, 3, 0.5, 0.2, v)
    try:
        green_mode(-1.0, 3, 0.5, 0.2, v, compute_norms=False)
    except DivergentIntegralError as exc:
        assert exc.exponent == pytest.approx(-1.5)


def test_decay_jump_examples():
    spec = sphere_spectrum(3, 10)
    lam, n, r0 = -1.0, 3, 0.5
    only_tail = RadialMode.from_terms(lam, n, [(1.0, 0.6)], interval=(0.0, 1.0))
    fit = decay_jump_fit(only_tail, -0.5, 0.5, spec, n, r0)
    assert abs(fit.coefficients[0.0]) <= 1e-6
    pure = RadialMode.homogeneous(lam, n, (0.0, 1.0))
    fit = decay_jump_fit(pure, -0.5, 0.5, spec, n, r0)
    assert fit.coefficients[0.0] == pytest.approx(1.0, abs=1e-12)
    assert fit.remainder.terms.is_zero()


def test_decay_jump_rejects_close_roots():
    from conemass.spectral import DiracSpectrum

    spec = DiracSpectrum((-1.0, -1.0 - 1e-8))
    u = RadialMode.homogeneous(-1.0, 3, (0.0, 1.0))
    with pytest.raises(NumericalError):
        decay_jump_fit(u, -0.5, 0.5, spec, 3, 0.5)


def test_perturbed_zero_is_exact():
    pm = perturbed_harmonic_mode(2.0, 4, 0.1)
    assert np.array_equal(pm.mode.values, pm.mode.nodes ** (-3.5))


def test_perturbed_matches_exponential_oracle():
    lam, n, C, alpha, r0 = 0.0, 3, 1.0, 1.0, 0.2
    pm = perturbed_harmonic_mode(lam, n, r0, eps=lambda r: C * r ** (alpha - 1), C=C, alpha=alpha)
    r = pm.mode.nodes
    exact = r**-1.0 * np.exp(-C * r**alpha / alpha)
    assert np.max(np.abs(pm.mode.values / exact - 1)) < 1e-12
    assert pm.residual < 1e-8
    slope, _, _ = pm.correction_exponent()
    assert slope == pytest.approx(-1.0 + alpha, abs=0.01)


def test_perturbed_contraction_error_and_scaling():
    with pytest.raises(HypothesisViolation, match="shrink r0"):
        perturbed_harmonic_mode(-1.0, 3, 1.0, eps=lambda r: r**-0.5, C=1.0, alpha=0.5)
    # alpha = 1: doubling C halves the admissible radius
    assert contraction_radius(2.0, 1.0) == pytest.approx(contraction_radius(1.0, 1.0) / 2)


def test_log_transform_power_and_constant():
    lam, n = -0.5, 3
    u = RadialMode.power(lam, n, 1.0, 1.3, interval=(1e-3, 1.0))
    lt = log_transform(u)
    s = np.linspace(-6, 0, 13)
    assert np.allclose(lt(s), np.exp(1.3 * s), rtol=1e-12)
    assert np.allclose(lt.source(s), lt.derivative(s) + lt.rate * lt(s), rtol=1e-10)
    const = log_transform(RadialMode.power(lam, n, 2.0, 0.0, interval=(1e-3, 1.0)))
    assert np.allclose(const.source(s), lt.rate * 2.0)
    back = lt.to_radial()
    r = np.geomspace(1e-3, 1, 9)
    assert np.allclose(back(r), u(r), rtol=1e-12)
    with pytest.raises(ValueError):
        log_transform(RadialMode.power(lam, n, 1.0, 1.0, interval=(0.1, 2.0)))


def test_log_mode_rejects_positive_s():
    with pytest.raises(ValueError):
        LogMode(0.0, 3, (-1.0, 0.5), np.exp)


def test_flip_pairing_product():
    for n in range(3, 7):
        for lam in sphere_spectrum(n, 3).eigenvalues:
            a = RadialMode.homogeneous(lam, n)
            b = RadialMode.homogeneous(-lam, n)
            assert a.nu + b.nu == 1 - n
            assert np.allclose(a(R) * b(R), R ** (1.0 - n), rtol=1e-12)


def test_csv_output():
    text = modes_to_csv(np.array([1.0, 2.0]), np.array([3.0, 4.0]), np.array([5.0, 6.0]))
    assert text.splitlines() == ["r,u,v", "1.0,3.0,5.0", "2.0,4.0,6.0"]
