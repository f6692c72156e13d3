import math

import numpy as np
import pytest

from conemass.errors import NumericalError, UnsupportedError
from conemass.numerics import (
    Grid1D,
    PanelQuadrature,
    central_difference,
    integrate_1d,
    powerlaw_fit,
    richardson_extrapolate,
    second_difference,
    sphere_quadrature,
    sphere_volume,
)


def test_sphere_volume_low_dimensions():
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    assert sphere_volume(3) == pytest.approx(2 * math.pi**2)


@pytest.mark.parametrize("m", range(1, 7))
def test_sphere_quadrature_weights_sum_to_volume(m):
    q = sphere_quadrature(m, 6)
    assert q.weights.sum() == pytest.approx(sphere_volume(m), rel=1e-13)
    assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0)


def test_sphere_quadrature_integrates_quadratic_moments():
    # int_{S^2} x_i^2 = 4 pi / 3
    q = sphere_quadrature(2, 8)
    for i in range(3):
        assert q.integrate(q.nodes[:, i] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-13)


def test_sphere_quadrature_scaled_area():
    x, w = sphere_quadrature(2, 6).scaled(3.0)
    assert np.allclose(np.linalg.norm(x, axis=1), 3.0)
    assert w.sum() == pytest.approx(36 * math.pi)


def test_sphere_quadrature_limits():
    with pytest.raises(UnsupportedError):
        sphere_quadrature(7, 6)
    with pytest.raises(ValueError):
        sphere_quadrature(2, 3)


def test_integrate_1d_polynomial_exact():
    g = Grid1D.uniform(0.0, 2.0, 3)
    assert integrate_1d(lambda x: x**3, g) == pytest.approx(4.0, abs=1e-14)
    assert integrate_1d(np.exp, Grid1D.uniform(0.0, 1.0, 5), points=8) == pytest.approx(math.e - 1, abs=1e-15)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_integrate_1d_names_bad_node():
    with pytest.raises(NumericalError, match="node"):
        integrate_1d(lambda x: 1.0 / (x - x[0]), Grid1D.uniform(0.0, 1.0, 3))


def test_log_grid_cumulative_and_derivative():
    # interior values come from the panel interpolant, so accuracy is below the Gauss order
    q = PanelQuadrature(Grid1D.log_uniform(1e-3, 1.0, 25), 8)
    f = q.x**2.5
    cum = q.cumulative(f)
    assert np.allclose(cum, (q.x**3.5 - 1e-3**3.5) / 3.5, rtol=1e-8, atol=0)
    assert np.allclose(q.derivative(f), 2.5 * q.x**1.5, rtol=1e-7)
    assert q.integrate(f) == pytest.approx((1 - 1e-3**3.5) / 3.5, rel=1e-14)


def test_richardson_recovers_limit_exactly_for_model_data():
    samples = [(R, 3.0 + 5.0 / R**1.5) for R in (10.0, 20.0, 40.0, 80.0)]
    lim, err = richardson_extrapolate(samples, 1.5)
    assert lim == pytest.approx(3.0, abs=1e-12)
    assert err < 1e-12


def test_richardson_rejects_short_or_unsorted():
    with pytest.raises(ValueError):
        richardson_extrapolate([(1.0, 1.0), (2.0, 1.0)], 1.0)
    with pytest.raises(ValueError):
        richardson_extrapolate([(2.0, 1.0), (1.0, 1.0), (3.0, 1.0)], 1.0)


def test_finite_differences_fourth_order():
    assert central_difference(np.sin, 0.3, 1.0, 1e-3) == pytest.approx(math.cos(0.3), abs=1e-12)
    assert second_difference(np.sin, 0.3, 1.0, 1e-3) == pytest.approx(-math.sin(0.3), abs=1e-8)
    grad = central_difference(lambda x: x[..., 0] * x[..., 1], np.array([[2.0, 3.0]]), np.array([0.0, 1.0]), 1e-2)
    assert grad[0] == pytest.approx(2.0)


def test_powerlaw_fit_window():
    x = np.geomspace(1e-4, 1.0, 50)
    samples = list(zip(x, 2.0 * x**1.25 * (1 + x)))
    e, c, res = powerlaw_fit(samples, (1e-4, 1e-3))
    assert e == pytest.approx(1.25, abs=1e-3)
    assert c == pytest.approx(2.0, rel=1e-2)
    with pytest.raises(ValueError):
        powerlaw_fit([(1.0, -1.0), (2.0, 1.0)])
