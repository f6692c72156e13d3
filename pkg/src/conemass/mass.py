"""ADM mass from coordinate flux integrals, Schwarzschild charts, and the horn expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import HypothesisViolation, NumericalError
from .geometry import MetricChart
from .numerics import (
    Grid1D,
    SphereQuadrature,
    central_difference,
    integrate_1d,
    powerlaw_fit,
    richardson_extrapolate,
    sphere_quadrature,
    sphere_volume,
)

__all__ = [
    "MassResult",
    "adm_flux",
    "adm_mass",
    "conformal_scalar_curvature",
    "horn_expansion_fit",
    "normalization_constant",
    "schwarzschild_chart",
]

NORMALIZATIONS = ("standard", "omega")


def normalization_constant(n: int, normalization: str = "standard", omega: str = "sphere") -> float:
    """Factor multiplying the raw flux.

    ``standard`` is 1 / (2 (n-1) Vol(S^{n-1})). ``omega`` is 1 / omega_n where
    omega_n is Vol(S^{n-1}) (``omega="sphere"``) or Vol(B^n) (``omega="ball"``).
    """
    area = sphere_volume(n - 1)
    if normalization == "standard":
        return 1.0 / (2.0 * (n - 1) * area)
    if normalization == "omega":
        if omega == "sphere":
            return 1.0 / area
        if omega == "ball":
            return n / area
        raise ValueError(f"unknown omega convention {omega!r}")
    raise ValueError(f"unknown normalization {normalization!r}")


def adm_flux(
    chart: MetricChart,
    R: float,
    quad: Optional[SphereQuadrature] = None,
    fd_step: Optional[float] = None,
) -> float:
    """Raw flux of (d_i g_ji - d_j g_ii) through the coordinate sphere of radius R.

    Partial derivatives use the fourth-order central stencil with step
    ``fd_step`` (default ``1e-4 R``). No normalisation is applied.
    """
    n = chart.n
    if not chart.contains(R):
        raise ValueError(f"R={R} is outside the chart region {chart.region}")
    if quad is None:
        quad = sphere_quadrature(n - 1, 12)
    if quad.dimension != n - 1:
        raise ValueError("sphere quadrature dimension must be n-1")
    h = 1e-4 * R if fd_step is None else fd_step
    if not 0 < h < R:
        raise ValueError("fd_step must satisfy 0 < fd_step < R")
    x, w = quad.scaled(R)
    g = chart(x)
    eig = np.linalg.eigvalsh(g)
    if np.any(eig <= 0):
        node = x[np.argmin(eig.min(axis=1))]
        raise HypothesisViolation(f"metric is not positive definite at {node.tolist()}")
    eye = np.eye(n)
    # dg[k] = d_k g, shape (n, N, n, n)
    dg = np.stack([central_difference(chart, x, eye[k], h) for k in range(n)])
    # div_j = sum_i d_i g_ji ; grad_trace_j = d_j sum_i g_ii
    div = np.einsum("inji->nj", dg)
    grad_trace = np.einsum("jnii->nj", dg)
    normal = x / R
    integrand = np.einsum("nj,nj->n", div - grad_trace, normal)
    return float(np.dot(integrand, w))


@dataclass
class MassResult:
    raw_flux: list[tuple[float, float]]
    limit: float
    fit_error: float
    normalization: str
    n: int
    omega: str = "sphere"
    model_exponent: float = 1.0
    limits: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        c = normalization_constant(self.n, self.normalization, self.omega)
        return {
            "raw_flux": [[R, v] for R, v in self.raw_flux],
            "normalized_flux": [[R, c * v] for R, v in self.raw_flux],
            "limit": self.limit,
            "fit_error": self.fit_error,
            "normalization": self.normalization,
            "omega": self.omega,
            "model_exponent": self.model_exponent,
            "limits": dict(self.limits),
        }

    def csv_rows(self) -> list[tuple[float, float, float]]:
        c = normalization_constant(self.n, self.normalization, self.omega)
        return [(R, v, c * v) for R, v in self.raw_flux]


def adm_mass(
    chart: MetricChart,
    radii: Sequence[float] = (20.0, 40.0, 80.0),
    normalization: str = "standard",
    resolution: int = 12,
    fd_rel_step: float = 1e-4,
    omega: str = "sphere",
    model_exponent: Optional[float] = None,
) -> MassResult:
    """Extrapolate the normalised flux to R -> infinity.

    The extrapolation model is ``limit + a R^-p`` with ``p`` the chart's decay
    order (``1`` for charts with no declared finite order). ``limits`` in the
    result holds the extrapolated value under both normalisations.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    radii = sorted(float(R) for R in radii)
    if len(radii) < 3:
        raise ValueError("need at least 3 radii")
    quad = sphere_quadrature(chart.n - 1, resolution)
    flux = [(R, adm_flux(chart, R, quad, fd_rel_step * R)) for R in radii]
    if model_exponent is None:
        model_exponent = chart.tau if math.isfinite(chart.tau) else 1.0
    raw_limit, raw_err = richardson_extrapolate(flux, model_exponent)
    limits = {
        "standard": raw_limit * normalization_constant(chart.n, "standard"),
        "omega": raw_limit * normalization_constant(chart.n, "omega", omega),
    }
    c = normalization_constant(chart.n, normalization, omega)
    return MassResult(
        raw_flux=flux,
        limit=raw_limit * c,
        fit_error=raw_err * abs(c),
        normalization=normalization,
        n=chart.n,
        omega=omega,
        model_exponent=model_exponent,
        limits=limits,
    )


def schwarzschild_chart(m: float, sign: str = "positive", n: int = 3) -> MetricChart:
    """Conformally flat Schwarzschild data on R^3.

    ``positive``: u = 1 + m / (2 rho), valid for rho > 0.
    ``negative``: u = 1 - 2m / rho, i.e. g = (1 - 2m/rho)^4 delta, valid for rho > 2m.
    """
    if not m > 0:
        raise ValueError("m must be positive")
    if n != 3:
        raise ValueError("Schwarzschild charts are provided for n = 3")
    if sign == "positive":
        def factor(x):
            return 1.0 + m / (2.0 * np.linalg.norm(x, axis=-1))

        region = (0.0, math.inf)
    elif sign == "negative":
        def factor(x):
            return 1.0 - 2.0 * m / np.linalg.norm(x, axis=-1)

        region = (2.0 * m, math.inf)
    else:
        raise ValueError(f"unknown Schwarzschild family {sign!r}")
    return MetricChart.conformally_flat(n, factor, tau=1.0, region=region, name=f"schwarzschild-{sign}")


def conformal_scalar_curvature(chart: MetricChart, x: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """Scalar curvature of u^{4/(n-2)} delta from -4(n-1)/(n-2) u^{-(n+2)/(n-2)} Laplacian(u)."""
    if chart.conformal_factor is None:
        raise ValueError("chart has no conformal factor")
    n = chart.n
    x = np.atleast_2d(np.asarray(x, dtype=float))
    h = 1e-3 * np.linalg.norm(x, axis=-1, keepdims=True) if step is None else step
    u = np.asarray(chart.conformal_factor(x), dtype=float)
    eye = np.eye(n)
    lap = np.zeros(x.shape[0])
    for k in range(n):
        lap = lap + _second(chart.conformal_factor, x, eye[k], h)
    return -4.0 * (n - 1) / (n - 2) * u ** (-(n + 2) / (n - 2)) * lap


def _second(f, x, e, h):
    # per-point step sizes; the scalar helper in numerics takes one step only
    vals = [np.asarray(f(x + k * h * e), dtype=float) for k in (-2, -1, 0, 1, 2)]
    fm2, fm1, f0, fp1, fp2 = vals
    hh = np.ravel(h) if np.ndim(h) else h
    return (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * hh**2)


def tortoise_distance(m: float, r: float, points: int = 8) -> float:
    """sigma(r) = int_{2m}^r (1 - 2m/rho)^2 d rho, by Gauss-Legendre panels."""
    if r <= 2 * m:
        return 0.0
    grid = Grid1D.uniform(2 * m, r, 5)
    return integrate_1d(lambda rho: (1.0 - 2.0 * m / rho) ** 2, grid, points)


def horn_expansion_fit(
    m: float,
    sigma_window: Optional[tuple[float, float]] = None,
    samples: int = 40,
    residual_threshold: float = 1e-2,
) -> tuple[float, float, float]:
    """Fit warp ~ c sigma^e for (1 - 2m/r)^4 (dr^2 + r^2 h_0) written as d sigma^2 + warp h_0.

    ``sigma_window`` is in absolute units and defaults to ``[1e-6, 1e-4] * m``.
    Returns ``(exponent, c, max log-residual)``.
    """
    if not m > 0:
        raise ValueError("m must be positive")
    if sigma_window is None:
        sigma_window = (1e-6 * m, 1e-4 * m)
    lo, hi = sigma_window
    if not (0 < lo < hi <= 0.01 * m):
        raise ValueError("sigma window must lie in (0, 0.01 m)")
    pts = []
    for sigma in np.geomspace(lo, hi, samples):
        guess = (12.0 * m * m * sigma) ** (1.0 / 3.0)
        r = brentq(lambda rr: tortoise_distance(m, rr) - sigma, 2 * m, 2 * m + 4 * guess, xtol=1e-18 * m, rtol=1e-15)
        x = r - 2 * m
        warp = (x / r) ** 4 * r * r
        pts.append((tortoise_distance(m, r), warp))
    exponent, c, resid = powerlaw_fit(pts)
    if resid > residual_threshold:
        raise NumericalError(f"power-law residual {resid:.3g} exceeds {residual_threshold}; window is not near the horizon")
    return exponent, c, resid
