"""Numerical kernels: 1-D panel quadrature, sphere quadrature, finite differences, fits.

Everything here is deterministic and free of global state. Functions that take
an integrand expect it to be vectorised over numpy arrays; scalar-only callables
are detected and evaluated node by node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy.special import gammaln, roots_jacobi

from .errors import NumericalError, UnsupportedError

__all__ = [
    "Grid1D",
    "PanelQuadrature",
    "SphereQuadrature",
    "central_difference",
    "integrate_1d",
    "powerlaw_fit",
    "richardson_extrapolate",
    "second_difference",
    "sphere_quadrature",
    "sphere_volume",
]

MAX_SPHERE_DIM = 6


def sphere_volume(m: int) -> float:
    """Volume of the unit round sphere S^m in R^{m+1}."""
    if m < 0:
        raise ValueError("sphere dimension must be nonnegative")
    return float(2.0 * math.exp((m + 1) / 2 * math.log(math.pi) - gammaln((m + 1) / 2)))


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array of nodes, falling back to a loop for scalar callables."""
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape != x.shape:
            raise ValueError
    except (TypeError, ValueError):
        y = np.array([float(f(xi)) for xi in x.ravel()]).reshape(x.shape)
    bad = ~np.isfinite(y)
    if bad.any():
        node = x.ravel()[np.argmax(bad.ravel())]
        raise NumericalError(f"integrand is not finite at node x={node!r}")
    return y


@dataclass(frozen=True)
class Grid1D:
    """Strictly increasing breakpoints, either uniform or log-uniform.

    Panels of a quadrature are the intervals between consecutive nodes. For a
    log-uniform grid the panels are mapped through ``t = log x`` so that power
    laws become exponentials, which Gauss rules integrate far more accurately.
    """

    nodes: np.ndarray
    kind: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a grid needs at least 2 nodes")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("grid nodes must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.kind not in ("uniform", "log-uniform"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.kind == "log-uniform" and nodes[0] <= 0:
            raise ValueError("log-uniform grids require positive nodes")

    @classmethod
    def uniform(cls, a: float, b: float, num: int) -> "Grid1D":
        return cls(np.linspace(a, b, num), "uniform")

    @classmethod
    def log_uniform(cls, a: float, b: float, num: int) -> "Grid1D":
        if a <= 0:
            raise ValueError("log-uniform grids require a > 0")
        return cls(np.geomspace(a, b, num), "log-uniform")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    def panel_coordinates(self) -> np.ndarray:
        """Breakpoints in the integration variable (x or log x)."""
        return np.log(self.nodes) if self.kind == "log-uniform" else self.nodes

    def to_x(self, t: np.ndarray) -> np.ndarray:
        return np.exp(t) if self.kind == "log-uniform" else t

    def jacobian(self, t: np.ndarray) -> np.ndarray:
        return np.exp(t) if self.kind == "log-uniform" else np.ones_like(t)


@lru_cache(maxsize=None)
def _reference_rule(points: int):
    """Gauss-Legendre nodes/weights on [-1, 1] plus cumulative-integration and
    differentiation matrices of the interpolant through those nodes."""
    xi, w = legendre.leggauss(points)
    vander = legendre.legvander(xi, points - 1)
    coeffs = np.linalg.inv(vander)  # column j: Legendre coefficients of the j-th Lagrange basis polynomial
    cumulative = np.empty((points, points))
    derivative = np.empty((points, points))
    end = np.empty(points)
    for j in range(points):
        antider = legendre.legint(coeffs[:, j], lbnd=-1.0)
        cumulative[:, j] = legendre.legval(xi, antider)
        end[j] = legendre.legval(1.0, antider)
        derivative[:, j] = legendre.legval(xi, legendre.legder(coeffs[:, j]))
    return xi, w, cumulative, derivative, end


class PanelQuadrature:
    """Composite Gauss-Legendre rule over the panels of a :class:`Grid1D`.

    Besides plain integration, the rule supports cumulative integration from
    the left end to every quadrature node and spectral differentiation, both
    via the degree ``points-1`` interpolant on each panel. A rule with ``p``
    points per panel has order ``2p`` for integration.
    """

    def __init__(self, grid: Grid1D, points: int = 8):
        if points < 2:
            raise ValueError("at least 2 points per panel are required")
        self.grid = grid
        self.points = points
        xi, w, cum, der, end = _reference_rule(points)
        t_edges = grid.panel_coordinates()
        lo, hi = t_edges[:-1], t_edges[1:]
        half = 0.5 * (hi - lo)
        t = (lo[:, None] + half[:, None] * (xi[None, :] + 1.0))
        self._half = half
        self._cum = cum
        self._der = der
        self._end = end
        self.t = t
        self.x = grid.to_x(t)
        self.jac = grid.jacobian(t)
        self.weights = half[:, None] * w[None, :] * self.jac

    @property
    def nodes(self) -> np.ndarray:
        return self.x.ravel()

    def sample(self, f: Callable) -> np.ndarray:
        return _evaluate(f, self.x)

    def integrate(self, values: np.ndarray) -> float:
        values = np.asarray(values, dtype=float).reshape(self.x.shape)
        # panel sums first, then panels in order: fixed summation order
        return float(np.sum(np.sum(values * self.weights, axis=1)))

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """Integral from the grid's left end to every node, same shape as ``self.x``."""
        g = np.asarray(values, dtype=float).reshape(self.x.shape) * self.jac
        within = (g @ self._cum.T) * self._half[:, None]
        panel_totals = (g @ self._end) * self._half
        offsets = np.concatenate(([0.0], np.cumsum(panel_totals)[:-1]))
        return within + offsets[:, None]

    def panel_integrals(self, values: np.ndarray) -> np.ndarray:
        g = np.asarray(values, dtype=float).reshape(self.x.shape) * self.jac
        return (g @ self._end) * self._half

    def derivative(self, values: np.ndarray) -> np.ndarray:
        """d/dx of the panelwise interpolant at the nodes."""
        v = np.asarray(values, dtype=float).reshape(self.x.shape)
        dv_dt = (v @ self._der.T) / self._half[:, None]
        return dv_dt / self.jac


def integrate_1d(f: Callable, grid: Grid1D, points: int = 4) -> float:
    """Integrate ``f`` over ``[grid.a, grid.b]`` with composite Gauss-Legendre panels.

    Parameters
    ----------
    f : callable
        Integrand; vectorised callables are evaluated in one call.
    grid : Grid1D
        Panel breakpoints. Log-uniform grids integrate in ``log x``.
    points : int
        Gauss points per panel; the rule has order ``2 * points`` (at least 4).

    Raises
    ------
    NumericalError
        If ``f`` is not finite at some quadrature node; the node is named.
    """
    rule = PanelQuadrature(grid, points)
    return rule.integrate(rule.sample(f))


@dataclass(frozen=True)
class SphereQuadrature:
    dimension: int
    nodes: np.ndarray  # (count, dimension + 1) unit vectors
    weights: np.ndarray

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(np.asarray(values, dtype=float), self.weights))

    def scaled(self, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and area weights on the sphere of the given radius."""
        return radius * self.nodes, self.weights * radius**self.dimension


def sphere_quadrature(m: int, resolution: int) -> SphereQuadrature:
    """Product rule on S^m in iterated spherical coordinates.

    Each polar angle carries the measure ``sin^p(theta) d theta``; in ``t = cos theta``
    that is the Jacobi weight ``(1 - t^2)^((p-1)/2)``, so Gauss-Jacobi nodes are
    used (plain Gauss-Legendre when ``p = 1``). The azimuth uses ``2 * resolution``
    equispaced nodes. The rule is exact for constants at every resolution.
    """
    if m < 1:
        raise ValueError("sphere dimension must be >= 1")
    if m > MAX_SPHERE_DIM:
        raise UnsupportedError(f"sphere quadrature supports S^m with m <= {MAX_SPHERE_DIM}, got m={m}")
    if resolution < 4:
        raise ValueError("resolution must be >= 4")

    n_phi = 2 * resolution
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    # start with S^1
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(n_phi, 2.0 * math.pi / n_phi)
    # build S^k from S^{k-1}: x = (cos theta, sin theta * y), measure sin^{k-1} theta
    for k in range(2, m + 1):
        a = (k - 2) / 2.0
        t, wt = roots_jacobi(resolution, a, a)
        s = np.sqrt(1.0 - t**2)
        new_pts = np.concatenate(
            [
                np.repeat(t, len(wts))[:, None],
                (s[:, None, None] * pts[None, :, :]).reshape(-1, pts.shape[1]),
            ],
            axis=1,
        )
        wts = (wt[:, None] * wts[None, :]).ravel()
        pts = new_pts
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return SphereQuadrature(m, pts, wts)


def richardson_extrapolate(
    samples: Sequence[tuple[float, float]], model_exponent: float
) -> tuple[float, float]:
    """Least-squares fit of ``value(R) = limit + a * R**(-model_exponent)``.

    Returns ``(limit, fit_error)`` where ``fit_error`` is the largest absolute
    residual of the fit.
    """
    if len(samples) < 3:
        raise ValueError("richardson_extrapolate needs at least 3 samples")
    R = np.array([s[0] for s in samples], dtype=float)
    vals = np.array([s[1] for s in samples], dtype=float)
    if np.any(np.diff(R) <= 0):
        raise ValueError("sample radii must be strictly increasing")
    if not np.all(np.isfinite(vals)):
        raise NumericalError("non-finite sample value")
    A = np.stack([np.ones_like(R), R ** (-float(model_exponent))], axis=1)
    # column scaling keeps the normal equations well conditioned
    scale = np.max(np.abs(A), axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, vals, rcond=None)
    coef = coef / scale
    resid = vals - A @ coef
    return float(coef[0]), float(np.max(np.abs(resid)))


def _shifted(point, direction, h):
    if np.ndim(point) == 0:
        return float(point) + h * float(direction)
    return np.asarray(point, dtype=float) + h * np.asarray(direction, dtype=float)


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise NumericalError("finite-difference sample is not finite")


def central_difference(f: Callable, point, direction=1.0, step: float = 1e-3):
    """Fourth-order central difference of ``f`` at ``point`` along ``direction``.

    ``f`` may be scalar- or array-valued; the stencil is applied componentwise.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    fp2 = np.asarray(f(_shifted(point, direction, 2 * step)), dtype=float)
    fp1 = np.asarray(f(_shifted(point, direction, step)), dtype=float)
    fm1 = np.asarray(f(_shifted(point, direction, -step)), dtype=float)
    fm2 = np.asarray(f(_shifted(point, direction, -2 * step)), dtype=float)
    _check_finite(fp2, fp1, fm1, fm2)
    d = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * step)
    return float(d) if d.ndim == 0 else d


def second_difference(f: Callable, point, direction=1.0, step: float = 1e-3):
    """Fourth-order central stencil for the second directional derivative."""
    if step <= 0:
        raise ValueError("step must be positive")
    vals = [np.asarray(f(_shifted(point, direction, k * step)), dtype=float) for k in (-2, -1, 0, 1, 2)]
    _check_finite(*vals)
    fm2, fm1, f0, fp1, fp2 = vals
    d = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * step**2)
    return float(d) if d.ndim == 0 else d


def powerlaw_fit(
    samples: Sequence[tuple[float, float]], window: tuple[float, float] | None = None
) -> tuple[float, float, float]:
    """Fit ``y = coefficient * x**exponent`` by least squares in log-log space.

    Only samples with ``window[0] <= x <= window[1]`` are used. ``max_residual``
    is the largest absolute residual in ``log y``.
    """
    x = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    if window is not None:
        keep = (x >= window[0]) & (x <= window[1])
        x, y = x[keep], y[keep]
    if x.size < 2:
        raise ValueError("powerlaw_fit needs at least 2 samples in the window")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("powerlaw_fit requires positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ np.array([slope, intercept])
    return float(slope), float(math.exp(intercept)), float(np.max(np.abs(resid)))
