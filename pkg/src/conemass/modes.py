"""Radial reduction of the cone Dirac operator.

On dr^2 + r^2 g^N an eigenmode with cross-section eigenvalue ``lam`` reduces the
Dirac equation to the scalar ODE

    u'(r) + ((n-1)/2 + lam) u(r) / r = v(r),

whose homogeneous solutions are ``r**nu`` with ``nu = -(n-1)/2 - lam``. Modes are
either closed-form power sums (handled exactly) or callables / samples
(handled by Gauss-Legendre quadrature and finite differences).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DivergentIntegralError, HypothesisViolation, NumericalError
from .numerics import Grid1D, PanelQuadrature, central_difference, powerlaw_fit
from .spectral import DEFAULT_TOL, DiracSpectrum, nu_exponent

__all__ = [
    "DecayJumpResult",
    "GreenResult",
    "LogMode",
    "PerturbedMode",
    "PowerSum",
    "RadialMode",
    "contraction_radius",
    "decay_jump_fit",
    "dirac_mode_apply",
    "dirac_mode_solve",
    "green_mode",
    "log_transform",
    "perturbed_harmonic_mode",
]


@dataclass(frozen=True)
class PowerSum:
    """Finite sum ``sum_i c_i r**p_i`` with distinct exponents, sorted by exponent."""

    terms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        merged: dict[float, float] = {}
        for c, p in self.terms:
            merged[float(p)] = merged.get(float(p), 0.0) + float(c)
        object.__setattr__(self, "terms", tuple((merged[p], p) for p in sorted(merged) if merged[p] != 0.0))

    @classmethod
    def monomial(cls, coeff: float, exponent: float) -> "PowerSum":
        return cls(((coeff, exponent),))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "PowerSum":
        return cls(tuple((c, float(k)) for k, c in enumerate(coeffs)))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, p in self.terms:
            out = out + c * r**p
        return out

    def derivative(self) -> "PowerSum":
        return PowerSum(tuple((c * p, p - 1) for c, p in self.terms if p != 0))

    def scale(self, a: float) -> "PowerSum":
        return PowerSum(tuple((a * c, p) for c, p in self.terms))

    def shift(self, k: float) -> "PowerSum":
        """Multiply by r**k."""
        return PowerSum(tuple((c, p + k) for c, p in self.terms))

    def add(self, other: "PowerSum", cancel_tol: float = 0.0) -> "PowerSum":
        """Sum; merged coefficients below ``cancel_tol`` times the larger input are dropped."""
        mine = {p: c for c, p in self.terms}
        theirs = {p: c for c, p in other.terms}
        out = []
        for p in set(mine) | set(theirs):
            a, b = mine.get(p, 0.0), theirs.get(p, 0.0)
            c = a + b
            if abs(c) <= cancel_tol * max(abs(a), abs(b)):
                continue
            out.append((c, p))
        return PowerSum(tuple(out))

    def __add__(self, other: "PowerSum") -> "PowerSum":
        return self.add(other)

    def __neg__(self) -> "PowerSum":
        return self.scale(-1.0)

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self.add(-other)

    @property
    def exponents(self) -> list[float]:
        return [p for _, p in self.terms]

    def is_zero(self) -> bool:
        return not self.terms

    def to_list(self) -> list[list[float]]:
        return [[c, p] for c, p in self.terms]


@dataclass
class RadialMode:
    """A radial coefficient function of one spectral mode on ``interval``.

    Exactly one representation is primary: ``terms`` (closed form), ``func``
    (vectorised callable, optionally with ``dfunc``), or ``nodes``/``values``
    samples. Samples on uniform or log-uniform nodes are differentiated with a
    fourth-order stencil in the grid variable.
    """

    lam: float
    n: int
    interval: tuple[float, float]
    terms: Optional[PowerSum] = None
    func: Optional[Callable] = None
    dfunc: Optional[Callable] = None
    nodes: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = map(float, self.interval)
        if not (0 <= lo < hi):
            raise ValueError(f"invalid mode interval {self.interval}")
        self.interval = (lo, hi)
        if self.terms is None and self.func is None and self.nodes is None:
            raise ValueError("a mode needs terms, a callable or samples")
        if self.nodes is not None:
            self.nodes = np.asarray(self.nodes, dtype=float)
            self.values = np.asarray(self.values, dtype=float)
            if self.nodes.shape != self.values.shape or self.nodes.size < 5:
                raise ValueError("samples need matching nodes/values with at least 5 points")
            if np.any(np.diff(self.nodes) <= 0):
                raise ValueError("sample nodes must be strictly increasing")
            if not np.all(np.isfinite(self.values)):
                raise NumericalError("mode samples must be finite")
            if self.nodes[0] <= 0:
                raise ValueError("sampled modes must stay away from r = 0")
            self._spline = None

    # construction helpers

    @classmethod
    def power(cls, lam: float, n: int, coeff: float, exponent: float, interval=(0.0, 1.0)) -> "RadialMode":
        return cls(lam, n, interval, terms=PowerSum.monomial(coeff, exponent))

    @classmethod
    def from_terms(cls, lam: float, n: int, terms: PowerSum | Iterable, interval=(0.0, 1.0)) -> "RadialMode":
        if not isinstance(terms, PowerSum):
            terms = PowerSum(tuple(tuple(t) for t in terms))
        return cls(lam, n, interval, terms=terms)

    @classmethod
    def homogeneous(cls, lam: float, n: int, interval=(0.0, 1.0)) -> "RadialMode":
        return cls.power(lam, n, 1.0, nu_exponent(lam, n), interval)

    @classmethod
    def from_samples(cls, lam: float, n: int, nodes, values) -> "RadialMode":
        nodes = np.asarray(nodes, dtype=float)
        return cls(lam, n, (float(nodes[0]), float(nodes[-1])), nodes=nodes, values=values)

    @property
    def nu(self) -> float:
        return nu_exponent(self.lam, self.n)

    @property
    def is_closed_form(self) -> bool:
        return self.terms is not None

    def __call__(self, r):
        if self.terms is not None:
            return self.terms(r)
        if self.func is not None:
            return np.asarray(self.func(np.asarray(r, dtype=float)), dtype=float)
        return self._interpolant()(np.asarray(r, dtype=float))

    def _interpolant(self):
        if self._spline is None:
            self._spline = CubicSpline(self.nodes, self.values)
        return self._spline

    def derivative(self, r, rel_step: float = 1e-3):
        r = np.asarray(r, dtype=float)
        if self.terms is not None:
            return self.terms.derivative()(r)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(r), dtype=float)
        if self.func is not None:
            h = rel_step * np.maximum(np.abs(r), 1e-300)
            f = self.func
            return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)
        return self._interpolant().derivative()(r)

    def sample(self, nodes=None) -> tuple[np.ndarray, np.ndarray]:
        if nodes is None:
            if self.nodes is not None:
                return self.nodes, self.values
            lo, hi = self.interval
            lo = lo if lo > 0 else hi * 1e-6
            nodes = np.geomspace(lo, hi, 201)
        nodes = np.asarray(nodes, dtype=float)
        return nodes, self(nodes)

    def with_(self, **kw) -> "RadialMode":
        kw.setdefault("meta", dict(self.meta))
        return replace(self, **kw)


def _grid_derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Fourth-order finite differences on uniform or log-uniform nodes.

    Other spacings fall back to the derivative of a cubic spline.
    """
    for variable, jac in ((x, np.ones_like(x)), (np.log(x), x)):
        h = np.diff(variable)
        if np.allclose(h, h[0], rtol=1e-9, atol=0):
            h = h[0]
            d = np.empty_like(y)
            d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
            # one-sided fourth-order stencils at the two ends of each side
            d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
            d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
            d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
            d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
            return d / jac
    return CubicSpline(x, y).derivative()(x)


def dirac_mode_apply(u: RadialMode) -> RadialMode:
    """Source ``v = u' + ((n-1)/2 + lam) u / r`` of a mode, on the same interval."""
    nu = u.nu
    if u.terms is not None:
        v = PowerSum(tuple(((p - nu) * c, p - 1) for c, p in u.terms.terms if p != nu))
        return RadialMode(u.lam, u.n, u.interval, terms=v)
    if u.func is not None:

        def v(r, _u=u):
            r = np.asarray(r, dtype=float)
            return _u.derivative(r) - nu * _u(r) / r

        return RadialMode(u.lam, u.n, u.interval, func=v)
    d = _grid_derivative(u.nodes, u.values)
    return RadialMode.from_samples(u.lam, u.n, u.nodes, d - nu * u.values / u.nodes)


def _definite_integrals(g: Callable, a: float, b: np.ndarray, panels: int = 16, points: int = 8) -> np.ndarray:
    """Integrals of ``g`` from ``a`` to each entry of ``b`` (all positive), in log r."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    xi, w = np.polynomial.legendre.leggauss(points)
    ta, tb = math.log(a), np.log(b)
    edges = ta + (tb[:, None] - ta) * np.linspace(0.0, 1.0, panels + 1)[None, :]
    half = 0.5 * np.diff(edges, axis=1)  # (m, panels)
    t = edges[:, :-1, None] + half[:, :, None] * (xi[None, None, :] + 1.0)
    s = np.exp(t)
    vals = np.asarray(g(s), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand is not finite on the quadrature nodes")
    return np.sum(np.sum(vals * s * w[None, None, :] * half[:, :, None], axis=2), axis=1)


def _tip_integrals(g: Callable, r: np.ndarray, depth: float = 80.0, panels: int = 64, points: int = 8) -> np.ndarray:
    """Integrals of ``g`` from 0 to each r via s = r e^{-t}, t in [0, depth]."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    xi, w = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(0.0, depth, panels + 1)
    half = 0.5 * np.diff(edges)
    t = (edges[:-1, None] + half[:, None] * (xi[None, :] + 1.0)).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    s = r[:, None] * np.exp(-t)[None, :]
    vals = np.asarray(g(s), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand is not finite on the quadrature nodes")
    return np.sum(vals * s * wt[None, :], axis=1)


def dirac_mode_solve(lam: float, n: int, v: RadialMode, datum: tuple[float, float]) -> RadialMode:
    """Solve the mode ODE with source ``v`` and ``u(r1) = u1``.

    Uses the integrating factor, ``u(r) = r^nu (u1 r1^-nu + int_{r1}^r s^-nu v(s) ds)``.
    Closed-form sources give closed-form (or explicit logarithmic) solutions;
    other sources are integrated with Gauss-Legendre panels in log r.
    """
    r1, u1 = float(datum[0]), float(datum[1])
    nu = nu_exponent(lam, n)
    lo, hi = v.interval
    if not (lo <= r1 <= hi) or r1 <= 0:
        raise ValueError(f"datum radius {r1} must lie in the (positive) mode interval {v.interval}")
    if v.terms is not None:
        out = []
        logs = []
        hom = [u1 * r1 ** (-nu)]
        for c, p in v.terms.terms:
            k = p + 1 - nu
            if k == 0:
                logs.append(c)
            else:
                out.append((c / k, p + 1))
                hom.append(-c / k * r1**k)
        # a homogeneous coefficient at round-off level is zero; r^nu would amplify it near 0
        c_hom = math.fsum(hom)
        if abs(c_hom) > 16 * np.finfo(float).eps * math.fsum(abs(x) for x in hom):
            out.append((c_hom, nu))
        base = PowerSum(tuple(out))
        if not logs:
            return RadialMode(lam, n, v.interval, terms=base)
        cl = sum(logs)

        def u_log(r, _b=base):
            r = np.asarray(r, dtype=float)
            return _b(r) + cl * r**nu * (np.log(r) - math.log(r1))

        return RadialMode(lam, n, v.interval, func=u_log, meta={"log_resonance": True})

    def integrand(s, _v=v):
        return s ** (-nu) * _v(s)

    def u_num(r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        vals = flat ** nu * (u1 * r1 ** (-nu) + _definite_integrals(integrand, r1, flat))
        return vals.reshape(r.shape)

    mode = RadialMode(lam, n, v.interval, func=u_num)
    if v.nodes is not None:
        mode.nodes, mode.values = v.nodes, u_num(v.nodes)
        mode._spline = None
        mode.func = u_num
    return mode


@dataclass
class GreenResult:
    mode: RadialMode
    constant: float
    representative: str
    u_norm: Optional[float] = None
    v_norm: Optional[float] = None

    @property
    def estimate_holds(self) -> Optional[bool]:
        if self.u_norm is None or self.v_norm is None:
            return None
        return self.u_norm <= self.constant * self.v_norm * (1 + 1e-12) + 1e-300


def green_mode(
    lam: float,
    n: int,
    delta: float,
    r0: float,
    v: RadialMode,
    tol: float = DEFAULT_TOL,
    compute_norms: bool = True,
) -> GreenResult:
    """Right inverse of the mode operator on (0, 2 r0) that lands in the weight-``delta`` space.

    For ``delta < nu`` the solution vanishing at the outer radius ``2 r0`` is
    returned. For ``delta > nu`` that solution carries a multiple of ``r^nu``,
    which has infinite weight-``delta`` norm, so the unique solution decaying at
    the tip, ``u = r^nu int_0^r s^-nu v``, is returned instead. In both cases
    ``||u||_{L2_delta} <= ||v||_{L2_{delta-1}} / |delta - nu|``.

    Raises
    ------
    HypothesisViolation
        If ``delta`` equals the indicial root of this mode (critical weight).
    DivergentIntegralError
        If a closed-form source is not integrable against ``s^-nu`` at the tip.
    """
    from .weighted import WeightedNormSpec, weighted_norm

    nu = nu_exponent(lam, n)
    if abs(delta - nu) <= tol:
        raise HypothesisViolation(f"weight delta={delta} is critical at the conical point (equals nu={nu})")
    outer = 2.0 * r0
    interval = (0.0 if v.interval[0] == 0 else v.interval[0], outer)
    if v.interval[1] < outer * (1 - 1e-12):
        raise ValueError("source must be defined on (0, 2 r0)")
    constant = 1.0 / abs(delta - nu)

    if delta < nu:
        representative = "outer-dirichlet"
        if v.terms is not None:
            u = dirac_mode_solve(lam, n, replace(v, interval=interval), (outer, 0.0))
        else:
            src = replace(v, interval=(max(v.interval[0], 0.0), outer))
            if src.nodes is not None:
                src = RadialMode(lam, n, src.interval, func=v.__call__)
            u = dirac_mode_solve(lam, n, src, (outer, 0.0))
    else:
        representative = "tip-decaying"
        if v.terms is not None:
            out = []
            for c, p in v.terms.terms:
                k = p + 1 - nu
                if k <= 0:
                    raise DivergentIntegralError(
                        f"source term r^{p} is not integrable against r^{-nu} at r=0 (exponent {p - nu})",
                        exponent=p - nu,
                    )
                out.append((c / k, p + 1))
            u = RadialMode(lam, n, interval, terms=PowerSum(tuple(out)))
        else:

            def integrand(s, _v=v):
                return s ** (-nu) * _v(s)

            def u_tip(r):
                r = np.asarray(r, dtype=float)
                flat = r.ravel()
                return (flat**nu * _tip_integrals(integrand, flat)).reshape(r.shape)

            u = RadialMode(lam, n, (v.interval[0], outer), func=u_tip)

    result = GreenResult(u, constant, representative)
    if compute_norms:
        region = (interval[0], outer)
        result.u_norm = math.sqrt(weighted_norm(u, WeightedNormSpec(delta=delta, region=("cone", *region))))
        result.v_norm = math.sqrt(weighted_norm(v, WeightedNormSpec(delta=delta - 1, region=("cone", *region))))
        if not math.isfinite(result.v_norm):
            raise HypothesisViolation(f"source is not in the weight-{delta - 1} space near the tip")
    return result


@dataclass
class DecayJumpResult:
    coefficients: dict[float, float]
    remainder: RadialMode
    remainder_norm: float
    fit_residual: float
    window: tuple[float, float]


def decay_jump_fit(
    u: RadialMode,
    delta: float,
    delta_prime: float,
    spec: DiracSpectrum,
    n: int,
    r0: float,
    window: Optional[tuple[float, float]] = None,
    samples: int = 60,
    tol: float = DEFAULT_TOL,
) -> DecayJumpResult:
    """Split ``u`` into indicial terms ``r^nu_j`` with ``delta < nu_j < delta_prime`` plus a better-decaying remainder.

    The source ``v`` of ``u`` is inverted with the weight-``delta_prime`` Green
    operator; the difference ``u - G v`` solves the homogeneous equation and is
    fitted by least squares on ``window`` (default ``[r0/100, r0/10]``) against
    the indicial powers in ``(delta, delta_prime)``.
    """
    from .spectral import is_critical_at_cone
    from .weighted import WeightedNormSpec, weighted_norm

    if not delta < delta_prime:
        raise ValueError("need delta < delta_prime")
    for w in (delta, delta_prime):
        if is_critical_at_cone(w, spec, n, tol):
            raise HypothesisViolation(f"weight {w} is critical at the conical point")
    nus = sorted(float(x) for x in set(spec.nu_values(n)) if delta < x < delta_prime)
    for a, b in zip(nus, nus[1:]):
        if b - a < 1e-6:
            raise NumericalError(f"indicial roots {a} and {b} are too close to separate in a fit")
    if window is None:
        window = (r0 / 100, r0 / 10)

    v = dirac_mode_apply(u)
    if v.interval[1] < 2 * r0:
        v = replace(v, interval=(v.interval[0], 2 * r0))
    g = green_mode(u.lam, n, delta_prime, r0, v, tol=tol, compute_norms=False).mode
    r = np.geomspace(window[0], window[1], samples)
    omega = u(r) - g(r)

    coeffs: dict[float, float] = {}
    resid = float(np.max(np.abs(omega))) if not nus else 0.0
    if nus:
        A = np.stack([r**p for p in nus], axis=1)
        scale = np.max(np.abs(A), axis=0)
        c, *_ = np.linalg.lstsq(A / scale, omega, rcond=None)
        c = c / scale
        resid = float(np.max(np.abs(A @ c - omega)))
        coeffs = {p: float(ci) for p, ci in zip(nus, c)}

    fitted = PowerSum(tuple((c, p) for p, c in coeffs.items()))
    if u.terms is not None:
        rem = RadialMode(u.lam, n, u.interval, terms=u.terms.add(-fitted, cancel_tol=1e-9))
    else:
        rem = RadialMode(u.lam, n, u.interval, func=lambda x, _u=u, _f=fitted: _u(x) - _f(x))
    lo = u.interval[0]
    norm = weighted_norm(rem, WeightedNormSpec(delta=delta_prime, region=("cone", lo, r0)))
    return DecayJumpResult(coeffs, rem, norm, resid, window)


def contraction_radius(C: float, alpha: float) -> float:
    """Largest r0 for which C (2 r0)^alpha / alpha < 1."""
    if C <= 0:
        return math.inf
    return 0.5 * (alpha / C) ** (1.0 / alpha)


@dataclass
class PerturbedMode:
    mode: RadialMode
    correction: np.ndarray
    contraction: float
    iterations: int
    residual: float

    def correction_exponent(self, window: Optional[tuple[float, float]] = None) -> tuple[float, float, float]:
        r = self.mode.nodes
        keep = np.abs(self.correction) > 0
        if window is None:
            hi = r[-1] * 1e-4
            window = (max(r[0] * 1e6, hi * 1e-6), hi)
        return powerlaw_fit(list(zip(r[keep], np.abs(self.correction[keep]))), window)


def perturbed_harmonic_mode(
    lam: float,
    n: int,
    r0: float,
    eps: Optional[Callable] = None,
    C: float = 0.0,
    alpha: float = 1.0,
    max_contraction: float = 1.0,
    panels_per_decade: int = 4,
    points: int = 10,
    max_iter: int = 500,
) -> PerturbedMode:
    """Harmonic mode ``u = r^nu + correction`` of ``u' - nu u / r + eps(r) u = 0`` on (0, 2 r0).

    The correction is the fixed point of ``u = r^nu - G(eps u)`` with the tip
    Green operator, found by Picard iteration. ``eps`` must obey
    ``|eps(r)| <= C r^(alpha-1)``; the iteration is only run when
    ``C (2 r0)^alpha / alpha < max_contraction``.
    """
    nu = nu_exponent(lam, n)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    outer = 2.0 * r0
    if eps is None or C == 0:
        mode = RadialMode.homogeneous(lam, n, (0.0, outer))
        r = np.geomspace(outer * 1e-12, outer, 200)
        mode.nodes, mode.values = r, r**nu
        mode._spline = None
        return PerturbedMode(mode, np.zeros_like(r), 0.0, 0, 0.0)

    q = C * outer**alpha / alpha
    if q >= max_contraction:
        raise HypothesisViolation(
            f"perturbation does not contract on (0, {outer:g}) (factor {q:.3g}); "
            f"shrink r0 below {contraction_radius(C / max_contraction, alpha):.6g}"
        )
    # the part of (0, r_min) is dropped: its contribution is at most C r_min^alpha / alpha
    r_min = min((1e-17 * alpha / C) ** (1.0 / alpha), outer * 1e-8)
    decades = math.log10(outer / r_min)
    panels = max(8, int(math.ceil(decades * panels_per_decade)))
    quad = PanelQuadrature(Grid1D.log_uniform(r_min, outer, panels + 1), points)
    r = quad.x
    e = quad.sample(eps)
    if np.any(np.abs(e) > C * r ** (alpha - 1) * (1 + 1e-9)):
        raise HypothesisViolation("eps exceeds the declared bound C r^(alpha-1)")
    w = np.ones_like(r)
    it = 0
    last = math.inf
    for it in range(1, max_iter + 1):
        integral = quad.cumulative(e * w)
        w_new = 1.0 - integral
        change = float(np.max(np.abs(w_new - w)))
        w = w_new
        # stop at round-off level: tiny change, or the change stopped shrinking
        if change <= 1e-15 or (change < 1e-12 and change >= last):
            break
        last = change
    else:
        raise NumericalError("Picard iteration did not converge")
    integral = quad.cumulative(e * w)
    nodes = r.ravel()
    u = (r**nu * w).ravel()
    correction = -(r**nu * integral).ravel()
    # u = r^nu w, so the residual u' - nu u/r + eps u equals r^nu (w' + eps w)
    res = np.abs(quad.derivative(w) + e * w) * r / np.abs(w)
    mode = RadialMode.from_samples(lam, n, nodes, u)
    mode.meta.update({"alpha": alpha, "C": C, "r0": r0})
    return PerturbedMode(mode, correction, q, it, float(np.max(res)))


@dataclass
class LogMode:
    """A mode in the variable s = log r, truncated to [s_lo, s_hi] with s_hi <= 0."""

    lam: float
    n: int
    interval: tuple[float, float]
    func: Callable
    dfunc: Optional[Callable] = None
    source_func: Optional[Callable] = None

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError("invalid log interval")
        if hi > 1e-15:
            raise ValueError("log modes live on s <= 0")

    @property
    def rate(self) -> float:
        """Coefficient (n-1)/2 + lam of the log-variable ODE."""
        return (self.n - 1) / 2 + self.lam

    def __call__(self, s):
        return np.asarray(self.func(np.asarray(s, dtype=float)), dtype=float)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(s), dtype=float)
        return central_difference(self.func, s, 1.0, 1e-3)

    def source(self, s):
        """v~(s) = u~'(s) + ((n-1)/2 + lam) u~(s)."""
        if self.source_func is not None:
            return np.asarray(self.source_func(np.asarray(s, dtype=float)), dtype=float)
        return self.derivative(s) + self.rate * self(s)

    def to_radial(self) -> RadialMode:
        lo, hi = self.interval
        f = self.func
        df = self.dfunc

        def u(r):
            return f(np.log(np.asarray(r, dtype=float)))

        du = None
        if df is not None:

            def du(r):
                r = np.asarray(r, dtype=float)
                return df(np.log(r)) / r

        return RadialMode(self.lam, self.n, (math.exp(lo), math.exp(hi)), func=u, dfunc=du)


def log_transform(u: RadialMode, s_lo: Optional[float] = None) -> LogMode:
    """u~(s) = u(e^s); the source transforms as v~(s) = e^s v(e^s)."""
    lo, hi = u.interval
    if hi > 1 + 1e-15:
        raise ValueError("the log variable is used on the cone end r <= 1 only")
    if s_lo is None:
        if lo <= 0:
            raise ValueError("an interval starting at r=0 needs an explicit s_lo")
        s_lo = math.log(lo)
    s_hi = math.log(hi)
    v = dirac_mode_apply(u)

    def f(s):
        return u(np.exp(np.asarray(s, dtype=float)))

    def df(s):
        r = np.exp(np.asarray(s, dtype=float))
        return u.derivative(r) * r

    def vt(s):
        r = np.exp(np.asarray(s, dtype=float))
        return r * v(r)

    return LogMode(u.lam, u.n, (s_lo, s_hi), f, df, vt)


def modes_to_csv(r: np.ndarray, u: np.ndarray, v: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "u", "v"])
    for row in zip(r, u, v):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()
