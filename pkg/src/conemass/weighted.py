"""Weighted Sobolev norms of radial modes and the integration-by-parts estimate.

Norms are returned as the p-th power ``||u||^p``. Power-sum modes are handled
exactly, and divergence is decided from the exponents; other modes are
integrated numerically on log-uniform panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import HypothesisViolation
from .modes import LogMode, PowerSum, RadialMode
from .numerics import Grid1D, PanelQuadrature
from .spectral import DEFAULT_TOL

__all__ = [
    "Cutoff",
    "IdentityCheck",
    "InequalityReport",
    "WeightedNormSpec",
    "estimate_identity_check",
    "estimate_inequality_check",
    "is_member",
    "membership_threshold",
    "weighted_norm",
]

REGIONS = ("cone", "infinity", "annulus")
# how far (in log r) numerical integration reaches towards 0 or infinity
NUMERIC_DEPTH = 80.0
# exponents within this distance of -1 count as -1 (log divergence), absorbing round-off
EXPONENT_TOL = 1e-12


@dataclass(frozen=True)
class WeightedNormSpec:
    """Parameters of a W^{k,p}_{delta,beta} norm restricted to one region.

    ``region`` is ``(kind, lo, hi)`` with kind ``cone`` (use ``delta``),
    ``infinity`` (use ``beta``) or ``annulus`` (unweighted). ``volume`` is the
    volume of the cross section, which multiplies every radial integral.
    """

    p: float = 2.0
    k: int = 0
    delta: float = 0.0
    beta: float = 0.0
    region: tuple = ("cone", 0.0, 1.0)
    volume: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.k not in (0, 1):
            raise ValueError("k must be 0 or 1")
        kind, lo, hi = self.region
        if kind not in REGIONS:
            raise ValueError(f"unknown region {kind!r}")
        if lo < 0 or not hi > lo:
            raise ValueError("region radii must satisfy 0 <= lo < hi")
        if kind != "cone" and lo == 0:
            raise ValueError(f"{kind} region must stay away from r = 0")
        if kind != "infinity" and math.isinf(hi):
            raise ValueError(f"{kind} region must be bounded")

    def radial_weight(self, i: int, n: int) -> float:
        """Exponent w with the i-th term equal to volume * int r^w |u^(i)|^p dr."""
        kind = self.region[0]
        if kind == "cone":
            return -self.p * (self.delta - i) - 1.0
        if kind == "infinity":
            return -self.p * (self.beta - i) - 1.0
        return n - 1.0


def _power_integral(e: float, lo: float, hi: float) -> float:
    if lo == 0 and e <= -1 + EXPONENT_TOL:
        return math.inf
    if math.isinf(hi) and e >= -1 - EXPONENT_TOL:
        return math.inf
    if abs(e + 1) <= EXPONENT_TOL:
        return math.log(hi / lo)
    top = 0.0 if math.isinf(hi) else hi ** (e + 1)
    bottom = 0.0 if lo == 0 else lo ** (e + 1)
    return (top - bottom) / (e + 1)


def _powersum_integral(ps: PowerSum, w: float, p: float, lo: float, hi: float) -> float:
    """int_lo^hi r^w |ps(r)|^p dr, exactly for p = 2 or a single term."""
    if ps.is_zero():
        return 0.0
    exps = ps.exponents
    if lo == 0 and w + p * min(exps) <= -1 + EXPONENT_TOL:
        return math.inf
    if math.isinf(hi) and w + p * max(exps) >= -1 - EXPONENT_TOL:
        return math.inf
    if len(ps.terms) == 1:
        c, q = ps.terms[0]
        return abs(c) ** p * _power_integral(w + p * q, lo, hi)
    if p == 2:
        total = 0.0
        for ci, pi in ps.terms:
            for cj, pj in ps.terms:
                total += ci * cj * _power_integral(w + pi + pj, lo, hi)
        return max(total, 0.0)
    return _numeric_integral(lambda r: r**w * np.abs(ps(r)) ** p, lo, hi)


def _numeric_integral(f: Callable, lo: float, hi: float, panels_per_decade: int = 4, points: int = 10) -> float:
    if lo == 0:
        lo = hi * math.exp(-NUMERIC_DEPTH)
    if math.isinf(hi):
        hi = lo * math.exp(NUMERIC_DEPTH)
    decades = math.log10(hi / lo)
    panels = max(16, int(math.ceil(decades * panels_per_decade)))
    quad = PanelQuadrature(Grid1D.log_uniform(lo, hi, panels + 1), points)
    return quad.integrate(quad.sample(f))


def weighted_norm(u: RadialMode, spec: WeightedNormSpec) -> float:
    """p-th power of the weighted W^{k,p} norm of a radial mode on one region.

    Returns ``math.inf`` when the norm diverges; for power sums this is decided
    from the exponents (a log divergence such as ``r^delta`` on the cone end
    counts as divergent).
    """
    kind, lo, hi = spec.region
    ulo, uhi = u.interval
    if lo < ulo * (1 - 1e-12) or hi > uhi * (1 + 1e-12):
        raise ValueError(f"region {spec.region} is not inside the mode interval {u.interval}")
    total = 0.0
    for i in range(spec.k + 1):
        w = spec.radial_weight(i, u.n)
        if u.terms is not None:
            ps = u.terms if i == 0 else u.terms.derivative()
            term = _powersum_integral(ps, w, spec.p, lo, hi)
        else:
            if i == 0:
                g = lambda r, _u=u, _w=w: r**_w * np.abs(_u(r)) ** spec.p  # noqa: E731
            else:
                g = lambda r, _u=u, _w=w: r**_w * np.abs(_u.derivative(r)) ** spec.p  # noqa: E731
            term = _numeric_integral(g, lo, hi)
        total += term
    return spec.volume * total


def membership_threshold(nu: float) -> float:
    """Supremum of the weights eta for which r^nu lies in W^{1,2}_eta near the tip."""
    return nu


def is_member(nu: float, eta: float) -> bool:
    return eta < nu


class Cutoff:
    """C^1 piecewise-cubic cutoff on s <= 0: 1 for s <= -2, 0 for s >= -1."""

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        t = np.clip(-1.0 - s, 0.0, 1.0)  # 0 at s=-1, 1 at s=-2
        return t * t * (3.0 - 2.0 * t)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        t = -1.0 - s
        inside = (t > 0) & (t < 1)
        return np.where(inside, -6.0 * t * (1.0 - t), 0.0)


def _check_cutoff(chi) -> None:
    probe_zero = np.linspace(-0.999, -1e-6, 50)
    probe_one = np.linspace(-40.0, -2.0, 200)
    if np.max(np.abs(chi(probe_zero))) > 1e-14 or np.max(np.abs(np.asarray(chi(probe_one)) - 1.0)) > 1e-14:
        raise ValueError("cutoff must vanish on (-1, 0) and equal 1 on (-inf, -2]")


def _log_quadrature(s_lo: float, s_hi: float, per_unit: int = 4, points: int = 10) -> PanelQuadrature:
    cuts = [s_lo] + [c for c in (-2.0, -1.0) if s_lo < c < s_hi] + [s_hi]
    nodes = [s_lo]
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(2, int(math.ceil((b - a) * per_unit)))
        nodes.extend(np.linspace(a, b, m + 1)[1:])
    return PanelQuadrature(Grid1D(np.array(nodes)), points)


@dataclass
class IdentityCheck:
    lhs: float
    rhs: float
    abs_diff: float
    boundary_term: float

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.abs_diff))

    @property
    def rel_diff(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return 0.0 if scale == 0 else self.abs_diff / scale


def estimate_identity_check(
    ut: LogMode,
    lam: float,
    n: int,
    delta: float,
    chi=None,
    boundary_tol: float = 1e-12,
) -> IdentityCheck:
    """Both sides of the integration-by-parts identity for one log-variable mode.

    lhs = ((n-1)/2 + lam + delta) int (chi u~)^2 e^{-2 delta s} ds
    rhs = int chi^2 u~ v~ e^{-2 delta s} ds + 1/2 int (chi^2)' u~^2 e^{-2 delta s} ds

    The integrals run over ``ut.interval``; the boundary term at its left end,
    ``chi^2 u~^2 e^{-2 delta s} / 2``, must be negligible (relative to the
    integrals) for the truncation to represent (-inf, 0).
    """
    chi = Cutoff() if chi is None else chi
    _check_cutoff(chi)
    s_lo, s_hi = ut.interval
    quad = _log_quadrature(s_lo, s_hi)
    s = quad.x
    u = ut(s)
    v = ut.source(s)
    c = chi(s)
    dchi2 = 2.0 * c * chi.derivative(s)
    wgt = np.exp(-2.0 * delta * s)
    a = (n - 1) / 2 + lam
    lhs = (a + delta) * quad.integrate((c * u) ** 2 * wgt)
    rhs = quad.integrate(c**2 * u * v * wgt) + 0.5 * quad.integrate(dchi2 * u**2 * wgt)
    boundary = 0.5 * float(chi(s_lo) ** 2 * ut(s_lo) ** 2 * math.exp(-2.0 * delta * s_lo))
    scale = max(abs(lhs), abs(rhs))
    if boundary > boundary_tol * max(scale, 1e-300) and boundary > 0:
        raise ValueError(f"truncation at s={s_lo} is too shallow: boundary term {boundary:.3e} vs integrals {scale:.3e}")
    return IdentityCheck(float(lhs), float(rhs), float(abs(lhs - rhs)), boundary)


@dataclass
class InequalityReport:
    lhs: float
    source_term: float
    compact_term: float
    constant: float

    @property
    def rhs(self) -> float:
        return self.constant * (self.source_term + self.compact_term)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "source_term": self.source_term,
            "compact_term": self.compact_term,
            "constant": self.constant,
            "slack": self.slack,
            "holds": self.holds,
        }


def default_estimate_constant(lam: float, n: int, delta: float) -> float:
    return 2.0 * max(1.0, 1.0 / abs((n - 1) / 2 + lam + delta))


def estimate_inequality_check(
    ut: LogMode,
    lam: float,
    n: int,
    delta: float,
    chi=None,
    constant: Optional[float] = None,
    tol: float = DEFAULT_TOL,
) -> InequalityReport:
    """Evaluate int (chi u~)^2 w <= C int chi^2 v~^2 w + C int_{-2}^{-1} u~^2 w, w = e^{-2 delta s}."""
    a = (n - 1) / 2 + lam
    if abs(a + delta) <= tol:
        raise HypothesisViolation(f"delta={delta} is critical for this mode (equals {-a})")
    chi = Cutoff() if chi is None else chi
    _check_cutoff(chi)
    C = default_estimate_constant(lam, n, delta) if constant is None else constant
    s_lo, s_hi = ut.interval
    quad = _log_quadrature(s_lo, s_hi)
    s = quad.x
    u = ut(s)
    v = ut.source(s)
    c = chi(s)
    wgt = np.exp(-2.0 * delta * s)
    lhs = quad.integrate((c * u) ** 2 * wgt)
    src = quad.integrate(c**2 * v**2 * wgt)
    lo, hi = max(-2.0, s_lo), min(-1.0, s_hi)
    compact = 0.0
    if hi > lo:
        cq = PanelQuadrature(Grid1D.uniform(lo, hi, 9), 10)
        compact = cq.integrate(ut(cq.x) ** 2 * np.exp(-2.0 * delta * cq.x))
    return InequalityReport(float(lhs), float(src), float(compact), float(C))
