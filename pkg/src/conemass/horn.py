"""Herzlich boundary condition, Yamabe helpers and small-radius horn checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import HypothesisViolation
from .geometry import HornMetric, PerturbationBound, horn_area, horn_mean_curvature
from .numerics import sphere_volume

__all__ = [
    "BoundaryData",
    "HerzlichResult",
    "ScalIntervalReport",
    "boundary_from_horn",
    "exact_horn_scal_implication",
    "herzlich_condition",
    "herzlich_condition_3d",
    "horn_threshold",
    "perturbed_horn_check",
    "yamabe_round_sphere",
]

# relative slack in "H <= rhs" so that exact equality cases survive round-off
EQUALITY_RTOL = 1e-12


@dataclass(frozen=True)
class BoundaryData:
    """A closed boundary component: dimension, area, mean curvature, Yamabe invariant."""

    dim: int
    area: float
    mean_curvature: float
    yamabe: float

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("boundary dimension must be >= 2")
        if not self.area > 0:
            raise ValueError("boundary area must be positive")


@dataclass
class HerzlichResult:
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    threshold: Optional[float] = None

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.satisfied, self.margin))

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "threshold": self.threshold,
        }


def _result(lhs: float, rhs: float) -> HerzlichResult:
    ok = lhs <= rhs + EQUALITY_RTOL * max(abs(rhs), abs(lhs))
    return HerzlichResult(float(lhs), float(rhs), bool(ok), float(rhs - lhs))


def herzlich_condition(b: BoundaryData, n: int) -> HerzlichResult:
    """H <= Area^{-1/(n-1)} sqrt((n-1)/(n-2) Y) for a boundary of an n-manifold."""
    if n != b.dim + 1:
        raise ValueError(f"boundary of dimension {b.dim} does not bound an {n}-manifold")
    if b.yamabe < 0:
        raise HypothesisViolation(f"Yamabe invariant {b.yamabe} is negative")
    rhs = b.area ** (-1.0 / (n - 1)) * math.sqrt((n - 1) / (n - 2) * b.yamabe)
    return _result(b.mean_curvature, rhs)


def herzlich_condition_3d(b: BoundaryData) -> HerzlichResult:
    """H <= 4 sqrt(pi / Area) for a 2-sphere boundary; ``yamabe`` is not consulted."""
    if b.dim != 2:
        raise ValueError("the 3-dimensional form needs a 2-dimensional boundary")
    return _result(b.mean_curvature, 4.0 * math.sqrt(math.pi / b.area))


def yamabe_round_sphere(m: int) -> float:
    """m(m-1) Vol(S^m)^{2/m}, the Yamabe invariant of the round S^m.

    For m = 2 this is 2 Vol(S^2) = 8 pi, i.e. the total scalar curvature.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    return m * (m - 1) * sphere_volume(m) ** (2.0 / m)


def _cross_yamabe(horn: HornMetric, yamabe: Optional[float]) -> float:
    y = horn.cross.yamabe if yamabe is None else yamabe
    if y is None:
        raise ValueError("no Yamabe invariant given for the cross section")
    return float(y)


def boundary_from_horn(horn: HornMetric, r: float, yamabe: Optional[float] = None) -> BoundaryData:
    """Boundary data of the level set {r} x N in dr^2 + r^{2b} g^N."""
    return BoundaryData(horn.n - 1, horn_area(horn, r), horn_mean_curvature(horn, r), _cross_yamabe(horn, yamabe))


def horn_threshold(horn: HornMetric, yamabe: Optional[float] = None) -> float:
    """Supremum of r for which the Herzlich inequality is strict on the exact horn.

    Solves (1/r^b) A^{-1/(n-1)} sqrt((n-1)/(n-2) Y) = (n-1) b / r with A = Vol(N).
    """
    y = _cross_yamabe(horn, yamabe)
    n, b = horn.n, horn.b
    if b <= 1:
        raise HypothesisViolation(f"threshold is undefined for b={b} <= 1; b = 1 is the equality edge")
    if not y > 0:
        raise HypothesisViolation("the horn threshold needs a positive Yamabe invariant")
    k = horn.cross.volume ** (-1.0 / (n - 1)) * math.sqrt((n - 1) / (n - 2) * y)
    return (k / ((n - 1) * b)) ** (1.0 / (b - 1))


def _perturbed_margin(horn: HornMetric, bound: PerturbationBound, y: float, r):
    n, b, a = horn.n, horn.b, bound.alpha
    c0, c1 = bound.constants[0], bound.constants[1]
    r = np.asarray(r, dtype=float)
    H = (n - 1) * b / r + c1 * r ** (a - 1)
    area = r ** ((n - 1) * b) * horn.cross.volume * (1.0 + c0 * r**a)
    rhs = area ** (-1.0 / (n - 1)) * math.sqrt((n - 1) / (n - 2) * y)
    return H, rhs


def perturbed_horn_check(
    horn: HornMetric,
    bound: PerturbationBound,
    r: float,
    yamabe: Optional[float] = None,
    scan: int = 400,
) -> HerzlichResult:
    """Herzlich condition at radius r with the perturbed bounds

    H(r) = (n-1) b / r + C_1 r^{alpha-1},  Area(r) = r^{(n-1)b} Vol(N) (1 + C_0 r^alpha).

    ``threshold`` is the first radius at which the condition stops holding
    (found by a log scan and a root polish); it is ``None`` for ``b <= 1``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    y = _cross_yamabe(horn, yamabe)
    if y < 0:
        raise HypothesisViolation(f"Yamabe invariant {y} is negative")
    H, rhs = _perturbed_margin(horn, bound, y, r)
    res = _result(float(H), float(rhs))
    if horn.b > 1 and y > 0:
        r_exact = horn_threshold(horn, y)

        def margin(t):
            h, q = _perturbed_margin(horn, bound, y, t)
            return q - h

        grid = np.geomspace(r_exact * 1e-12, 2.0 * r_exact, scan)
        vals = margin(grid)
        bad = np.nonzero(vals <= 0)[0]
        if bad.size == 0:
            res.threshold = math.inf
        elif bad[0] == 0:
            res.threshold = 0.0
        else:
            i = bad[0]
            res.threshold = float(brentq(margin, grid[i - 1], grid[i], xtol=1e-15 * r_exact, rtol=1e-14))
    return res


@dataclass
class ScalIntervalReport:
    """Radii where the exact horn has nonnegative scalar curvature."""

    lower: float
    upper: float
    empty: bool
    scal_cross: float
    coefficient: float

    def to_dict(self) -> dict:
        return {
            "interval": None if self.empty else [self.lower, self.upper],
            "empty": self.empty,
            "scal_cross": self.scal_cross,
            "coefficient": self.coefficient,
        }


def exact_horn_scal_implication(horn: HornMetric) -> ScalIntervalReport:
    """Solve Scal_N r^{-2b} >= b(n-1)(nb-2) r^{-2} for r > 0 (minimum of Scal_N used)."""
    n, b = horn.n, horn.b
    if b <= 1:
        raise HypothesisViolation(f"needs b > 1, got b={b}")
    s = horn.cross.scal_min
    k = b * (n - 1) * (n * b - 2)
    p = 2.0 * b - 2.0

    # b > 1 and n >= 3 give nb > 2, so k > 0 and the inequality reads r^p <= s / k
    if s <= 0:
        return ScalIntervalReport(0.0, 0.0, True, s, k)
    return ScalIntervalReport(0.0, (s / k) ** (1.0 / p), False, s, k)
