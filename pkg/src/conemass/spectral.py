"""Dirac spectra of cross sections, indicial roots and critical weights.

A spectrum is treated as a finite window of eigenvalues; statements about
criticality are only meaningful inside the window of indicial roots that the
listed eigenvalues cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import HypothesisViolation

__all__ = [
    "DiracSpectrum",
    "FriedrichReport",
    "WeightPair",
    "check_friedrich",
    "delta_zero",
    "friedrich_bound",
    "is_critical_at_cone",
    "is_critical_at_infinity",
    "noncritical_window",
    "nu_exponent",
    "sphere_spectrum",
    "spectrum_flip",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class DiracSpectrum:
    eigenvalues: tuple[float, ...]
    multiplicities: Optional[tuple[int, ...]] = None
    source: str = "user"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ev = tuple(float(x) for x in self.eigenvalues)
        mult = self.multiplicities
        if mult is not None:
            mult = tuple(int(m) for m in mult)
            if len(mult) != len(ev):
                raise ValueError("multiplicities must match eigenvalues")
            if any(m <= 0 for m in mult):
                raise ValueError("multiplicities must be positive")
        if any(not math.isfinite(x) for x in ev):
            raise ValueError("eigenvalues must be finite")
        order = sorted(range(len(ev)), key=ev.__getitem__)
        object.__setattr__(self, "eigenvalues", tuple(ev[i] for i in order))
        if mult is not None:
            object.__setattr__(self, "multiplicities", tuple(mult[i] for i in order))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def array(self) -> np.ndarray:
        return np.array(self.eigenvalues)

    def nu_values(self, n: int) -> np.ndarray:
        return np.sort(nu_exponent(self.array(), n))

    def largest_negative(self) -> float:
        neg = [x for x in self.eigenvalues if x < 0]
        if not neg:
            raise HypothesisViolation("spectrum has no negative eigenvalue")
        return max(neg)

    def to_dict(self) -> dict:
        d = {"eigenvalues": list(self.eigenvalues), "source": self.source}
        if self.multiplicities is not None:
            d["multiplicities"] = list(self.multiplicities)
        d.update(self.params)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DiracSpectrum":
        if d.get("source") == "round_sphere":
            return sphere_spectrum(int(d["n"]), int(d["kmax"]))
        return cls(tuple(d["eigenvalues"]), tuple(d["multiplicities"]) if d.get("multiplicities") else None)


@dataclass(frozen=True)
class WeightPair:
    """Weights at the conical point (``delta``) and at infinity (``beta``)."""

    delta: float
    beta: float

    def is_critical(self, spec: DiracSpectrum, n: int, tol: float = DEFAULT_TOL) -> bool:
        return is_critical_at_cone(self.delta, spec, n, tol) or is_critical_at_infinity(self.beta, n, tol)


def sphere_spectrum(n: int, kmax: int) -> DiracSpectrum:
    """Dirac eigenvalues +-((n-1)/2 + k), 0 <= k <= kmax, of the unit round S^{n-1}."""
    if n < 3:
        raise ValueError("need n >= 3")
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    pos = [(n - 1) / 2 + k for k in range(kmax + 1)]
    return DiracSpectrum(tuple([-x for x in pos] + pos), source="round_sphere", params={"n": n, "kmax": kmax})


def nu_exponent(lam, n: int):
    """Indicial root -(n-1)/2 - lambda of the radial Dirac mode with eigenvalue lambda."""
    if n < 3:
        raise ValueError("need n >= 3")
    return -(n - 1) / 2 - lam


def is_critical_at_cone(delta: float, spec: DiracSpectrum, n: int, tol: float = DEFAULT_TOL) -> bool:
    if len(spec) == 0:
        raise ValueError("empty spectrum")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return bool(np.min(np.abs(delta - spec.nu_values(n))) <= tol)


def is_critical_at_infinity(beta: float, n: int, tol: float = DEFAULT_TOL) -> bool:
    """Membership of beta in {0, 1, 2, ...} u {1-n, -n, -n-1, ...}."""
    if n < 3:
        raise ValueError("need n >= 3")
    k = round(beta)
    if abs(beta - k) > tol:
        return False
    return k >= 0 or k <= 1 - n


def friedrich_bound(n: int, scal_min: float) -> float:
    """(1/2) sqrt((n-1)/(n-2) * min Scal_N), the lower bound on |lambda|."""
    if n < 3:
        raise ValueError("need n >= 3")
    if scal_min < 0:
        raise HypothesisViolation("the eigenvalue bound needs nonnegative scalar curvature")
    return 0.5 * math.sqrt((n - 1) / (n - 2) * scal_min)


@dataclass
class FriedrichReport:
    bound: float
    dimension_bound: float
    dimension_bound_engaged: bool
    violations: list[float]
    equality_eigenvalues: list[float]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def equality(self) -> bool:
        return bool(self.equality_eigenvalues)

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "dimension_bound": self.dimension_bound,
            "dimension_bound_engaged": self.dimension_bound_engaged,
            "violations": self.violations,
            "equality_eigenvalues": self.equality_eigenvalues,
            "passed": self.passed,
        }


def check_friedrich(spec: DiracSpectrum, n: int, scal_min: float, tol: float = DEFAULT_TOL) -> FriedrichReport:
    """Check every eigenvalue against the scalar-curvature bound.

    ``dimension_bound`` is (n-1)/2, which the scalar-curvature bound dominates
    once ``scal_min >= (n-1)(n-2)``.
    """
    bound = friedrich_bound(n, scal_min)
    ev = spec.array()
    absev = np.abs(ev)
    return FriedrichReport(
        bound=bound,
        dimension_bound=(n - 1) / 2,
        dimension_bound_engaged=scal_min >= (n - 1) * (n - 2),
        violations=[float(x) for x in ev[absev < bound - tol]],
        equality_eigenvalues=[float(x) for x in ev[np.abs(absev - bound) <= tol]],
    )


def delta_zero(spec: DiracSpectrum, n: int) -> float:
    """(1-n)/2 minus the largest negative eigenvalue."""
    return (1 - n) / 2 - spec.largest_negative()


def spectrum_flip(spec: DiracSpectrum) -> DiracSpectrum:
    """Spectrum after Clifford multiplication by d/dr, which sends lambda to -lambda."""
    ev = tuple(-x for x in spec.eigenvalues)
    mult = spec.multiplicities
    params = dict(spec.params)
    return DiracSpectrum(ev, mult, source=spec.source, params=params)


def noncritical_window(
    spec: DiracSpectrum, n: int, interval: Sequence[float], tol: float = DEFAULT_TOL
) -> list[tuple[float, float]]:
    """Maximal open subintervals of ``interval`` containing no critical cone weight."""
    # a gap no wider than 2 tol has every point within tol of a critical weight
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("interval must be bounded")
    if hi <= lo:
        return []
    nus = spec.nu_values(n)
    cuts = [lo] + [float(v) for v in nus if lo + tol < v < hi - tol] + [hi]
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b - a > 2 * tol]
