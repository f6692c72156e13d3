"""Model cone and horn metrics over a cross section, and asymptotically flat charts.

Cross sections are carried as scalar data (dimension, minimum scalar curvature,
volume, optional spectrum / Yamabe invariant / sectional curvature). Every
closed-form quantity of the warped products dr^2 + r^{2b} g^N used downstream
depends only on these scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import UnsupportedError
from .numerics import sphere_volume

__all__ = [
    "ConeMetric",
    "CrossSection",
    "HornMetric",
    "MetricChart",
    "PerturbationBound",
    "cone_mean_curvature",
    "cone_scalar_curvature",
    "cone_sectional_curvatures",
    "horn_area",
    "horn_mean_curvature",
    "horn_scalar_curvature",
    "verify_perturbation_decay",
]


@dataclass(frozen=True)
class CrossSection:
    """Scalar description of a closed Riemannian manifold (N^m, g^N)."""

    dim: int
    scal_min: float
    volume: float
    spectrum: Optional["DiracSpectrum"] = None  # noqa: F821 - defined in spectral
    yamabe: Optional[float] = None
    sectional_constant: Optional[float] = None
    round_sphere: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("cross section dimension must be >= 1")
        if not self.volume > 0:
            raise ValueError("cross section volume must be positive")
        if self.round_sphere:
            m = self.dim
            if self.sectional_constant not in (None, 1.0):
                raise ValueError("a unit round sphere has sectional curvature 1")
            if not math.isclose(self.scal_min, m * (m - 1), rel_tol=1e-12, abs_tol=1e-12):
                raise ValueError(f"unit round S^{m} has scalar curvature {m * (m - 1)}")

    @classmethod
    def unit_round_sphere(cls, m: int, kmax: int = 20) -> "CrossSection":
        """The unit round S^m with its Dirac spectrum truncated at ``kmax``."""
        from .horn import yamabe_round_sphere
        from .spectral import sphere_spectrum

        return cls(
            dim=m,
            scal_min=float(m * (m - 1)),
            volume=sphere_volume(m),
            spectrum=sphere_spectrum(m + 1, kmax),
            yamabe=yamabe_round_sphere(m) if m >= 2 else None,
            sectional_constant=1.0,
            round_sphere=True,
        )


@dataclass(frozen=True)
class ConeMetric:
    n: int
    cross: CrossSection

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("cone dimension must be >= 3")
        if self.n != self.cross.dim + 1:
            raise ValueError(f"cone of dimension {self.n} needs a {self.n - 1}-dimensional cross section")


@dataclass(frozen=True)
class HornMetric:
    """dr^2 + r^{2b} g^N; ``b = 1`` is the cone."""

    n: int
    cross: CrossSection
    b: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("horn dimension must be >= 3")
        if self.n != self.cross.dim + 1:
            raise ValueError(f"horn of dimension {self.n} needs a {self.n - 1}-dimensional cross section")
        if not self.b > 0:
            raise ValueError("horn exponent b must be positive")

    def as_cone(self) -> ConeMetric:
        return ConeMetric(self.n, self.cross)


def _check_radius(r: float) -> None:
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")


def cone_scalar_curvature(cone: ConeMetric, r: float) -> float:
    """(Scal_N - (n-1)(n-2)) / r^2, evaluated with the minimum of Scal_N."""
    _check_radius(r)
    n = cone.n
    return (cone.cross.scal_min - (n - 1) * (n - 2)) / r**2


def horn_scalar_curvature(horn: HornMetric, r: float) -> float:
    _check_radius(r)
    if horn.b == 1:
        return cone_scalar_curvature(horn.as_cone(), r)
    n, b = horn.n, horn.b
    return horn.cross.scal_min / r ** (2 * b) - b * (n - 1) * (n * b - 2) / r**2


def cone_mean_curvature(cone: ConeMetric, r: float) -> float:
    """Mean curvature (trace of the shape operator) of {r} x N with respect to d/dr."""
    _check_radius(r)
    return (cone.n - 1) / r


def horn_mean_curvature(horn: HornMetric, r: float) -> float:
    _check_radius(r)
    if horn.b == 1:
        return cone_mean_curvature(horn.as_cone(), r)
    return (horn.n - 1) * horn.b / r


def cone_area(cone: ConeMetric, r: float) -> float:
    _check_radius(r)
    return r ** (cone.n - 1) * cone.cross.volume


def horn_area(horn: HornMetric, r: float) -> float:
    """Volume of {r} x N in the induced metric r^{2b} g^N."""
    _check_radius(r)
    if horn.b == 1:
        return cone_area(horn.as_cone(), r)
    return r ** ((horn.n - 1) * horn.b) * horn.cross.volume


def cone_sectional_curvatures(cone: ConeMetric, r: float) -> tuple[float, float]:
    """Sectional curvatures of planes containing d/dr and of planes tangent to N_r.

    Needs a space-form cross section with constant curvature ``kappa``; the
    tangential value is ``(kappa - 1) / r^2`` and radial planes are flat.
    """
    _check_radius(r)
    kappa = cone.cross.sectional_constant
    if kappa is None:
        raise UnsupportedError("sectional curvatures need a constant-curvature cross section")
    return 0.0, (kappa - 1.0) / r**2


def horn_sectional_curvatures(horn: HornMetric, r: float) -> tuple[float, float]:
    """Warped-product sectional curvatures for f(r) = r^b.

    Radial planes: -f''/f = -b(b-1)/r^2. Tangential planes: (kappa - f'^2)/f^2.
    """
    _check_radius(r)
    if horn.b == 1:
        return cone_sectional_curvatures(horn.as_cone(), r)
    kappa = horn.cross.sectional_constant
    if kappa is None:
        raise UnsupportedError("sectional curvatures need a constant-curvature cross section")
    b = horn.b
    return -b * (b - 1) / r**2, kappa / r ** (2 * b) - b**2 / r**2


@dataclass
class MetricChart:
    """A metric on (part of) R^n given by its components.

    ``metric`` maps an array of points of shape ``(..., n)`` to component
    matrices of shape ``(..., n, n)``. ``region`` is the annulus
    ``inner < |x| < outer`` on which the chart is valid.
    """

    n: int
    metric: Callable[[np.ndarray], np.ndarray]
    tau: float
    region: tuple[float, float] = (0.0, math.inf)
    conformal_factor: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "chart"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.metric(np.asarray(x, dtype=float))

    def contains(self, radius: float) -> bool:
        return self.region[0] < radius < self.region[1]

    @classmethod
    def flat(cls, n: int = 3) -> "MetricChart":
        def metric(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()

        return cls(n, metric, tau=math.inf, conformal_factor=lambda x: np.ones(np.shape(x)[:-1]), name="flat")

    @classmethod
    def conformally_flat(
        cls,
        n: int,
        factor: Callable[[np.ndarray], np.ndarray],
        tau: float,
        region: tuple[float, float] = (0.0, math.inf),
        name: str = "conformally-flat",
    ) -> "MetricChart":
        """g = u^{4/(n-2)} delta for a positive conformal factor u."""
        power = 4.0 / (n - 2)

        def metric(x):
            x = np.asarray(x, dtype=float)
            u = np.asarray(factor(x), dtype=float)
            return (u**power)[..., None, None] * np.eye(n)

        return cls(n, metric, tau=tau, region=region, conformal_factor=factor, name=name)


def decay_order_threshold(n: int) -> float:
    """Lower bound (n-2)/2 that the decay order of an AF chart must exceed."""
    return (n - 2) / 2


def validate_chart(chart: MetricChart, radii: Sequence[float], directions: int = 16, seed: int = 0) -> dict:
    """Sample a chart for symmetry, positive definiteness and decay.

    Returns a report with the largest ``|g - I| * rho^tau`` seen and whether
    ``tau`` exceeds ``(n-2)/2``.
    """
    rng = np.random.default_rng(seed)
    worst_sym = 0.0
    min_eig = math.inf
    decay = 0.0
    for R in radii:
        if not chart.contains(R):
            raise ValueError(f"radius {R} outside chart region {chart.region}")
        d = rng.normal(size=(directions, chart.n))
        x = R * d / np.linalg.norm(d, axis=1, keepdims=True)
        g = chart(x)
        worst_sym = max(worst_sym, float(np.max(np.abs(g - np.swapaxes(g, -1, -2)))))
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(g))))
        dev = float(np.max(np.linalg.norm(g - np.eye(chart.n), axis=(-2, -1))))
        if math.isfinite(chart.tau):
            decay = max(decay, dev * R**chart.tau)
        else:
            decay = max(decay, dev)
    return {
        "symmetric": worst_sym <= 1e-12,
        "positive_definite": min_eig > 0,
        "min_eigenvalue": min_eig,
        "decay_constant": decay,
        "tau": chart.tau,
        "tau_threshold": decay_order_threshold(chart.n),
        "tau_admissible": chart.tau > decay_order_threshold(chart.n),
    }


@dataclass(frozen=True)
class PerturbationBound:
    """|nabla^k h| <= C_k r^{alpha - k} for k = 0, 1, 2 near the singular point."""

    alpha: float
    constants: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if len(self.constants) != 3 or any(c < 0 for c in self.constants):
            raise ValueError("need three nonnegative constants C_0, C_1, C_2")


@dataclass
class DecayReport:
    ratios: list[float]
    passed: list[bool] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.passed)


def verify_perturbation_decay(
    norms: dict[int, Callable[[np.ndarray], np.ndarray]] | Sequence[Callable],
    bound: PerturbationBound,
    radii: Sequence[float],
) -> DecayReport:
    """Compare sampled norms of nabla^k h against ``C_k r^{alpha-k}``.

    ``norms[k]`` returns the model-metric norm of the k-th covariant derivative of
    the perturbation at the given radii. For each k the report holds
    ``max_r |nabla^k h| r^{k - alpha}`` and whether it stays below ``C_k``.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0:
        raise ValueError("need at least one sample radius")
    if np.any(radii <= 0) or np.any(radii >= 1):
        raise ValueError("sample radii must lie in (0, 1)")
    if not isinstance(norms, dict):
        norms = dict(enumerate(norms))
    ratios, passed = [], []
    for k in range(3):
        if k not in norms:
            ratios.append(0.0)
            passed.append(True)
            continue
        vals = np.abs(np.asarray(norms[k](radii), dtype=float))
        ratio = float(np.max(vals * radii ** (k - bound.alpha)))
        ratios.append(ratio)
        passed.append(ratio <= bound.constants[k])
    return DecayReport(ratios, passed)

