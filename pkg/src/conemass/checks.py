"""Acceptance checks shared by the ``selftest`` subcommand and the test suite.

Each check returns a :class:`CheckResult` with a pass flag and the measured
quantities, so failures can be reported without rerunning anything.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    ConeMetric,
    CrossSection,
    HornMetric,
    MetricChart,
    cone_area,
    cone_mean_curvature,
    cone_scalar_curvature,
    cone_sectional_curvatures,
    horn_area,
    horn_mean_curvature,
    horn_scalar_curvature,
    horn_sectional_curvatures,
)
from .horn import BoundaryData, herzlich_condition, herzlich_condition_3d, horn_threshold
from .mass import adm_mass, horn_expansion_fit, schwarzschild_chart
from .modes import (
    LogMode,
    PowerSum,
    RadialMode,
    decay_jump_fit,
    dirac_mode_apply,
    dirac_mode_solve,
    green_mode,
    perturbed_harmonic_mode,
)
from .numerics import central_difference
from .spectral import (
    DiracSpectrum,
    check_friedrich,
    delta_zero,
    friedrich_bound,
    is_critical_at_cone,
    is_critical_at_infinity,
    noncritical_window,
    nu_exponent,
    sphere_spectrum,
)
from .weighted import estimate_identity_check, estimate_inequality_check

__all__ = ["CheckResult", "ACCEPTANCE_CHECKS", "run_all"]


@dataclass
class CheckResult:
    index: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.index:2d} {self.name}"

    def to_dict(self) -> dict:
        return {"index": self.index, "name": self.name, "passed": self.passed, "detail": self.detail}


def check_flat_mass() -> tuple[bool, dict]:
    t = time.perf_counter()
    res = adm_mass(MetricChart.flat(3), (20.0, 40.0, 80.0))
    dt = time.perf_counter() - t
    return abs(res.limit) <= 1e-8 and dt < 5.0, {"limit": res.limit, "seconds": dt}


def check_schwarzschild_mass() -> tuple[bool, dict]:
    vals = {}
    ok = True
    for m in (1.0, 2.0):
        lim = adm_mass(schwarzschild_chart(m, "positive"), (20.0, 40.0, 80.0)).limit
        vals[m] = lim
        ok &= abs(lim - m) <= 0.01 * m
    ratio = vals[2.0] / vals[1.0]
    ok &= abs(ratio - 2.0) <= 0.01
    return bool(ok), {"m1": vals[1.0], "m2": vals[2.0], "ratio": ratio}


def check_negative_schwarzschild() -> tuple[bool, dict]:
    ms = np.array([0.5, 1.0, 2.0])
    res = [adm_mass(schwarzschild_chart(m, "negative"), (20.0, 40.0, 80.0)) for m in ms]
    std = np.array([r.limits["standard"] for r in res])
    omega_norm = np.array([r.limits["omega"] for r in res])
    slope, icpt = np.polyfit(ms, std, 1)
    pred = slope * ms + icpt
    r2 = 1.0 - np.sum((std - pred) ** 2) / np.sum((std - std.mean()) ** 2)
    ok = bool(np.all(std < 0) and r2 >= 0.999)
    return ok, {
        "standard": std.tolist(),
        "omega": omega_norm.tolist(),
        "r_squared": float(r2),
        "constant_standard": float(slope),
        "constant_omega": float(np.polyfit(ms, omega_norm, 1)[0]),
    }


def check_horn_expansion() -> tuple[bool, dict]:
    ok = True
    out = {}
    for m in (0.5, 1.0, 2.0):
        e, c, _ = horn_expansion_fit(m)
        c_ref = 12 ** (4 / 3) / 4 * m ** (2 / 3)
        out[str(m)] = {"exponent": e, "c": c, "c_ref": c_ref}
        ok &= abs(e - 4 / 3) <= 0.01 and abs(c / c_ref - 1) <= 0.01
    return bool(ok), out


def check_criticality() -> tuple[bool, dict]:
    grid = np.arange(-10.0, 10.0 + 1e-12, 0.25)
    mismatches = []
    for n in range(3, 8):
        spec = sphere_spectrum(n, 20)
        for w in grid:
            if is_critical_at_cone(w, spec, n, 1e-9) != is_critical_at_infinity(w, n, 1e-9):
                mismatches.append((n, float(w)))
    return not mismatches, {"mismatches": mismatches, "points": int(5 * grid.size)}


def random_admissible_spectrum(rng: np.random.Generator, n: int) -> tuple[DiracSpectrum, float]:
    """Spectrum respecting the eigenvalue bound for Scal_N >= (n-1)(n-2)."""
    scal = (n - 1) * (n - 2) * (1.0 + 2.0 * rng.random())
    b = friedrich_bound(n, scal)
    k = int(rng.integers(1, 12))
    mags = b + rng.exponential(2.0, size=k)
    signs = rng.choice([-1.0, 1.0], size=k)
    signs[0] = -1.0
    return DiracSpectrum(tuple(mags * signs)), scal


def check_friedrich_bound() -> tuple[bool, dict]:
    ok = True
    round_info = {}
    for n in range(3, 8):
        spec = sphere_spectrum(n, 10)
        rep = check_friedrich(spec, n, (n - 1) * (n - 2))
        eq = sorted(rep.equality_eigenvalues)
        good = rep.passed and eq == [-(n - 1) / 2, (n - 1) / 2] and delta_zero(spec, n) == 0.0
        round_info[n] = good
        ok &= good
    rng = np.random.default_rng(20261015)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(3, 8))
        spec, scal = random_admissible_spectrum(rng, n)
        if not check_friedrich(spec, n, scal).passed or delta_zero(spec, n) < 0:
            bad += 1
    ok &= bad == 0
    return bool(ok), {"round": round_info, "random_failures": bad}


def random_polynomial_mode(rng: np.random.Generator) -> RadialMode:
    n = int(rng.integers(3, 8))
    lam = float(rng.choice(sphere_spectrum(n, 4).eigenvalues))
    coeffs = rng.normal(size=int(rng.integers(1, 6)))
    return RadialMode.from_terms(lam, n, PowerSum.polynomial(coeffs), interval=(0.0, 1.0))


def check_mode_round_trip() -> tuple[bool, dict]:
    rng = np.random.default_rng(7)
    r = np.linspace(0.01, 1.0, 200)
    worst = 0.0
    for _ in range(100):
        u = random_polynomial_mode(rng)
        r1 = float(rng.uniform(0.1, 1.0))
        back = dirac_mode_solve(u.lam, u.n, dirac_mode_apply(u), (r1, float(u(r1))))
        worst = max(worst, float(np.max(np.abs(back(r) - u(r)))))
    hom = 0.0
    for n in range(3, 8):
        for lam in sphere_spectrum(n, 4).eigenvalues:
            v = dirac_mode_apply(RadialMode.homogeneous(lam, n))
            hom = max(hom, float(np.max(np.abs(v(r)))))
    return worst <= 1e-8 and hom <= 1e-10, {"round_trip_sup": worst, "homogeneous_sup": hom}


def check_green_estimate() -> tuple[bool, dict]:
    rng = np.random.default_rng(11)
    n = 3
    spec = sphere_spectrum(n, 6)
    violations = 0
    boundary = 0.0
    count = 0
    for lam in (-3.0, -2.0, -1.0, 1.0, 2.0):
        nu = nu_exponent(lam, n)
        windows = noncritical_window(DiracSpectrum((lam,)), n, (nu - 3.0, nu + 3.0))
        deltas = []
        while len(deltas) < 5:
            d = float(rng.uniform(nu - 3.0, nu + 3.0))
            if abs(d - nu) > 0.05 and any(a < d < b for a, b in windows) and not is_critical_at_cone(d, spec, n):
                deltas.append(d)
        for delta in deltas:
            for _ in range(100):
                r0 = float(rng.uniform(0.1, 0.5))
                k = int(rng.integers(1, 4))
                exps = delta - 1.0 + rng.uniform(0.05, 3.0, size=k)
                coef = rng.normal(size=k)
                # scale so the particular-solution terms sum to 1 in size at 2 r0;
                # the absolute boundary tolerance then measures round-off only
                size = np.sum(np.abs(coef / (exps + 1 - nu)) * (2 * r0) ** (exps + 1))
                v = RadialMode(lam, n, (0.0, 2 * r0), terms=PowerSum(tuple(zip(coef / size, exps))))
                g = green_mode(lam, n, delta, r0, v)
                count += 1
                if not g.estimate_holds:
                    violations += 1
                if g.representative == "outer-dirichlet":
                    boundary = max(boundary, abs(float(g.mode(2 * r0))))
    return violations == 0 and boundary <= 1e-12, {"cases": count, "violations": violations, "max_boundary": boundary}


def check_decay_jump() -> tuple[bool, dict]:
    n = 3
    spec = sphere_spectrum(n, 20)
    lam = -1.0
    nu = nu_exponent(lam, n)
    r0 = 0.5
    delta, dp = -0.5, 0.5
    u = RadialMode.from_terms(lam, n, [(3.0, nu), (1.0, dp + 0.1)], interval=(0.0, 2 * r0))
    fit = decay_jump_fit(u, delta, dp, spec, n, r0)
    fine = decay_jump_fit(u, delta, dp, spec, n, r0, window=(r0 / 1000, r0 / 100))
    c = fit.coefficients.get(nu, math.nan)
    drift = max(abs(fit.coefficients[k] - fine.coefficients[k]) for k in fit.coefficients)
    # two indicial roots in the window, only one present in u
    wide = decay_jump_fit(u, delta, 1.5, spec, n, r0)
    ok = abs(c - 3.0) <= 1e-6 and math.isfinite(fit.remainder_norm) and drift <= 1e-8
    ok &= abs(wide.coefficients.get(nu, math.nan) - 3.0) <= 1e-6 and abs(wide.coefficients.get(1.0, math.nan)) <= 1e-6
    return bool(ok), {
        "coefficient": c,
        "remainder_norm": fit.remainder_norm,
        "window_drift": drift,
        "two_root_fit": {str(k): v for k, v in wide.coefficients.items()},
    }


def check_perturbed_mode() -> tuple[bool, dict]:
    n, lam, alpha, C, r0 = 3, -2.0, 0.5, 1.0, 0.05
    nu = nu_exponent(lam, n)
    pm = perturbed_harmonic_mode(lam, n, r0, eps=lambda r: C * r ** (alpha - 1), C=C, alpha=alpha)
    slope, _, _ = pm.correction_exponent()
    r = pm.mode.nodes
    exact = r**nu * np.exp(-C * r**alpha / alpha)
    oracle = float(np.max(np.abs(pm.mode.values - exact) / np.abs(exact)))
    free = perturbed_harmonic_mode(lam, n, r0)
    exact_free = bool(np.array_equal(free.mode.values, free.mode.nodes**nu))
    ok = slope >= nu + 0.45 and exact_free and pm.residual <= 1e-8
    return bool(ok), {
        "nu": nu,
        "correction_exponent": slope,
        "residual": pm.residual,
        "oracle_rel_error": oracle,
        "unperturbed_exact": exact_free,
    }


def random_log_mode(rng: np.random.Generator) -> tuple[LogMode, float]:
    """Smooth u~(s) = sum a_k e^{m_k s} cos(w_k s) on [-60, 0] and a weight below every m_k."""
    n = int(rng.integers(3, 8))
    lam = float(rng.choice(sphere_spectrum(n, 3).eigenvalues))
    a0 = (n - 1) / 2 + lam
    while True:
        delta = float(rng.uniform(-4.0, 4.0))
        if abs(a0 + delta) > 0.05:
            break
    k = int(rng.integers(1, 4))
    amp = rng.normal(size=k)
    rates = delta + rng.uniform(0.5, 3.0, size=k)
    freqs = rng.uniform(0.0, 3.0, size=k)

    def f(s):
        s = np.asarray(s, dtype=float)[..., None]
        return np.sum(amp * np.exp(rates * s) * np.cos(freqs * s), axis=-1)

    def df(s):
        s = np.asarray(s, dtype=float)[..., None]
        e = np.exp(rates * s)
        return np.sum(amp * e * (rates * np.cos(freqs * s) - freqs * np.sin(freqs * s)), axis=-1)

    return LogMode(lam, n, (-60.0, 0.0), f, df), delta


def check_estimate_identity() -> tuple[bool, dict]:
    rng = np.random.default_rng(3)
    worst = 0.0
    violations = 0
    for _ in range(100):
        ut, delta = random_log_mode(rng)
        chk = estimate_identity_check(ut, ut.lam, ut.n, delta)
        worst = max(worst, chk.rel_diff)
        if not estimate_inequality_check(ut, ut.lam, ut.n, delta).holds:
            violations += 1
    return worst <= 1e-8 and violations == 0, {"max_rel_diff": worst, "violations": violations}


def check_herzlich() -> tuple[bool, dict]:
    flat = herzlich_condition(BoundaryData(2, 4 * math.pi, 2.0, 8 * math.pi), 3)
    eq = abs(flat.lhs - flat.rhs)
    horn = HornMetric(3, CrossSection.unit_round_sphere(2), 1.5)
    thr = horn_threshold(horn)
    rng = np.random.default_rng(5)
    worst = 0.0
    agree = True
    for _ in range(100):
        bd = BoundaryData(2, float(rng.uniform(0.01, 100.0)), float(rng.uniform(-5, 5)), 8 * math.pi)
        g, s = herzlich_condition(bd, 3), herzlich_condition_3d(bd)
        worst = max(worst, abs(g.rhs - s.rhs) / s.rhs)
        agree &= g.satisfied == s.satisfied
    ok = eq <= 1e-12 and flat.satisfied and abs(thr - 4 / 9) <= 1e-9 and worst <= 1e-12 and agree
    return bool(ok), {"equality_gap": eq, "threshold": thr, "form_rel_diff": worst}


def check_geometry() -> tuple[bool, dict]:
    worst_log = 0.0
    identical = True
    flat_max = 0.0
    radii = (0.01, 0.3, 1.0, 7.5)
    for n in range(3, 8):
        S = CrossSection.unit_round_sphere(n - 1, kmax=2)
        for b in (0.5, 1.0, 1.5, 2.0, 3.0):
            h = HornMetric(n, S, b)
            for r in radii:
                dlog = central_difference(lambda t: math.log(horn_area(h, t)), r, 1.0, 1e-3 * r)
                H = horn_mean_curvature(h, r)
                worst_log = max(worst_log, abs(dlog - H) / abs(H))
        cone = ConeMetric(n, S)
        h1 = HornMetric(n, S, 1.0)
        for r in radii:
            identical &= horn_scalar_curvature(h1, r) == cone_scalar_curvature(cone, r)
            identical &= horn_mean_curvature(h1, r) == cone_mean_curvature(cone, r)
            identical &= horn_area(h1, r) == cone_area(cone, r)
            identical &= horn_sectional_curvatures(h1, r) == cone_sectional_curvatures(cone, r)
            flat_max = max(flat_max, abs(cone_scalar_curvature(cone, r)), *map(abs, cone_sectional_curvatures(cone, r)))
    ok = worst_log <= 1e-8 and identical and flat_max == 0.0
    return bool(ok), {"dlogA_minus_H": worst_log, "b1_identical": bool(identical), "round_cone_curvature": flat_max}


ACCEPTANCE_CHECKS: list[tuple[str, Callable[[], tuple[bool, dict]]]] = [
    ("flat-space mass", check_flat_mass),
    ("Schwarzschild mass", check_schwarzschild_mass),
    ("negative-mass Schwarzschild", check_negative_schwarzschild),
    ("horn expansion", check_horn_expansion),
    ("spectrum/criticality", check_criticality),
    ("eigenvalue bound", check_friedrich_bound),
    ("mode round trip", check_mode_round_trip),
    ("Green-operator estimate", check_green_estimate),
    ("decay jump", check_decay_jump),
    ("perturbed harmonic mode", check_perturbed_mode),
    ("estimate identity", check_estimate_identity),
    ("Herzlich suite", check_herzlich),
    ("geometry identities", check_geometry),
]


def run_check(index: int) -> CheckResult:
    name, fn = ACCEPTANCE_CHECKS[index - 1]
    t = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return CheckResult(index, name, bool(passed), detail, time.perf_counter() - t)


def run_all() -> list[CheckResult]:
    return [run_check(i) for i in range(1, len(ACCEPTANCE_CHECKS) + 1)]
