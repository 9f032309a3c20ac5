"""Executable acceptance suite.

Each criterion is a function ``(quick: bool) -> CriterionResult`` that
measures the quantities it is about and compares them against fixed
tolerances. ``quick`` swaps long orbits (10^6 steps) for 10^5-step
variants; the only tolerance that moves with it is the Cesaro one, which
is rescaled by the known ``1/n`` rate. The same registry backs
``forel verify`` and the test module, so both report identical numbers.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .analysis import (
    critical_points,
    lmpy_certificate,
    logbarrier_schwarzian_psi,
    lyapunov_exponent,
    schwarzian_scan,
    symmetric_period2,
    topological_entropy_lap,
    verify_certificate,
)
from .bifurcation import band_diameters, compare_attractors, first_bifurcation, sweep, SweepConfig
from .dynamics import MapParams, cesaro_average, iterate, step
from .figures import FIGURES, generate
from .regularizers import (
    CATALOG,
    hct,
    logbarrier,
    perturbed,
    psi,
    psi_derivative,
    schwarzian_psi,
    shannon,
)

RNG_SEED = 20240611
FIGURE_BUDGET_SECONDS = 300.0

# (kind, x, expected): kind "psi" is the link, "xi" is psi(x) + a (x - b)
CONSTANT_TABLE = [
    ("psi", 0.063, 0.5449390463486314),
    ("xi", 0.956, 0.5450794481395858),
    ("xi", 0.9559, 0.5450836794177281),
    ("psi", 0.062, 0.5458384284441133),
    ("psi", 0.991, -1.26049734857964),
    ("xi", 0.062, -1.235161571555887),
    ("xi", 0.063, -1.232810953651368),
    ("psi", 0.99, -1.189231609934426),
    ("psi", 0.52, -0.03369120600501601),
    ("xi", 0.991, -0.02224734857964017),
    ("xi", 0.99, 0.04576839006557365),
    ("psi", 0.47, 0.05052025169168718),
    ("psi", 0.76, -0.4116261583651984),
    ("xi", 0.47, -0.4044797483083129),
    ("xi", 0.52, -0.3261912060050159),
    ("psi", 0.69, -0.3112461911278587),
    ("psi", 0.54, -0.06732925721803665),
    ("xi", 0.69, -0.05124619112785883),
    ("xi", 0.76, 0.07587384163480165),
    ("psi", 0.45, 0.08411125490271053),
    ("psi", 0.8, -0.4602943611198909),
    ("xi", 0.45, -0.4358887450972894),
    ("xi", 0.54, -0.2948292572180365),
    ("psi", 0.65, -0.2486392084062237),
]

PERTURBED_POINT = MapParams(3.25, 0.61)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"[{tag}] {self.number:2d} {self.name}: {parts} ({self.elapsed:.2f} s)"

    def to_dict(self) -> dict:
        return asdict(self)


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(str(_short(x)) for x in v) + "]"
    return str(v)


# ---------------------------------------------------------------------------


def check_constants(quick: bool = False) -> CriterionResult:
    reg, p = perturbed(), PERTURBED_POINT
    t0 = time.perf_counter()
    errors = []
    for kind, x, expected in CONSTANT_TABLE:
        value = psi(reg, x)
        if kind == "xi":
            value += p.a * (x - p.b)
        errors.append(abs(value - expected))
    elapsed = time.perf_counter() - t0
    worst = max(errors)
    ok = worst < 1e-9 and elapsed < 1.0 and len(errors) == 24
    return CriterionResult(1, "constants", ok, {"values": len(errors), "max_abs_error": worst,
                                                  "runtime_s": elapsed})


def check_threshold(quick: bool = False) -> CriterionResult:
    reg, p = perturbed(), PERTURBED_POINT
    threshold = -2.0 * psi_derivative(reg, p.b, 1)
    crit = critical_points(reg, p)
    g = lambda z: 3.25 * z ** 3 - 1.3191 * z ** 2 + 0.377874 * z - 0.050706
    root = brentq(g, 0.0, 0.25, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    err_threshold = abs(threshold - 3.282596521095308)
    err_crit = max(abs(crit[0] - 0.0442303467050842), abs(crit[1] - 0.9557696532949158)) if len(crit) == 2 else math.inf
    err_root = abs(root - 0.2077259768645677)
    # the cubic is a reduction of psi' + a = 0 in z = (x - 1/2)^2
    err_reduction = abs((crit[1] - 0.5) ** 2 - root) if len(crit) == 2 else math.inf
    ok = max(err_threshold, err_crit, err_root, err_reduction) < 1e-9
    return CriterionResult(2, "threshold", ok, {
        "threshold": threshold, "threshold_error": err_threshold, "critical_error": err_crit,
        "cubic_root_error": err_root, "reduction_error": err_reduction,
    })


def check_certificate(quick: bool = False) -> CriterionResult:
    reg, p = perturbed(), PERTURBED_POINT
    t0 = time.perf_counter()
    cert = lmpy_certificate(reg, p, inspected_power=2, odd_n=3, interval=(0.9559, 0.956))
    checked = cert is not None and verify_certificate(reg, p, cert)
    elapsed = time.perf_counter() - t0
    if cert is None:
        return CriterionResult(3, "certificate", False, {"certificate": None, "runtime_s": elapsed})
    f2, f6 = cert.image(2), cert.image(6)
    inside2 = 0.99 <= f2[0] and f2[1] <= 0.991
    inside6 = 0.65 <= f6[0] and f6[1] <= 0.8
    monotone = all(e["monotone"] for e in cert.evidence)
    ok = bool(checked and inside2 and inside6 and monotone and cert.implied_period == 6 and elapsed < 1.0)
    return CriterionResult(3, "certificate", ok, {
        "period": cert.implied_period, "f2": list(f2), "f6": list(f6), "monotone": monotone,
        "resampled": checked, "runtime_s": elapsed,
    })


def check_coexistence(quick: bool = False) -> CriterionResult:
    reg, p = perturbed(), PERTURBED_POINT
    near = iterate(reg, p, p.b + 1e-3, transient=0, keep=10_000)
    hits = np.nonzero(np.abs(near.points - p.b) < 1e-9)[0]
    settle = int(hits[0]) + 1 if hits.size else None
    right = critical_points(reg, p)[-1]
    far = iterate(reg, p, right, transient=3999, keep=201)  # iterates 4000..4200
    gap = float(np.min(np.abs(far.points - p.b)))
    ok = settle is not None and gap >= 1e-3
    return CriterionResult(4, "coexistence", ok, {"nash_reached_at": settle, "chaotic_min_gap": gap})


def check_cesaro(quick: bool = False) -> CriterionResult:
    reg, p = logbarrier(), MapParams(50.0, 0.61)
    n_long, n_short = (10 ** 5, 10 ** 3) if quick else (10 ** 6, 10 ** 4)
    rng = np.random.default_rng(RNG_SEED)
    seeds = rng.uniform(0.0, 1.0, 10)
    long_dev, decreasing = [], []
    for x0 in seeds:
        avg_long, _ = cesaro_average(reg, p, float(x0), n_long)
        avg_short, _ = cesaro_average(reg, p, float(x0), n_short)
        long_dev.append(abs(avg_long - p.b))
        decreasing.append(abs(avg_long - p.b) < abs(avg_short - p.b))
    # the deviation telescopes to (y_n - y_0) / (a n), so shorter runs get a proportional tolerance
    tol = 1e-3 * 10 ** 6 / n_long
    ok = max(long_dev) < tol and all(decreasing)
    return CriterionResult(5, "cesaro", ok, {"n": n_long, "tol": tol, "max_deviation": max(long_dev),
                                             "all_improved": all(decreasing)})


def _reaches(reg, a, seeds, targets, tol=1e-6, steps=10_000):
    p = MapParams(a, 0.5)
    ok = 0
    for x0 in seeds:
        orb = iterate(reg, p, float(x0), transient=0, keep=steps)
        if min(abs(orb.points[-1] - t) for t in targets) < tol:
            ok += 1
    return ok


def check_period2(quick: bool = False) -> CriterionResult:
    reg = shannon()
    rng = np.random.default_rng(RNG_SEED + 1)
    seeds = rng.uniform(0.0, 1.0, 100)
    sigma = symmetric_period2(reg, 10.0)
    if sigma is None:
        return CriterionResult(6, "period2", False, {"sigma": None})
    residual = abs(2.0 * psi(reg, sigma) + 10.0 * (sigma - 0.5))
    swap = abs(step(reg, MapParams(10.0, 0.5), sigma) - (1.0 - sigma))
    caught = _reaches(reg, 10.0, seeds, (sigma, 1.0 - sigma))
    none_at_4 = symmetric_period2(reg, 4.0) is None
    settled_4 = _reaches(reg, 4.0, seeds, (0.5,))
    ok = residual < 1e-10 and swap < 1e-10 and caught == 100 and none_at_4 and settled_4 == 100
    return CriterionResult(6, "period2", ok, {
        "sigma": sigma, "residual": residual, "swap_error": swap, "seeds_on_cycle": caught,
        "none_at_a4": none_at_4, "seeds_at_half_a4": settled_4,
    })


def check_conjugacy(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(RNG_SEED + 2)
    regs = list(CATALOG.values())
    worst_conj = worst_anti = 0.0
    samples = 10_000
    for _ in range(samples):
        reg = regs[rng.integers(len(regs))]
        a = 50.0 * (1.0 - rng.uniform())  # (0, 50]
        b = 1.0 - (1.0 - rng.uniform(1e-6, 1.0 - 1e-6))
        x = 1.0 - (1.0 - rng.uniform(1e-6, 1.0 - 1e-6))
        lhs = step(reg, MapParams(a, b), x)
        rhs = step(reg, MapParams(a, 1.0 - b), 1.0 - x)
        worst_conj = max(worst_conj, abs(1.0 - lhs - rhs))
        worst_anti = max(worst_anti, abs(psi(reg, 1.0 - x) + psi(reg, x)))
    ok = worst_conj < 1e-10 and worst_anti < 1e-10
    return CriterionResult(7, "conjugacy", ok, {"samples": samples, "max_conjugacy_error": worst_conj,
                                                "max_antisymmetry_error": worst_anti})


def check_schwarzian(quick: bool = False) -> CriterionResult:
    reg, p = logbarrier(), MapParams(10.0, 0.61)
    report = schwarzian_scan(reg, p, 1000)
    xs = np.asarray(report.grid)
    closed = logbarrier_schwarzian_psi(xs)
    assembled = schwarzian_psi(reg, xs)
    rel = float(np.max(np.abs(assembled - closed) / np.abs(closed)))
    ok = report.all_negative and len(xs) >= 990 and rel < 1e-8
    return CriterionResult(8, "schwarzian", ok, {"points": len(xs), "max_value": max(report.values),
                                                 "closed_form_rel_error": rel})


def check_entropy(quick: bool = False) -> CriterionResult:
    reg = logbarrier()
    hi, lo = MapParams(150.0, 0.61), MapParams(10.0, 0.61)
    chaotic = topological_entropy_lap(reg, hi, n_max=20)
    # lap counts grow linearly at a = 10, so log(m_k)/k only drops below 0.01 for k in the thousands
    regular = topological_entropy_lap(reg, lo, n_max=2000)
    n = 10 ** 5
    lyap_hi = lyapunov_exponent(reg, hi, 0.3, n=n)
    lyap_lo = lyapunov_exponent(reg, lo, 0.3, n=n)
    ok = chaotic.final > 0.1 and regular.final < 0.01 and lyap_hi > 0.0 and lyap_lo < 0.0
    return CriterionResult(9, "entropy", ok, {
        "h_a150": chaotic.final, "k_a150": len(chaotic.lap_counts), "h_a10": regular.final,
        "k_a10": len(regular.lap_counts), "lyapunov_a150": lyap_hi, "lyapunov_a10": lyap_lo,
    })


def _window_match(windows, lo, hi, slack=1.0):
    """A window whose edges both lie within ``slack`` of (lo, hi)."""
    for w_lo, w_hi in windows:
        if abs(w_lo - lo) <= slack and abs(w_hi - hi) <= slack:
            return (w_lo, w_hi)
    return None


def check_bifurcation(quick: bool = False) -> CriterionResult:
    names = ["logbarrier_exchange", "logbarrier_local", "logbarrier_cascade", "hct_cascade", "hct_escape"]
    data, timing = generate(names)
    total = sum(timing.values())
    measured = {"figure_seconds": total}

    # (i) first bifurcation against the analytic threshold
    shannon_ds = sweep(SweepConfig(4.08, 12.0, 98, 0.5, shannon()))
    cases = {
        "logbarrier": (data["logbarrier_cascade"], logbarrier()),
        "hct": (data["hct_cascade"], hct(0.5)),
        "shannon": (shannon_ds, shannon()),
    }
    first_ok = True
    for label, (ds, reg) in cases.items():
        cfg = ds.config
        cell = (cfg.a_max - cfg.a_min) / cfg.steps
        threshold = -2.0 * psi_derivative(reg, cfg.b, 1)
        a_first = first_bifurcation(ds, 1e-6)
        measured[f"first_{label}"] = a_first
        first_ok &= abs(a_first - threshold) <= cell

    # (ii) coexistence windows
    lb = _window_match(compare_attractors(data["logbarrier_cascade"]).windows, 92.0, 96.0)
    ht = _window_match(compare_attractors(data["hct_cascade"]).windows, 22.5, 24.5)
    measured["window_logbarrier"] = list(lb) if lb else None
    measured["window_hct"] = list(ht) if ht else None
    windows_ok = lb is not None and ht is not None

    # (iii) opposite trends inside the displayed band while the clouds are distinct
    ds = data["logbarrier_exchange"]
    cmp = compare_attractors(ds)
    band = band_diameters(ds, *FIGURES["logbarrier_exchange"].x_window)
    if cmp.windows:
        w_lo, w_hi = max(cmp.windows, key=lambda w: w[1] - w[0])
        mask = (ds.a_values >= w_lo) & (ds.a_values <= w_hi)
        slope_left = float(np.polyfit(ds.a_values[mask], band[mask, 0], 1)[0])
        slope_right = float(np.polyfit(ds.a_values[mask], band[mask, 1], 1)[0])
    else:
        slope_left = slope_right = math.nan
    measured["slope_left"] = slope_left
    measured["slope_right"] = slope_right
    trend_ok = slope_left < 0.0 < slope_right

    ok = first_ok and windows_ok and trend_ok and total < FIGURE_BUDGET_SECONDS
    return CriterionResult(10, "bifurcation", ok, measured)


CRITERIA = {
    "constants": check_constants,
    "threshold": check_threshold,
    "certificate": check_certificate,
    "coexistence": check_coexistence,
    "cesaro": check_cesaro,
    "period2": check_period2,
    "conjugacy": check_conjugacy,
    "schwarzian": check_schwarzian,
    "entropy": check_entropy,
    "bifurcation": check_bifurcation,
}


def run_criterion(name: str, quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    result = CRITERIA[name](quick)
    result.elapsed = time.perf_counter() - t0
    return result


def run_suite(names=None, quick: bool = False, echo=None) -> list[CriterionResult]:
    results = []
    for name in names or list(CRITERIA):
        res = run_criterion(name, quick)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
