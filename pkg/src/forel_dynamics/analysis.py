"""Stability, chaos and regularity diagnostics for ``f_{a,b}``."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .dynamics import MapParams, Orbit, dual_interval_image, step
from .errors import (
    DegenerateOrbitError,
    DomainError,
    InsufficientDataError,
    ParameterError,
    ResolutionError,
    SingularityError,
)
from .regularizers import (
    Regularizer,
    _require_admissible,
    psi,
    psi_derivative,
    psi_inverse,
    schwarzian_psi,
)

NEUTRAL_BAND = 1e-12
CRITICAL_GRID = 10_000
MAX_LAP_ITERATES = 5000
MAX_PARTITION_POINTS = 1_000_000
LYAPUNOV_TRANSIENT = 1000


# ---------------------------------------------------------------------------
# stability

@dataclass
class StabilityReport:
    multiplier: float
    threshold: float
    classification: str
    global_convergence_hypothesis: bool

    def to_dict(self) -> dict:
        return asdict(self)


def third_derivative_negative(reg: Regularizer, grid: int = 1000) -> bool:
    xs = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    return bool(np.all(psi_derivative(reg, xs, 3) < 0.0))


def stability(reg: Regularizer, p: MapParams) -> StabilityReport:
    d = psi_derivative(reg, p.b, 1)
    multiplier = (d + p.a) / d
    gap = abs(multiplier) - 1.0
    if abs(gap) <= NEUTRAL_BAND:
        cls = "neutral"
    elif gap < 0.0:
        cls = "attracting"
    else:
        cls = "repelling"
    return StabilityReport(multiplier, -2.0 * d, cls, third_derivative_negative(reg))


def critical_points(reg: Regularizer, p: MapParams, ncells: int = CRITICAL_GRID) -> list[float]:
    """Solutions of ``psi'(x) + a = 0`` in (0, 1), ascending."""
    _require_admissible(reg)
    return [float(c) for c in K.critical_points(*reg.kernel_args, float(p.a), int(ncells))]


# ---------------------------------------------------------------------------
# periods

def detect_period(orbit: Orbit, tol: float = 1e-9, max_period: int = 64) -> int | None:
    """Smallest period <= ``max_period`` of the retained points, or None."""
    xs = np.asarray(orbit.points)
    if xs.size < 2 * max_period:
        raise InsufficientDataError(
            f"need at least {2 * max_period} retained points, have {xs.size}", parameter="keep"
        )
    for per in range(1, max_period + 1):
        if np.all(np.abs(xs[per:] - xs[:-per]) < tol):
            return per
    return None


def symmetric_period2(reg: Regularizer, a: float, grid: int = 4000) -> float | None:
    """Left point ``sigma`` of the symmetric 2-cycle ``{sigma, 1 - sigma}`` of ``f_{a,1/2}``.

    Solves ``2 psi(s) + a (s - 1/2) = 0`` on (0, 1/2); None below the
    threshold ``a <= -2 psi'(1/2)`` where no such cycle exists.
    """
    if a <= -2.0 * psi_derivative(reg, 0.5, 1):
        return None
    h = lambda s: 2.0 * psi(reg, s) + a * (s - 0.5)
    # geometric grid toward 0 plus a uniform one toward 1/2
    xs = np.unique(np.concatenate([np.geomspace(1e-300, 0.25, grid), np.linspace(0.25, 0.5, grid)[:-1]]))
    hs = 2.0 * psi(reg, xs) + a * (xs - 0.5)
    sign_change = np.nonzero((hs[:-1] > 0.0) & (hs[1:] < 0.0))[0]
    if sign_change.size == 0:
        return None
    i = int(sign_change[0])
    return float(brentq(h, xs[i], xs[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))


# ---------------------------------------------------------------------------
# odd-period certificates

@dataclass
class ChaosCertificate:
    """Witness that ``g^n(x) < x < g(x)`` (or the reverse) on ``J`` for ``g = f^m``.

    ``evidence`` lists the enclosure of ``f^k(J)`` for ``k = 0..n*m`` with the
    evaluated endpoint values in both coordinates, so the claim can be
    rechecked without this library.
    """

    base_period: int
    inspected_map_power: int
    witness_interval: tuple[float, float]
    orientation: str
    evidence: list[dict] = field(default_factory=list)
    regularizer: str = ""
    a: float = math.nan
    b: float = math.nan

    @property
    def implied_period(self) -> int:
        return self.base_period * self.inspected_map_power

    def image(self, k: int) -> tuple[float, float]:
        e = self.evidence[k]
        return e["x_lo"], e["x_hi"]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["witness_interval"] = list(self.witness_interval)
        d["implied_period"] = self.implied_period
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _certify_interval(reg, p, u, v, m, n, crit_duals):
    """Propagate [u, v]; return (orientation, evidence) or None."""
    ylo, yhi = psi(reg, v), psi(reg, u)
    evidence = []
    for k in range(n * m + 1):
        inside = [float(c) for c in crit_duals if ylo < c < yhi]
        evidence.append({
            "step": k,
            "x_lo": psi_inverse(reg, yhi),
            "x_hi": psi_inverse(reg, ylo),
            "y_lo": ylo,
            "y_hi": yhi,
            "monotone": not inside,
            "critical_values_inside": inside,
        })
        if k < m and inside:
            return None  # g is not monotone on J
        if k < n * m:
            ylo, yhi = dual_interval_image(reg, p, ylo, yhi, crit_duals)
    y_u, y_v = evidence[0]["y_hi"], evidence[0]["y_lo"]
    first, last = evidence[m], evidence[n * m]
    # dual coordinate is decreasing in x
    if first["y_hi"] < y_v and last["y_lo"] > y_u:
        return "g(J) above J, g^n(J) below J", evidence
    if first["y_lo"] > y_u and last["y_hi"] < y_v:
        return "g(J) below J, g^n(J) above J", evidence
    return None


def _pointwise_witness(reg, p, xs, m, n):
    args = reg.kernel_args
    y0 = psi(reg, xs)
    y = y0.copy()
    traj = [y0]
    for _ in range(n * m):
        y = K.step_dual_array(*args, p.a, p.b, y)
        traj.append(y)
    g1, gn = traj[m], traj[n * m]
    above_below = (g1 < y0) & (gn > y0)
    below_above = (g1 > y0) & (gn < y0)
    return above_below | below_above


def lmpy_certificate(
    reg: Regularizer,
    p: MapParams,
    inspected_power: int = 1,
    odd_n: int = 3,
    search_grid: int = 1000,
    interval: tuple[float, float] | None = None,
) -> ChaosCertificate | None:
    """Search for (or check) an odd-period witness interval for ``g = f^m``.

    A certificate implies a periodic point of period ``odd_n * m`` for ``f``.
    With ``interval`` given only that interval is checked.
    """
    if odd_n < 3 or odd_n % 2 == 0:
        raise ParameterError(f"odd_n must be an odd integer >= 3, got {odd_n}", parameter="odd_n")
    if inspected_power not in (1, 2):
        raise ParameterError("inspected_power must be 1 or 2", parameter="inspected_power")
    m, n = inspected_power, odd_n
    crit = critical_points(reg, p)
    cd = np.array([psi(reg, c) for c in crit])

    def build(u, v):
        res = _certify_interval(reg, p, u, v, m, n, cd)
        if res is None:
            return None
        orientation, evidence = res
        return ChaosCertificate(n, m, (float(u), float(v)), orientation, evidence, reg.spec, p.a, p.b)

    if interval is not None:
        u, v = interval
        if not 0.0 < u < v < 1.0:
            raise DomainError("witness interval must satisfy 0 < u < v < 1", parameter="interval")
        return build(u, v)

    # the period-3 argument places the witness in (3b - 1, b), mirrored for b > 1/2
    b = p.b
    if b < 0.5:
        lo, hi = max(0.0, 3.0 * b - 1.0), b
    else:
        lo, hi = b, min(1.0, 3.0 * b)
    bracket = np.linspace(lo, hi, search_grid + 2)[1:-1]
    uniform = np.linspace(0.0, 1.0, search_grid + 2)[1:-1]
    for xs in (bracket, uniform):
        ok = _pointwise_witness(reg, p, xs, m, n)
        for x in xs[ok]:
            for h in 10.0 ** -np.arange(3, 10):
                u, v = max(x - h, 0.5 * x), min(x + h, 0.5 * (1.0 + x))
                cert = build(u, v)
                if cert is not None:
                    return cert
    return None


def verify_certificate(reg: Regularizer, p: MapParams, cert: ChaosCertificate, samples: int = 1000) -> bool:
    """Re-check the strict inequalities at sample points of the witness interval."""
    u, v = cert.witness_interval
    xs = np.linspace(u, v, samples)
    y0 = psi(reg, xs)
    y = y0.copy()
    traj = [y0]
    for _ in range(cert.implied_period):
        y = K.step_dual_array(*reg.kernel_args, p.a, p.b, y)
        traj.append(y)
    g1 = traj[cert.inspected_map_power]
    gn = traj[cert.implied_period]
    if cert.orientation.startswith("g(J) above"):
        return bool(np.all((g1 < y0) & (gn > y0)))
    return bool(np.all((g1 > y0) & (gn < y0)))


# ---------------------------------------------------------------------------
# Lyapunov exponent

def lyapunov_exponent(
    reg: Regularizer,
    p: MapParams,
    x0: float,
    n: int = 100_000,
    transient: int = LYAPUNOV_TRANSIENT,
) -> float:
    """Orbit average of ``log|f'(x_k)|`` after discarding ``transient`` steps."""
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"seed must lie in (0, 1), got {x0}", parameter="x0")
    crit = np.array(critical_points(reg, p))
    if crit.size and np.min(np.abs(crit - x0)) < 1e-12:
        x0 = x0 + 1.0 / CRITICAL_GRID if x0 < 0.5 else x0 - 1.0 / CRITICAL_GRID
    value, near = K.lyapunov_sum(*reg.kernel_args, p.a, p.b, float(x0), psi(reg, x0), int(transient), int(n), crit)
    if near > 0.01 * n:
        raise DegenerateOrbitError(
            f"{near} of {n} samples within 1e-12 of a critical point", parameter="x0", a=p.a
        )
    if math.isnan(value):
        raise DegenerateOrbitError("orbit left the representable range", parameter="x0", a=p.a)
    return float(value)


# ---------------------------------------------------------------------------
# topological entropy from lap numbers

@dataclass
class EntropyEstimate:
    lap_counts: list[int]
    estimates: list[float]
    final: float
    truncated: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def topological_entropy_lap(
    reg: Regularizer,
    p: MapParams,
    n_max: int = 20,
    max_points: int = MAX_PARTITION_POINTS,
) -> EntropyEstimate:
    """Lap counts ``m_k`` of ``f^k`` for ``k <= n_max`` and ``log(m_k) / k``.

    The turning points of ``f^{k+1}`` are those of ``f^k`` plus the points
    that ``f^k`` sends onto a critical point of ``f``. Only the values of
    ``f^k`` at the turning points are needed, so they are tracked (in dual
    coordinates) and a critical value is inserted wherever it lies strictly
    between two neighbours.
    """
    if n_max < 1:
        raise ParameterError("n_max must be positive", parameter="n_max")
    truncated = n_max > MAX_LAP_ITERATES
    n_max = min(n_max, MAX_LAP_ITERATES)
    args = reg.kernel_args
    crit = np.array(critical_points(reg, p))
    cd = np.sort(psi(reg, crit)) if crit.size else np.empty(0)
    values = np.array([np.inf, -np.inf])
    counts: list[int] = []
    for _ in range(n_max):
        if cd.size:
            interior = values[1:-1]
            if interior.size:
                xs = K.psi_inv_array(*args, np.ascontiguousarray(interior))
                if np.min(np.abs(xs[:, None] - crit[None, :])) < 1e-14:
                    raise ResolutionError(
                        "a turning value coincides with a critical point to 1e-14",
                        parameter="n_max", lap_iterate=len(counts) + 1,
                    )
            left, right = values[:-1], values[1:]
            lo, hi = np.minimum(left, right), np.maximum(left, right)
            desc = left > right
            pos, ins, key = [], [], []
            for w in cd:
                idx = np.nonzero((lo < w) & (w < hi))[0]
                pos.append(idx)
                ins.append(np.full(idx.size, w))
                key.append(np.where(desc[idx], -w, w))
            pos, ins, key = np.concatenate(pos), np.concatenate(ins), np.concatenate(key)
            order = np.lexsort((key, pos))
            values = np.insert(values, pos[order] + 1, ins[order])
        counts.append(values.size - 1)
        if values.size > max_points:
            truncated = True
            break
        values = K.step_dual_array(*args, p.a, p.b, values)
    estimates = [math.log(mk) / k for k, mk in enumerate(counts, start=1)]
    return EntropyEstimate(counts, estimates, estimates[-1], truncated)


# ---------------------------------------------------------------------------
# Schwarzian derivative

def schwarzian(reg: Regularizer, p: MapParams, x: float) -> float:
    """``S f_{a,b}(x) = S(psi + a id)(x) - f'(x)^2 (S psi)(f(x))``."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x}", parameter="x")
    g1 = psi_derivative(reg, x, 1) + p.a
    if abs(g1) < 1e-12 * max(1.0, p.a):
        raise SingularityError(f"x={x} is a critical point of f", parameter="x")
    g2 = psi_derivative(reg, x, 2)
    g3 = psi_derivative(reg, x, 3)
    s_outer = g3 / g1 - 1.5 * (g2 / g1) ** 2
    fx = step(reg, p, x)
    fprime = g1 / psi_derivative(reg, fx, 1)
    return s_outer - fprime ** 2 * schwarzian_psi(reg, fx)


def logbarrier_schwarzian_psi(x):
    """Closed form of the log-barrier link's Schwarzian."""
    return 6.0 / (x ** 2 + (1.0 - x) ** 2) ** 2


def logbarrier_schwarzian_shifted(x, a):
    """Closed form of ``S(psi(x) + a (x - b))`` for the log-barrier link."""
    num = 6.0 * (1.0 - a * (x ** 4 + (1.0 - x) ** 4))
    den = (x ** 2 + (1.0 - x) ** 2 - a * x ** 2 * (1.0 - x) ** 2) ** 2
    return num / den


@dataclass
class SchwarzianReport:
    grid: list[float]
    values: list[float]
    all_negative: bool

    def to_dict(self) -> dict:
        return asdict(self)


def schwarzian_scan(reg: Regularizer, p: MapParams, grid_size: int = 1000) -> SchwarzianReport:
    """Evaluate the Schwarzian on a uniform grid, skipping critical points."""
    crit = np.array(critical_points(reg, p))
    xs = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    if crit.size:
        xs = xs[np.min(np.abs(xs[:, None] - crit[None, :]), axis=1) > 1e-9]
    vals = [schwarzian(reg, p, float(x)) for x in xs]
    return SchwarzianReport([float(x) for x in xs], vals, bool(all(v < 0.0 for v in vals)))
