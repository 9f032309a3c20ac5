"""The interval map induced by FoReL learning and its orbits.

With ``y = psi(x)`` the learning rule is exact in dual coordinates,
``y' = y + a (psi^{-1}(y) - b)``, so orbits are always advanced there and
the primal value is recovered by one inversion per step.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import _kernels as K
from .errors import (
    CertificationError,
    ConvergenceError,
    DomainError,
    NormalizationError,
    ParameterError,
)
from .regularizers import Regularizer, _require_admissible, psi, psi_inverse

DEFAULT_TRANSIENT = 4000
DEFAULT_KEEP = 200


@dataclass(frozen=True)
class GameParams:
    alpha: float
    beta: float
    N: float
    epsilon: float

    def __post_init__(self):
        for name in ("alpha", "beta", "N", "epsilon"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive, got {v}", parameter=name)


@dataclass(frozen=True)
class MapParams:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ParameterError(f"a must be positive, got {self.a}", parameter="a")
        if not (0.0 < self.b < 1.0):
            raise ParameterError(f"b must lie in (0, 1), got {self.b}", parameter="b")


def to_map_params(game: GameParams) -> MapParams:
    if abs(game.alpha + game.beta - 1.0) > 1e-12:
        raise NormalizationError(
            f"alpha + beta must equal 1, got {game.alpha + game.beta!r}", parameter="alpha"
        )
    return MapParams(a=game.N * game.epsilon, b=game.beta)


def _raise_if_nan(vals, reg, what):
    if np.isnan(vals).any():
        raise ConvergenceError(f"inversion of {reg.spec} failed during {what}", parameter="y")


def step(reg: Regularizer, p: MapParams, x):
    """``f_{a,b}(x)`` with ``f(0) = 0`` and ``f(1) = 1``."""
    _require_admissible(reg)
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError("x must lie in [0, 1]", parameter="x")
    vals = K.step_array(*reg.kernel_args, p.a, p.b, np.ascontiguousarray(arr.ravel()))
    _raise_if_nan(vals, reg, "step")
    return float(vals[0]) if arr.ndim == 0 else vals.reshape(arr.shape)


def step_dual(reg: Regularizer, p: MapParams, y):
    _require_admissible(reg)
    arr = np.asarray(y, dtype=float)
    vals = K.step_dual_array(*reg.kernel_args, p.a, p.b, np.ascontiguousarray(arr.ravel()))
    _raise_if_nan(vals, reg, "step_dual")
    return float(vals[0]) if arr.ndim == 0 else vals.reshape(arr.shape)


def map_derivative(reg: Regularizer, p: MapParams, x):
    """``f'(x) = (psi'(x) + a) / psi'(f(x))``."""
    _require_admissible(reg)
    arr = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(arr.ravel())
    out = np.array([K.map_derivative(*reg.kernel_args, p.a, p.b, v) for v in flat])
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


@dataclass
class Orbit:
    seed: float
    transient: int
    points: np.ndarray
    dual_points: np.ndarray
    regularizer: str = ""
    a: float = math.nan
    b: float = math.nan

    @property
    def keep(self) -> int:
        return len(self.points)

    def metadata(self) -> dict:
        return {
            "regularizer": self.regularizer,
            "a": self.a,
            "b": self.b,
            "seed": self.seed,
            "transient": self.transient,
            "keep": self.keep,
            "version": __version__,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.metadata().items():
            buf.write(f"# {key} = {_fmt(val)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "x", "y"])
        start = self.transient + 1
        for i, (x, y) in enumerate(zip(self.points, self.dual_points)):
            w.writerow([start + i, _fmt(x), _fmt(y)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = dict(self.metadata())
        start = self.transient + 1
        doc["k"] = list(range(start, start + self.keep))
        doc["x"] = [float(v) for v in self.points]
        doc["y"] = [float(v) for v in self.dual_points]
        return json.dumps(doc)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def iterate(
    reg: Regularizer,
    p: MapParams,
    x0: float,
    transient: int = DEFAULT_TRANSIENT,
    keep: int = DEFAULT_KEEP,
) -> Orbit:
    """Run ``transient + keep`` steps from ``x0`` and keep the last ``keep``."""
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"seed must lie in (0, 1), got {x0}", parameter="x0")
    if keep < 1 or transient < 0:
        raise ParameterError("need keep >= 1 and transient >= 0", parameter="keep")
    y0 = psi(reg, x0)
    xs = np.empty(keep)
    ys = np.empty(keep)
    status = K.iterate_dual(*reg.kernel_args, p.a, p.b, float(x0), y0, int(transient), int(keep), xs, ys)
    if status:
        raise ConvergenceError(f"inversion failed along orbit of {x0}", parameter="x0", a=p.a)
    return Orbit(float(x0), int(transient), xs, ys, reg.spec, p.a, p.b)


def cesaro_average(reg: Regularizer, p: MapParams, x0: float, n: int) -> tuple[float, float]:
    """Mean of the first ``n`` iterates (seed included) and its a-priori bound.

    The bound ``max_e |psi(e) - psi(x0)| / (a n)`` over the certified
    invariant interval endpoints ``e`` holds once ``x_n`` lies in that
    interval, by telescoping the dual recursion.
    """
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"seed must lie in (0, 1), got {x0}", parameter="x0")
    if n < 1:
        raise ParameterError("n must be positive", parameter="n")
    y0 = psi(reg, x0)
    total, _ = K.cesaro_sum(*reg.kernel_args, p.a, p.b, float(x0), y0, int(n))
    if math.isnan(total):
        raise ConvergenceError("inversion failed during averaging", parameter="x0")
    ylo, yhi = invariant_interval_dual(reg, p)
    bound = max(abs(ylo - y0), abs(yhi - y0)) / (p.a * n)
    return total / n, bound


# ---------------------------------------------------------------------------
# invariant interval

def _pad(lo, hi):
    return lo - 1e-12 * max(1.0, abs(lo)), hi + 1e-12 * max(1.0, abs(hi))


def dual_interval_image(reg: Regularizer, p: MapParams, ylo: float, yhi: float,
                        crit_duals: np.ndarray) -> tuple[float, float]:
    """Exact image of the dual interval [ylo, yhi] from endpoint and critical values."""
    args = reg.kernel_args
    pts = [ylo, yhi] + [c for c in crit_duals if ylo < c < yhi]
    vals = [K.step_dual(*args, p.a, p.b, v) for v in pts]
    if any(math.isnan(v) for v in vals):
        raise ConvergenceError("inversion failed while imaging an interval", parameter="y")
    return min(vals), max(vals)


def invariant_interval_dual(reg: Regularizer, p: MapParams, max_iter: int = 200) -> tuple[float, float]:
    """Certified invariant interval ``[ylo, yhi]`` in dual coordinates."""
    from .analysis import critical_points

    _require_admissible(reg)
    crit = critical_points(reg, p)
    cd = np.array([psi(reg, c) for c in crit])
    yb = psi(reg, p.b)
    seeds = [yb - 1.0, yb + 1.0] + list(cd) + list(step_dual(reg, p, cd) if cd.size else [])
    ylo, yhi = min(seeds), max(seeds)
    for _ in range(max_iter):
        ilo, ihi = _pad(*dual_interval_image(reg, p, ylo, yhi, cd))
        if ilo >= ylo and ihi <= yhi:
            break
        ylo, yhi = min(ylo, ilo), max(yhi, ihi)
    else:
        raise CertificationError(
            f"no invariant interval within {max_iter} expansions", parameter="a", a=p.a, b=p.b
        )
    # shrink through nested images while inclusion keeps holding
    for _ in range(max_iter):
        nlo, nhi = _pad(*dual_interval_image(reg, p, ylo, yhi, cd))
        nlo, nhi = max(nlo, ylo), min(nhi, yhi)
        clo, chi = dual_interval_image(reg, p, nlo, nhi, cd)
        if not (clo >= nlo and chi <= nhi):
            break
        shrink = (yhi - ylo) - (nhi - nlo)
        ylo, yhi = nlo, nhi
        if shrink <= 1e-12 * max(1.0, yhi - ylo):
            break
    return ylo, yhi


def invariant_interval(reg: Regularizer, p: MapParams) -> tuple[float, float]:
    ylo, yhi = invariant_interval_dual(reg, p)
    return psi_inverse(reg, yhi), psi_inverse(reg, ylo)
