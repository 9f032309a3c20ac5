"""Steep symmetric convex regularizers and their link functions.

Each regularizer is described by its link function ``psi = -r'``, a
decreasing homeomorphism of (0, 1) onto the reals with
``psi(1 - x) = -psi(x)``. Closed-form derivatives up to order three are
provided for every entry; inversion is closed-form for Shannon and
log-barrier and a safeguarded Newton/bisection solve otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ConvergenceError, DomainError, ParameterError

_KINDS = {
    "shannon": K.SHANNON,
    "hct": K.HCT,
    "renyi": K.RENYI,
    "logbarrier": K.LOGBARRIER,
    "perturbed": K.PERTURBED,
}
_KEYS = {
    "shannon": (),
    "hct": ("q",),
    "renyi": ("q",),
    "logbarrier": (),
    "perturbed": ("c", "d"),
}
PERTURBED_DEFAULTS = {"c": 0.4167, "d": 0.11}


@dataclass(frozen=True)
class Regularizer:
    """A named regularizer with its real parameters.

    HCT and Renyi accept any ``q > 0, q != 1`` at construction so that
    non-members (e.g. the Euclidean case q=2) can be inspected with
    :func:`validate_regularizer`; evaluating them through :func:`psi` and
    friends requires ``q`` in (0, 1).
    """

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in _KINDS:
            raise ParameterError(f"unknown regularizer {self.name!r}", parameter="regularizer")
        allowed = _KEYS[self.name]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ParameterError(
                f"unknown parameter(s) {sorted(unknown)} for {self.name}",
                parameter=sorted(unknown)[0],
            )
        params = dict(self.params)
        if self.name == "perturbed":
            for key, val in PERTURBED_DEFAULTS.items():
                params.setdefault(key, val)
        for key in allowed:
            if key not in params:
                raise ParameterError(f"{self.name} requires parameter {key}", parameter=key)
            params[key] = float(params[key])
            if not math.isfinite(params[key]):
                raise ParameterError(f"{key} must be finite", parameter=key)
        if self.name in ("hct", "renyi"):
            q = params["q"]
            if q <= 0.0 or q == 1.0:
                raise ParameterError(f"q must be positive and != 1, got {q}", parameter="q")
        if self.name == "perturbed":
            if params["d"] <= 0.0:
                raise ParameterError("barrier constant d must be positive", parameter="d")
            if params["c"] < 0.0:
                raise ParameterError("perturbation weight c must be nonnegative", parameter="c")
        object.__setattr__(self, "params", params)

    @property
    def kind(self) -> int:
        return _KINDS[self.name]

    @property
    def kernel_args(self) -> tuple[int, float, float]:
        if self.name in ("hct", "renyi"):
            return self.kind, self.params["q"], 0.0
        if self.name == "perturbed":
            d = self.params["d"]
            # -x^2 + x + d = (x + s)(1 + s - x)
            shift = (math.sqrt(1.0 + 4.0 * d) - 1.0) / 2.0
            return self.kind, self.params["c"], shift
        return self.kind, 0.0, 0.0

    @property
    def admissible_parameters(self) -> bool:
        if self.name in ("hct", "renyi"):
            return 0.0 < self.params["q"] < 1.0
        return True

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        body = ",".join(f"{k}={self.params[k]!r}" for k in _KEYS[self.name])
        return f"{self.name}:{body}"

    def __str__(self) -> str:
        return self.spec


def shannon() -> Regularizer:
    return Regularizer("shannon")


def hct(q: float) -> Regularizer:
    return Regularizer("hct", {"q": q})


def renyi(q: float) -> Regularizer:
    return Regularizer("renyi", {"q": q})


def logbarrier() -> Regularizer:
    return Regularizer("logbarrier")


def perturbed(c: float = 0.4167, d: float = 0.11) -> Regularizer:
    return Regularizer("perturbed", {"c": c, "d": d})


def parse_regularizer(text: str) -> Regularizer:
    """Parse ``name`` or ``name:key=value,key=value``."""
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    params = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or not key:
                raise ParameterError(f"malformed parameter {item!r} in {text!r}", parameter="regularizer")
            if key in params:
                raise ParameterError(f"duplicate parameter {key!r}", parameter=key)
            try:
                params[key] = float(value)
            except ValueError:
                raise ParameterError(f"parameter {key} is not a number: {value!r}", parameter=key) from None
    return Regularizer(name, params)


def _require_admissible(reg: Regularizer) -> None:
    if not reg.admissible_parameters:
        raise ParameterError(f"{reg.name} requires q in (0, 1), got q={reg.params['q']}", parameter="q")


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_open_unit(arr, what="x"):
    if not np.all((arr > 0.0) & (arr < 1.0)):
        bad = arr[~((arr > 0.0) & (arr < 1.0))].ravel()[0]
        raise DomainError(f"{what} must lie in (0, 1), got {bad!r}", parameter=what)


def _out(values, scalar):
    return float(values[0]) if scalar else values


def psi(reg: Regularizer, x):
    _require_admissible(reg)
    arr, scalar = _as_array(x)
    _check_open_unit(arr)
    flat = np.ascontiguousarray(arr.ravel())
    vals = K.psi_array(*reg.kernel_args, flat)
    return _out(vals if scalar else vals.reshape(arr.shape), scalar)


def psi_derivative(reg: Regularizer, x, order: int = 1):
    _require_admissible(reg)
    if order not in (1, 2, 3):
        raise ParameterError(f"unsupported derivative order {order}; only 1..3", parameter="order")
    arr, scalar = _as_array(x)
    _check_open_unit(arr)
    flat = np.ascontiguousarray(arr.ravel())
    vals = K.dpsi_array(*reg.kernel_args, flat, int(order))
    return _out(vals if scalar else vals.reshape(arr.shape), scalar)


def psi_inverse(reg: Regularizer, y):
    _require_admissible(reg)
    arr, scalar = _as_array(y)
    flat = np.ascontiguousarray(arr.ravel())
    vals = K.psi_inv_array(*reg.kernel_args, flat)
    if np.isnan(vals).any():
        bad = flat[np.isnan(vals)][0]
        raise ConvergenceError(
            f"inversion of {reg.spec} did not converge at y={bad!r}", parameter="y", y=float(bad)
        )
    return _out(vals if scalar else vals.reshape(arr.shape), scalar)


def schwarzian_psi(reg: Regularizer, x):
    """Schwarzian derivative of the link function, from its analytic derivatives."""
    d1 = psi_derivative(reg, x, 1)
    d2 = psi_derivative(reg, x, 2)
    d3 = psi_derivative(reg, x, 3)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def max_psi_derivative(reg: Regularizer, grid: int = 20001) -> float:
    """Largest value of psi' on (0, 1): the critical-point threshold is ``-max``."""
    _require_admissible(reg)
    xs = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    d = K.dpsi_array(*reg.kernel_args, xs, 1)
    i = int(np.argmax(d))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, xs.size - 1)]
    # golden-section polish of the sampled maximum
    g = (math.sqrt(5.0) - 1.0) / 2.0
    f = lambda t: K.dpsi(*reg.kernel_args, t, 1)
    c, d_ = hi - g * (hi - lo), lo + g * (hi - lo)
    for _ in range(100):
        if f(c) > f(d_):
            hi = d_
        else:
            lo = c
        c, d_ = hi - g * (hi - lo), lo + g * (hi - lo)
    return float(max(f(0.5 * (lo + hi)), d[i]))


@dataclass
class ValidationReport:
    symmetric: bool
    strictly_convex: bool
    steep_at_zero: bool
    max_antisymmetry_residual: float
    grid_size: int

    @property
    def member(self) -> bool:
        return self.symmetric and self.strictly_convex and self.steep_at_zero

    def to_dict(self) -> dict:
        return {
            "symmetric": self.symmetric,
            "strictly_convex": self.strictly_convex,
            "steep_at_zero": self.steep_at_zero,
            "max_antisymmetry_residual": self.max_antisymmetry_residual,
            "grid_size": self.grid_size,
            "member": self.member,
        }


def validate_regularizer(reg: Regularizer, grid_size: int = 1001) -> ValidationReport:
    """Check membership in the admissible class on a finite grid.

    Failures are reported in the returned fields, never raised.
    """
    if grid_size < 3:
        raise ParameterError("grid_size must be at least 3", parameter="grid_size")
    args = reg.kernel_args
    xs = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    # snap so that 1 - x is exact and the residual measures psi only
    xs = 1.0 - (1.0 - xs)
    with np.errstate(all="ignore"):
        vals = K.psi_array(*args, xs)
        mirror = K.psi_array(*args, np.ascontiguousarray(1.0 - xs))
        d1 = K.dpsi_array(*args, xs, 1)
        finite = np.isfinite(vals).all() and np.isfinite(mirror).all()
        residual = np.abs(vals + mirror)
        scale = np.maximum(1.0, np.abs(vals))
        max_res = float(residual.max()) if finite else math.inf
        symmetric = bool(finite and np.all(residual <= 1e-9 * scale))
        strictly_convex = bool(finite and np.all(np.diff(vals) < 0.0) and np.all(d1 < 0.0))
        probes = K.psi_array(*args, 10.0 ** -np.arange(3, 13, dtype=float))
        steep = bool(np.all(np.isfinite(probes)) and np.all(probes[1:] > probes[:-1] + 1.0))
    return ValidationReport(symmetric, strictly_convex, steep, max_res, grid_size)


CATALOG = {
    "shannon": shannon(),
    "hct:q=0.5": hct(0.5),
    "renyi:q=0.5": renyi(0.5),
    "logbarrier": logbarrier(),
    "perturbed": perturbed(),
}
