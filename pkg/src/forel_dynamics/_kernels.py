"""Compiled scalar kernels shared by every module.

A regularizer is passed around as ``(kind, p0, p1)``; see ``KIND_*``.
Failures are signalled with NaN (or a nonzero status) and turned into
exceptions by the Python wrappers.
"""

import math

import numpy as np
from numba import njit

SHANNON = 0
HCT = 1
RENYI = 2
LOGBARRIER = 3
PERTURBED = 4

X_MIN = 2.2250738585072014e-308
X_MAX = 1.0 - 2.0 ** -53
EPS = 2.220446049250313e-16
MAX_INVERSION_ITER = 200


@njit(cache=True)
def psi(kind, p0, p1, x):
    w = 1.0 - x
    if kind == SHANNON:
        return math.log1p(-x) - math.log(x)
    if kind == HCT:
        q = p0
        return q / (1.0 - q) * (x ** (q - 1.0) - w ** (q - 1.0))
    if kind == RENYI:
        q = p0
        return q / (1.0 - q) * (x ** (q - 1.0) - w ** (q - 1.0)) / (x ** q + w ** q)
    if kind == LOGBARRIER:
        return 1.0 / x - 1.0 / w
    # perturbed: p0 = c, p1 = barrier shift s
    return math.log1p(-x) - math.log(x) + p0 * (1.0 / (1.0 + p1 - x) - 1.0 / (x + p1))


@njit(cache=True)
def _renyi_derivs(q, x):
    w = 1.0 - x
    u0 = x ** (q - 1.0) - w ** (q - 1.0)
    u1 = (q - 1.0) * (x ** (q - 2.0) + w ** (q - 2.0))
    u2 = (q - 1.0) * (q - 2.0) * (x ** (q - 3.0) - w ** (q - 3.0))
    u3 = (q - 1.0) * (q - 2.0) * (q - 3.0) * (x ** (q - 4.0) + w ** (q - 4.0))
    v0 = x ** q + w ** q
    v1 = q * u0
    v2 = q * u1
    v3 = q * u2
    h0 = u0 / v0
    h1 = (u1 - h0 * v1) / v0
    h2 = (u2 - 2.0 * h1 * v1 - h0 * v2) / v0
    h3 = (u3 - 3.0 * h2 * v1 - 3.0 * h1 * v2 - h0 * v3) / v0
    k = q / (1.0 - q)
    return k * h1, k * h2, k * h3


@njit(cache=True)
def dpsi(kind, p0, p1, x, order):
    w = 1.0 - x
    if kind == SHANNON:
        if order == 1:
            return -1.0 / x - 1.0 / w
        if order == 2:
            return 1.0 / (x * x) - 1.0 / (w * w)
        return -2.0 / (x * x * x) - 2.0 / (w * w * w)
    if kind == HCT:
        q = p0
        k = q / (1.0 - q)
        if order == 1:
            return k * (q - 1.0) * (x ** (q - 2.0) + w ** (q - 2.0))
        if order == 2:
            return k * (q - 1.0) * (q - 2.0) * (x ** (q - 3.0) - w ** (q - 3.0))
        return k * (q - 1.0) * (q - 2.0) * (q - 3.0) * (x ** (q - 4.0) + w ** (q - 4.0))
    if kind == RENYI:
        d1, d2, d3 = _renyi_derivs(p0, x)
        if order == 1:
            return d1
        if order == 2:
            return d2
        return d3
    if kind == LOGBARRIER:
        if order == 1:
            return -1.0 / (x * x) - 1.0 / (w * w)
        if order == 2:
            return 2.0 / (x * x * x) - 2.0 / (w * w * w)
        return -6.0 / (x * x * x * x) - 6.0 / (w * w * w * w)
    c = p0
    l = 1.0 + p1 - x
    r = x + p1
    if order == 1:
        return -1.0 / x - 1.0 / w + c * (1.0 / (l * l) + 1.0 / (r * r))
    if order == 2:
        return 1.0 / (x * x) - 1.0 / (w * w) + c * (2.0 / (l * l * l) - 2.0 / (r * r * r))
    return (-2.0 / (x * x * x) - 2.0 / (w * w * w)
            + c * (6.0 / (l * l * l * l) + 6.0 / (r * r * r * r)))


@njit(cache=True)
def _inverse_numeric(kind, p0, p1, y):
    # y > 0, root lies in (0, 1/2); Psi is decreasing
    hi = 0.5
    lo = 0.25
    while psi(kind, p0, p1, lo) < y:
        if lo <= X_MIN:
            return X_MIN  # root lies below the normal range: clamp
        hi = lo
        lo = max(lo * lo, X_MIN)
    x = lo
    for _ in range(MAX_INVERSION_ITER):
        g = psi(kind, p0, p1, x) - y
        if g == 0.0:
            return x
        if g > 0.0:
            lo = x
        else:
            hi = x
        d = dpsi(kind, p0, p1, x, 1)
        xn = x - g / d
        if not (lo < xn < hi):
            if hi > 4.0 * lo:
                xn = math.sqrt(lo * hi)
            else:
                xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4.0 * EPS * xn or hi - lo <= 4.0 * EPS * lo:
            return xn
        x = xn
    return np.nan


@njit(cache=True)
def _inverse_upper(kind, p0, p1, y):
    # y >= 0; returns the preimage in (0, 1/2]
    if y == 0.0:
        return 0.5
    if y == np.inf:
        return 0.0
    if kind == SHANNON:
        e = math.exp(-y)
        return e / (1.0 + e)
    if kind == LOGBARRIER:
        return 2.0 / ((y + 2.0) + math.hypot(y, 2.0))
    return _inverse_numeric(kind, p0, p1, y)


@njit(cache=True)
def psi_inv(kind, p0, p1, y):
    if y != y:
        return np.nan
    if y >= 0.0:
        x = _inverse_upper(kind, p0, p1, y)
    else:
        x = 1.0 - _inverse_upper(kind, p0, p1, -y)
    if x != x:
        return np.nan
    if y == np.inf:
        return 0.0
    if y == -np.inf:
        return 1.0
    if x < X_MIN:
        return X_MIN
    if x > X_MAX:
        return X_MAX
    return x


@njit(cache=True)
def step_dual(kind, p0, p1, a, b, y):
    return y + a * (psi_inv(kind, p0, p1, y) - b)


@njit(cache=True)
def step(kind, p0, p1, a, b, x):
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    return psi_inv(kind, p0, p1, psi(kind, p0, p1, x) + a * (x - b))


@njit(cache=True)
def map_derivative(kind, p0, p1, a, b, x):
    fx = step(kind, p0, p1, a, b, x)
    return (dpsi(kind, p0, p1, x, 1) + a) / dpsi(kind, p0, p1, fx, 1)


# ---------------------------------------------------------------------------
# array helpers

@njit(cache=True)
def psi_array(kind, p0, p1, xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = psi(kind, p0, p1, xs[i])
    return out


@njit(cache=True)
def dpsi_array(kind, p0, p1, xs, order):
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = dpsi(kind, p0, p1, xs[i], order)
    return out


@njit(cache=True)
def psi_inv_array(kind, p0, p1, ys):
    out = np.empty(ys.size)
    for i in range(ys.size):
        out[i] = psi_inv(kind, p0, p1, ys[i])
    return out


@njit(cache=True)
def step_array(kind, p0, p1, a, b, xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = step(kind, p0, p1, a, b, xs[i])
    return out


@njit(cache=True)
def step_dual_array(kind, p0, p1, a, b, ys):
    out = np.empty(ys.size)
    for i in range(ys.size):
        out[i] = step_dual(kind, p0, p1, a, b, ys[i])
    return out


# ---------------------------------------------------------------------------
# orbits

@njit(cache=True)
def iterate_dual(kind, p0, p1, a, b, x0, y0, transient, keep, out_x, out_y):
    """Fill the last ``keep`` iterates; return 0, or 1 on inversion failure.

    The first step uses the exact seed ``x0`` (with ``y0 = psi(x0)``) rather
    than ``psi_inv(y0)``, which may differ from it by an ulp.
    """
    y = y0
    x = x0
    for _ in range(transient):
        y = y + a * (x - b)
        x = psi_inv(kind, p0, p1, y)
        if x != x:
            return 1
    for k in range(keep):
        y = y + a * (x - b)
        x = psi_inv(kind, p0, p1, y)
        if x != x:
            return 1
        out_x[k] = x
        out_y[k] = y
    return 0


@njit(cache=True)
def iterate_batch(kind, p0, p1, avals, b, x0s, y0s, transient, keep, out_x, out_y, status):
    for i in range(avals.size):
        status[i] = iterate_dual(kind, p0, p1, avals[i], b, x0s[i], y0s[i], transient, keep,
                                 out_x[i], out_y[i])


@njit(cache=True)
def cesaro_sum(kind, p0, p1, a, b, x0, y0, n):
    """Neumaier-compensated sum of x_0..x_{n-1}; also returns y_n."""
    s = 0.0
    comp = 0.0
    x = x0
    y = y0
    for _ in range(n):
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
        y = y + a * (x - b)
        x = psi_inv(kind, p0, p1, y)
        if x != x:
            return np.nan, np.nan
    return s + comp, y


@njit(cache=True)
def lyapunov_sum(kind, p0, p1, a, b, x0, y0, transient, n, crits):
    y = y0
    x = x0
    for _ in range(transient):
        y = y + a * (x - b)
        x = psi_inv(kind, p0, p1, y)
    total = 0.0
    near = 0
    for _ in range(n):
        for c in crits:
            if abs(x - c) < 1e-12:
                near += 1
                break
        y_next = y + a * (x - b)
        x_next = psi_inv(kind, p0, p1, y_next)
        if x_next != x_next:
            return np.nan, near
        deriv = (dpsi(kind, p0, p1, x, 1) + a) / dpsi(kind, p0, p1, x_next, 1)
        total += math.log(abs(deriv)) if deriv != 0.0 else -745.0
        y = y_next
        x = x_next
    return total / n, near


# ---------------------------------------------------------------------------
# critical points: zeros of Psi'(x) + a

@njit(cache=True)
def critical_points(kind, p0, p1, a, ncells):
    xs = np.empty(ncells - 1)
    g = np.empty(ncells - 1)
    for i in range(ncells - 1):
        xs[i] = (i + 1.0) / ncells
        g[i] = dpsi(kind, p0, p1, xs[i], 1) + a
    roots = []
    for i in range(ncells - 2):
        gl = g[i]
        gr = g[i + 1]
        if gl == 0.0:
            if i > 0 and g[i - 1] * gr < 0.0:
                roots.append(xs[i])
            continue
        if gl * gr < 0.0:
            lo = xs[i]
            hi = xs[i + 1]
            glo = gl
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                gm = dpsi(kind, p0, p1, mid, 1) + a
                if gm == 0.0:
                    lo = mid
                    hi = mid
                    break
                if (gm > 0.0) == (glo > 0.0):
                    lo = mid
                    glo = gm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    out = np.empty(len(roots))
    for i in range(len(roots)):
        out[i] = roots[i]
    return out


@njit(cache=True)
def critical_points_batch(kind, p0, p1, avals, ncells, max_roots, out, counts):
    for i in range(avals.size):
        r = critical_points(kind, p0, p1, avals[i], ncells)
        counts[i] = r.size
        for j in range(min(r.size, max_roots)):
            out[i, j] = r[j]
