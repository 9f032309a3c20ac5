"""Reference implementations written independently of the package.

Everything here is evaluated in 50-digit arithmetic with mpmath straight
from the textbook formulas, so agreement with the float kernels is a
genuine cross-check rather than a comparison of a function with itself.
"""

import mpmath as mp

mp.mp.dps = 50


def psi_ref(name, x, q=None, c=0.4167, d=0.11):
    x = mp.mpf(x)
    if name == "shannon":
        return mp.log((1 - x) / x)
    if name == "hct":
        q = mp.mpf(q)
        return q / (1 - q) * (x ** (q - 1) - (1 - x) ** (q - 1))
    if name == "renyi":
        q = mp.mpf(q)
        return q / (1 - q) * (x ** (q - 1) - (1 - x) ** (q - 1)) / (x ** q + (1 - x) ** q)
    if name == "logbarrier":
        return 1 / x - 1 / (1 - x)
    if name == "perturbed":
        # Shannon link plus c (1/(1+s-x) - 1/(x+s)) = c (2x - 1) / (x + s)(1 + s - x),
        # where (x + s)(1 + s - x) = -x^2 + x + d
        return mp.log((1 - x) / x) + c * (2 * x - 1) / (-x * x + x + d)
    raise ValueError(name)


def psi_ref_for(reg, x):
    return psi_ref(reg.name, x, **reg.params)


def dpsi_ref(reg, x, order=1):
    return mp.diff(lambda t: psi_ref_for(reg, t), mp.mpf(x), order)


def psi_inverse_ref(reg, y):
    """Bisection in 50-digit arithmetic on the decreasing link."""
    y = mp.mpf(y)
    lo, hi = mp.mpf("1e-40"), 1 - mp.mpf("1e-40")
    for _ in range(400):
        mid = (lo + hi) / 2
        if psi_ref_for(reg, mid) > y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def step_ref(reg, a, b, x):
    y = psi_ref_for(reg, x) + mp.mpf(a) * (mp.mpf(x) - mp.mpf(b))
    return psi_inverse_ref(reg, y)


def mwu_step(a, b, x):
    """Shannon case in closed multiplicative-weights form."""
    x = mp.mpf(x)
    return x / (x + (1 - x) * mp.exp(mp.mpf(a) * (x - mp.mpf(b))))


def hausdorff_brute(u, v):
    d_uv = max(min(abs(p - q) for q in v) for p in u)
    d_vu = max(min(abs(p - q) for q in u) for p in v)
    return max(d_uv, d_vu)
