import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from forel_dynamics import (
    CATALOG,
    GameParams,
    MapParams,
    cesaro_average,
    hct,
    invariant_interval,
    iterate,
    logbarrier,
    perturbed,
    psi,
    psi_inverse,
    shannon,
    step,
    step_dual,
    to_map_params,
)
from forel_dynamics.analysis import critical_points, stability
from forel_dynamics.dynamics import invariant_interval_dual, map_derivative
from forel_dynamics.errors import DomainError, NormalizationError, ParameterError

from oracles import mwu_step, step_ref

REGS = list(CATALOG.values())
reg_st = st.sampled_from(REGS)
snap = lambda x: 1.0 - (1.0 - x)
b_st = st.floats(0.05, 0.95).map(snap)
x_st = st.floats(1e-4, 1 - 1e-4).map(snap)
a_st = st.floats(1e-3, 50.0)


# --- parameters ---------------------------------------------------------------

def test_game_to_map_examples():
    p = to_map_params(GameParams(0.39, 0.61, 100, 0.05))
    assert p.a == pytest.approx(5.0, rel=1e-15) and p.b == 0.61
    assert to_map_params(GameParams(0.5, 0.5, 16, 0.5)) == MapParams(8.0, 0.5)


def test_normalization_error():
    with pytest.raises(NormalizationError):
        to_map_params(GameParams(0.3, 0.6, 1, 1))


@pytest.mark.parametrize("kw", [dict(a=0.0, b=0.5), dict(a=-1.0, b=0.5), dict(a=1.0, b=0.0),
                                dict(a=1.0, b=1.0), dict(a=math.inf, b=0.5)])
def test_invalid_map_params(kw):
    with pytest.raises(ParameterError):
        MapParams(**kw)


def test_invalid_game_params():
    with pytest.raises(ParameterError):
        GameParams(0.5, 0.5, -1.0, 1.0)


# --- the map ------------------------------------------------------------------

@given(reg_st, a_st, b_st)
def test_equilibrium_is_fixed(reg, a, b):
    assert step(reg, MapParams(a, b), b) == pytest.approx(b, abs=1e-14)  # a few ulp from the numeric inverse


@pytest.mark.parametrize("reg", REGS, ids=str)
def test_boundary_clauses(reg):
    p = MapParams(7.0, 0.3)
    assert step(reg, p, 0.0) == 0.0
    assert step(reg, p, 1.0) == 1.0


def test_shannon_is_multiplicative_weights():
    expected = 0.25 / (0.25 + 0.75 * math.exp(2 * (-0.25)))
    assert step(shannon(), MapParams(2.0, 0.5), 0.25) == pytest.approx(expected, rel=1e-15)


@given(a_st, b_st, x_st)
def test_shannon_matches_closed_form_everywhere(a, b, x):
    assert step(shannon(), MapParams(a, b), x) == pytest.approx(float(mwu_step(a, b, x)), rel=1e-12, abs=1e-300)


@given(reg_st, st.floats(0.1, 20.0), b_st, st.floats(0.01, 0.99))
def test_step_matches_high_precision_reference(reg, a, b, x):
    ref = float(step_ref(reg, a, b, x))
    got = step(reg, MapParams(a, b), x)
    # the input x carries relative rounding eps, amplified at most by |f'(x)|
    slack = 1e-14 * (1.0 + abs(map_derivative(reg, MapParams(a, b), x)))
    assert abs(got - ref) <= slack + 1e-15


def test_perturbed_interval_image():
    reg, p = perturbed(), MapParams(3.25, 0.61)
    u, v = 0.9559, 0.956
    lo, hi = psi_inverse(reg, 0.5450836794177281), psi_inverse(reg, 0.5450794481395858)
    for x in np.linspace(u, v, 11):
        assert lo - 1e-15 <= step(reg, p, x) <= hi + 1e-15


def test_step_domain():
    with pytest.raises(DomainError):
        step(shannon(), MapParams(1.0, 0.5), 1.2)


def test_step_vectorized():
    xs = np.array([[0.1, 0.2], [0.7, 0.9]])
    out = step(hct(0.5), MapParams(9.0, 0.61), xs)
    assert out.shape == xs.shape
    assert out[1, 0] == step(hct(0.5), MapParams(9.0, 0.61), 0.7)


@given(reg_st, a_st, b_st, x_st)
def test_order_relation(reg, a, b, x):
    assume(abs(x - b) > 1e-4)
    fx = step(reg, MapParams(a, b), x)
    assert (fx > x) == (x < b)
    assert (fx < x) == (x > b)


@given(reg_st, a_st, b_st, x_st)
def test_conjugacy(reg, a, b, x):
    lhs = step(reg, MapParams(a, b), x)
    rhs = step(reg, MapParams(a, 1.0 - b), 1.0 - x)
    assert abs(1.0 - lhs - rhs) < 1e-10


def test_dual_examples():
    assert step_dual(shannon(), MapParams(2.0, 0.5), 0.0) == 0.0
    reg, p = logbarrier(), MapParams(20.0, 0.61)
    assert step_dual(reg, p, psi(reg, 0.61)) == pytest.approx(psi(reg, 0.61), abs=1e-15)
    assert step_dual(reg, p, psi(reg, 0.9)) == pytest.approx(psi(reg, step(reg, p, 0.9)), abs=1e-9)


@given(reg_st, a_st, b_st, st.floats(-1e3, 1e3))
def test_dual_step_agrees_with_primal_step(reg, a, b, y):
    p = MapParams(a, b)
    x = psi_inverse(reg, y)
    assume(1e-6 < x < 1 - 1e-6)
    # recompute y from the representable x so both routes start at the same point
    y = psi(reg, x)
    assert psi_inverse(reg, step_dual(reg, p, y)) == pytest.approx(step(reg, p, x), abs=1e-12)


@given(reg_st, a_st, b_st, x_st)
def test_primal_dual_agree_along_orbit(reg, a, b, x0):
    """One primal step from each stored point reproduces the next stored point."""
    p = MapParams(a, b)
    orb = iterate(reg, p, x0, transient=0, keep=1000)
    xs = np.concatenate([[x0], orb.points])
    nxt = step(reg, p, xs[:-1])
    assert np.max(np.abs(nxt - xs[1:])) < 1e-8


@pytest.mark.parametrize("reg,a,b", [(shannon(), 5.0, 0.3), (logbarrier(), 15.0, 0.61),
                                     (hct(0.5), 4.0, 0.7), (shannon(), 10.0, 0.5)])
def test_primal_and_dual_orbits_shadow_in_regular_regimes(reg, a, b):
    p = MapParams(a, b)
    x = 0.2
    orb = iterate(reg, p, x, transient=0, keep=1000)
    primal = []
    for _ in range(1000):
        x = step(reg, p, x)
        primal.append(x)
    assert np.max(np.abs(np.array(primal) - orb.points)) < 1e-8


# --- orbits -------------------------------------------------------------------

def test_iterate_converges_below_threshold():
    orb = iterate(shannon(), MapParams(1.0, 0.5), 0.3, transient=1000, keep=1)
    assert orb.points.shape == (1,)
    assert abs(orb.points[0] - 0.5) < 1e-6


@pytest.mark.parametrize("reg", REGS, ids=str)
def test_iterate_from_equilibrium(reg):
    orb = iterate(reg, MapParams(3.0, 0.37), 0.37, transient=0, keep=5)
    assert np.allclose(orb.points, 0.37, atol=1e-15)


def test_chaotic_orbit_spreads():
    reg, p = logbarrier(), MapParams(150.0, 0.61)
    left = critical_points(reg, p)[0]
    orb = iterate(reg, p, left, 4000, 200)
    assert orb.keep == 200
    assert np.ptp(orb.points) > 0.5
    assert np.all((orb.points > 0) & (orb.points < 1))


@given(reg_st, a_st, b_st, x_st)
def test_orbit_satisfies_recursion(reg, a, b, x0):
    orb = iterate(reg, MapParams(a, b), x0, transient=50, keep=30)
    y, x = orb.dual_points, orb.points
    resid = np.abs(y[1:] - y[:-1] - a * (x[:-1] - b))
    assert np.all(resid < 1e-8 * np.maximum(1.0, np.abs(y[:-1])))
    # recomputing psi from the primal value is only meaningful away from ulp(1)
    ok = (x > 1e-6) & (x < 1 - 1e-6)
    assert np.all((np.abs(psi(reg, x) - y) <= 1e-8 * np.maximum(1.0, np.abs(y)))[ok])


def test_retained_window_is_the_tail():
    reg, p = hct(0.5), MapParams(12.0, 0.61)
    full = iterate(reg, p, 0.2, transient=0, keep=30)
    tail = iterate(reg, p, 0.2, transient=20, keep=10)
    assert np.array_equal(full.points[20:], tail.points)


def test_iterate_argument_checks():
    with pytest.raises(DomainError):
        iterate(shannon(), MapParams(1.0, 0.5), 0.0)
    with pytest.raises(ParameterError):
        iterate(shannon(), MapParams(1.0, 0.5), 0.3, keep=0)


def test_orbit_csv_and_json():
    orb = iterate(shannon(), MapParams(2.0, 0.5), 0.25, transient=3, keep=4)
    text = orb.to_csv()
    header = [l for l in text.splitlines() if l.startswith("#")]
    keys = {l[2:].split(" = ")[0] for l in header}
    assert {"regularizer", "a", "b", "seed", "transient", "keep", "version"} <= keys
    rows = [l for l in text.splitlines() if not l.startswith("#")]
    assert rows[0] == "k,x,y"
    k, x, y = rows[1].split(",")
    assert int(k) == 4 and float(x) == orb.points[0] and float(y) == orb.dual_points[0]
    doc = json.loads(orb.to_json())
    assert doc["k"] == [4, 5, 6, 7] and doc["x"] == list(orb.points) and doc["seed"] == 0.25


# --- Cesaro averages ----------------------------------------------------------

@pytest.mark.parametrize("reg", REGS, ids=str)
def test_cesaro_from_equilibrium(reg):
    avg, bound = cesaro_average(reg, MapParams(6.0, 0.44), 0.44, 1000)
    assert avg == pytest.approx(0.44, abs=1e-15)
    assert bound >= 0.0


def test_cesaro_shannon_example():
    avg, _ = cesaro_average(shannon(), MapParams(20.0, 0.5), 0.2, 10 ** 6)
    assert abs(avg - 0.5) < 1e-3


def test_cesaro_despite_chaos():
    reg, p = perturbed(), MapParams(3.25, 0.61)
    right = critical_points(reg, p)[1]
    avg, bound = cesaro_average(reg, p, right, 10 ** 6)
    assert abs(avg - 0.61) < 1e-2
    assert abs(avg - 0.61) <= bound


@given(reg_st, st.floats(0.5, 50.0), b_st, x_st, st.integers(1, 3000))
def test_cesaro_telescoping_oracle(reg, a, b, x0, n):
    """The average minus b equals (y_n - y_0) / (a n) exactly in real arithmetic."""
    p = MapParams(a, b)
    avg, _ = cesaro_average(reg, p, x0, n)
    y_n = iterate(reg, p, x0, transient=n - 1, keep=1).dual_points[0]
    predicted = b + (y_n - psi(reg, x0)) / (a * n)
    scale = max(1.0, abs(y_n), abs(psi(reg, x0))) / (a * n)
    assert abs(avg - predicted) <= 1e-12 + 1e-12 * scale * n


@given(reg_st, st.floats(0.5, 50.0), b_st, x_st, st.integers(100, 5000))
def test_cesaro_bound_holds_inside_invariant_interval(reg, a, b, x0, n):
    p = MapParams(a, b)
    lo, hi = invariant_interval(reg, p)
    x_n = iterate(reg, p, x0, transient=n - 1, keep=1).points[0]
    assume(lo <= x_n <= hi)
    avg, bound = cesaro_average(reg, p, x0, n)
    assert abs(avg - b) <= bound * (1 + 1e-9) + 1e-15


def test_cesaro_bound_scales_as_one_over_n():
    reg, p = logbarrier(), MapParams(50.0, 0.61)
    _, b1 = cesaro_average(reg, p, 0.2, 1000)
    _, b2 = cesaro_average(reg, p, 0.2, 4000)
    assert b1 / b2 == pytest.approx(4.0, rel=1e-12)


def test_cesaro_argument_checks():
    with pytest.raises(ParameterError):
        cesaro_average(shannon(), MapParams(1.0, 0.5), 0.3, 0)
    with pytest.raises(DomainError):
        cesaro_average(shannon(), MapParams(1.0, 0.5), 1.0, 10)


# --- invariant interval ---------------------------------------------------------

def test_invariant_interval_contains_equilibrium():
    lo, hi = invariant_interval(shannon(), MapParams(1.0, 0.5))
    assert lo <= 0.5 <= hi


def test_invariant_interval_contains_chaotic_clouds():
    reg, p = logbarrier(), MapParams(150.0, 0.61)
    lo, hi = invariant_interval(reg, p)
    for c in critical_points(reg, p):
        pts = iterate(reg, p, c, 4000, 200).points
        assert np.all((pts >= lo) & (pts <= hi))


def test_invariant_interval_perturbed_contains_attractors():
    reg, p = perturbed(), MapParams(3.25, 0.61)
    lo, hi = invariant_interval(reg, p)
    for c in critical_points(reg, p):
        pts = iterate(reg, p, c, 1000, 500).points
        assert np.all((pts >= lo) & (pts <= hi))
    assert lo < 0.61 < hi


@given(reg_st, st.floats(0.5, 200.0), b_st)
def test_invariant_interval_is_invariant(reg, a, b):
    p = MapParams(a, b)
    lo, hi = invariant_interval_dual(reg, p)
    assert lo <= psi(reg, b) <= hi
    ys = np.linspace(lo, hi, 401)
    img = step_dual(reg, p, ys)
    tol = 1e-9 * np.maximum(1.0, np.abs(img))
    assert np.all(img >= lo - tol) and np.all(img <= hi + tol)


def test_multiplier_matches_finite_difference():
    for reg in REGS:
        p = MapParams(5.0, 0.37)
        h = 1e-6
        fd = (step(reg, p, p.b + h) - step(reg, p, p.b - h)) / (2 * h)
        assert fd == pytest.approx(stability(reg, p).multiplier, rel=1e-6)
