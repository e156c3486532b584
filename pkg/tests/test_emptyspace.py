import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spheregrains import (
    AXIS_SEGMENTS,
    GaugeBody,
    ModelParams,
    RadiusDistribution,
    Window,
    WeightFunction,
    beta_constant,
    decay_constant_c,
    empty_space_F,
    empty_space_Fbar,
    sample_realization,
    second_order_F2bar,
)
from spheregrains.emptyspace import check_assumption, second_order_bounds, second_order_F2bar_radial
from spheregrains.errors import AssumptionViolatedError, UnsupportedGaugeError
from spheregrains.model import contact_field

BALL = GaugeBody.ball(2)


def test_volume_fraction(params25):
    assert empty_space_F(0.0, params25, BALL) == pytest.approx(0.36754672, abs=1e-8)


def test_decay_constant_examples(params25):
    assert decay_constant_c(params25, BALL) == pytest.approx(2.9452431, abs=1e-7)
    # segments have V_1 = 1 instead of pi
    assert decay_constant_c(params25, AXIS_SEGMENTS[0]) == pytest.approx(2.9452431 / math.pi, rel=1e-7)


def test_segment_F_is_direction_free(params25):
    t = np.linspace(0, 0.3, 7)
    vals = [empty_space_F(t, params25, B) for B in AXIS_SEGMENTS]
    for v in vals[1:]:
        assert np.array_equal(v, vals[0])


def test_segment_F_closed_form(params25):
    t = 0.07
    area = math.pi * 0.0058333333333333 + 2 * t * 0.075
    assert empty_space_Fbar(t, params25, AXIS_SEGMENTS[2]) == pytest.approx(math.exp(-25 * area), rel=1e-12)


@pytest.mark.parametrize("B", [BALL, *AXIS_SEGMENTS])
def test_Fbar_below_exponential_envelope(params25, B):
    c = decay_constant_c(params25, B)
    t = np.linspace(0, 2, 201)
    assert np.all(empty_space_Fbar(t, params25, B) <= np.exp(-4 * c * t) + 1e-15)


def test_F2_at_coincident_points_is_F1(params25):
    for t in (0.0, 0.03, 0.1):
        assert second_order_F2bar((0.0, 0.0), t, t, params25) == pytest.approx(
            empty_space_Fbar(t, params25, BALL), rel=1e-9)
    # unequal times at the same point: the larger one wins
    assert second_order_F2bar((0.0, 0.0), 0.02, 0.06, params25) == pytest.approx(
        empty_space_Fbar(0.06, params25, BALL), rel=1e-9)


def test_F2_factorizes_far_apart(params25):
    lo, _ = second_order_bounds(0.05, 0.03, params25)
    assert second_order_F2bar((0.5, 0.0), 0.05, 0.03, params25) == pytest.approx(lo, rel=1e-14)


def test_F2_rejects_segment(params25):
    with pytest.raises(UnsupportedGaugeError):
        second_order_F2bar((0.1, 0.0), 0.01, 0.01, params25, AXIS_SEGMENTS[0])


@given(st.floats(0, 0.5), st.floats(0, 0.2), st.floats(0, 0.2))
def test_F2_within_bounds(dist, t1, t2):
    p = ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1))
    val = second_order_F2bar_radial(dist, t1, t2, p)
    lo, hi = second_order_bounds(t1, t2, p)
    assert lo * (1 - 1e-10) <= val <= hi * (1 + 1e-10)


@given(st.floats(0, 0.3), st.floats(0, 0.3), st.floats(0, 0.1))
def test_F2_nonincreasing_in_times_and_distance(d1, d2, t):
    p = ModelParams(25.0, RadiusDistribution.exponential(20.0))
    lo, hi = sorted((d1, d2))
    assert second_order_F2bar_radial(hi, t, t, p) <= second_order_F2bar_radial(lo, t, t, p) * (1 + 1e-10)
    assert second_order_F2bar_radial(lo, t + 0.01, t, p) <= second_order_F2bar_radial(lo, t, t, p) * (1 + 1e-10)


def test_F2_against_simulated_pairs(params25, unit):
    pairs = [((0.45, 0.5), (0.55, 0.5), 0.02, 0.04), ((0.4, 0.4), (0.6, 0.55), 0.05, 0.0)]
    reps = 4000
    hits = np.zeros(len(pairs))
    pts = np.array([p for a, b, *_ in pairs for p in (a, b)])
    for r in range(reps):
        Z = sample_realization(params25, unit, 7000 + r, reach=0.06)
        d = contact_field(pts, Z, BALL, cap=0.06).distance
        for k, (_, _, t1, t2) in enumerate(pairs):
            hits[k] += (d[2 * k] > t1) and (d[2 * k + 1] > t2)
    for k, (a, b, t1, t2) in enumerate(pairs):
        exact = second_order_F2bar(np.subtract(b, a), t1, t2, params25)
        se = math.sqrt(exact * (1 - exact) / reps)
        assert abs(hits[k] / reps - exact) <= 4 * se


def _simpson(f, a, b, n=20000):
    x = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    return (b - a) / (3 * n) * np.sum(w * f(x))


@pytest.mark.parametrize("B", [BALL, AXIS_SEGMENTS[1]])
@pytest.mark.parametrize("eps", [0.01, 0.05, 0.2])
def test_beta_band_against_composite_rule(params25, B, eps):
    f = WeightFunction.band(eps)
    ref = _simpson(lambda t: empty_space_Fbar(t, params25, B) / eps, 0.0, eps)
    assert beta_constant(f, params25, B) == pytest.approx(ref, rel=1e-9)


def test_beta_tabulated(params25):
    f = WeightFunction.tabulated([0.0, 0.02, 0.06], [0.0, 30.0, 0.0])
    ref = _simpson(lambda t: f(t) * empty_space_Fbar(t, params25, BALL), 0.0, 0.02) + _simpson(
        lambda t: f(t) * empty_space_Fbar(t, params25, BALL), 0.02, 0.06)
    assert beta_constant(f, params25, BALL) == pytest.approx(ref, rel=1e-9)


def test_beta_nonpositive_raises(params25):
    f = WeightFunction.tabulated([0.0, 0.01], [0.0, 0.0])
    with pytest.raises(ValueError):
        beta_constant(f, params25, BALL)
    with pytest.raises(AssumptionViolatedError):
        check_assumption(f, params25, BALL)


def test_weight_function_values():
    f = WeightFunction.band(0.05)
    assert f(0.0) == 0.0 and f(0.05) == 20.0 and f(0.0500001) == 0.0 and f(math.inf) == 0.0
    with pytest.raises(ValueError):
        WeightFunction.band(0.0)
    with pytest.raises(ValueError):
        WeightFunction.tabulated([0.1, 0.05], [1.0, 1.0])
