import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import spheregrains.estimators as est_mod
from spheregrains import (
    AXIS_SEGMENTS,
    EstimatorConfig,
    GaugeBody,
    Method,
    ModelParams,
    RadiusDistribution,
    RadiusSet,
    Realization,
    WeightedRadiusMeasure,
    WeightFunction,
    Window,
    beta_constant,
    estimate_edge_corrected,
    estimate_ratio,
    eta_measure,
    ks_distance,
    sample_realization,
)
from spheregrains.errors import EmptyWindowError
from spheregrains.estimators import GridContacts, distance_to_boundary
from spheregrains.experiments import PASS, FAIL, ValidationConfig, unbiasedness_suite

BALL = GaugeBody.ball(2)
F05 = WeightFunction.band(0.05)


def test_radius_set_membership_and_complement():
    C = RadiusSet.between(0.05, 0.075)
    assert list(C.contains([0.05, 0.06, 0.075, 0.08])) == [False, True, True, False]
    comp = C.complement()
    r = np.linspace(0, 0.2, 41)
    assert np.all(C.contains(r) ^ comp.contains(r))
    assert RadiusSet.upto(0.0).contains(0.0)
    assert RadiusSet.everything().complement() == RadiusSet.empty()


@pytest.mark.parametrize("text", ["all", "upto:0.075", "between:0.05:0.08"])
def test_radius_set_parse(text):
    C = RadiusSet.parse(text)
    assert C.contains(0.07)


def test_radius_set_probability():
    G = RadiusDistribution.uniform(0.05, 0.1)
    assert RadiusSet.upto(0.075).probability(G) == pytest.approx(0.5)
    assert RadiusSet.between(0.06, 0.2).probability(G) == pytest.approx(0.8)


def test_null_measure_ratio_is_zero():
    m = WeightedRadiusMeasure.null()
    assert m.total == 0.0 and estimate_ratio(m, RadiusSet.everything()) == 0.0
    assert len(m.normalized()) == 0
    assert m.normalized().cdf(1.0) == 0.0


def test_estimate_ratio_and_cdf():
    m = WeightedRadiusMeasure(np.array([0.06, 0.08, 0.06]), np.array([1.0, 2.0, 1.0]))
    assert estimate_ratio(m, RadiusSet.upto(0.07)) == pytest.approx(0.5)
    n = m.normalized()
    assert n.cdf(0.06) == pytest.approx(0.5) and n.cdf_left(0.06) == 0.0 and n.cdf(1.0) == pytest.approx(1.0)
    merged = m.merged()
    assert list(merged.radii) == [0.06, 0.08] and list(merged.weights) == [2.0, 2.0]


def test_measure_rejects_negative_weights():
    with pytest.raises(ValueError):
        WeightedRadiusMeasure(np.array([0.1]), np.array([-1.0]))


def _one_grain(r=0.1, center=(0.5, 0.5)):
    p = ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1))
    W = Window.unit()
    return Realization(np.array([center], float), np.array([r]), W, W.dilate(0.2), 0.2, 0.1, p, 0, None)


def test_single_grain_ball_mass_is_annulus_ratio():
    # the integral of f(d)/h_B(d, r) over the annulus recovers exactly one unit
    Z = _one_grain()
    eta = eta_measure(Z, Z.window, EstimatorConfig(Method.WEIGHTED, BALL, F05, 1 / 600))
    assert len(eta) == 1 and eta.radii[0] == 0.1
    assert eta.total == pytest.approx(1.0, rel=2e-3)


@pytest.mark.parametrize("B", AXIS_SEGMENTS)
def test_single_grain_segment_mass(B):
    Z = _one_grain()
    eta = eta_measure(Z, Z.window, EstimatorConfig(Method.WEIGHTED, B, F05, 1 / 600))
    assert eta.total == pytest.approx(1.0, rel=5e-3)


def test_tiny_eps_minus_matches_weighted_interior(params25):
    # with the band shrinking, the eroded window tends to W
    W = Window.unit()
    Z = sample_realization(params25, W, 3, reach=1e-3)
    f = WeightFunction.band(1e-3)
    grid = GridContacts(Z, W, 1 / 300, cap=1e-3)
    a = estimate_edge_corrected(Z, W, EstimatorConfig(Method.WEIGHTED_MINUS, BALL, f, 1 / 300), grid)
    b = estimate_edge_corrected(Z, W, EstimatorConfig(Method.WEIGHTED, BALL, f, 1 / 300), grid)
    assert a.total == pytest.approx(b.total, rel=0.05)


def test_minus_sampling_on_empty_erosion(params25):
    W = Window((0.0, 0.0), (0.05, 0.05))
    Z = sample_realization(params25, W, 1, reach=0.05)
    with pytest.raises(EmptyWindowError):
        estimate_edge_corrected(Z, W, EstimatorConfig(Method.WEIGHTED_MINUS, BALL, F05, 1 / 300))


@pytest.mark.parametrize("B", AXIS_SEGMENTS)
def test_hanisch_equals_uncorrected_for_segments(params25, B):
    W = Window.unit()
    for seed in range(4):
        Z = sample_realization(params25, W, seed, reach=0.05)
        grid = GridContacts(Z, W, 1 / 150, cap=0.05)
        h = estimate_edge_corrected(Z, W, EstimatorConfig(Method.HANISCH, B, F05, 1 / 150), grid).merged()
        u = estimate_edge_corrected(Z, W, EstimatorConfig(Method.UNCORRECTED, B, F05, 1 / 150), grid).merged()
        assert np.array_equal(h.radii, u.radii)
        assert np.allclose(h.weights, u.weights, rtol=1e-12)


def test_distance_to_boundary():
    W = Window.unit()
    pts = np.array([[0.2, 0.7]])
    assert distance_to_boundary(pts, W, BALL)[0] == pytest.approx(0.2)
    assert distance_to_boundary(pts, W, GaugeBody.segment((0.0, 1.0)))[0] == pytest.approx(0.3)
    assert distance_to_boundary(pts, W, GaugeBody.segment((-1.0, 0.0)))[0] == pytest.approx(0.2)


@pytest.mark.parametrize("method", [Method.WEIGHTED, Method.WEIGHTED_MINUS, Method.UNCORRECTED, Method.HANISCH])
def test_normalized_estimates_are_probability_cdfs(params25, method):
    W = Window.unit()
    Z = sample_realization(params25, W, 21, reach=0.05)
    n = estimate_edge_corrected(Z, W, EstimatorConfig(method, BALL, F05, 1 / 100)).normalized()
    s = np.linspace(0, 0.2, 81)
    F = n.cdf(s)
    assert np.all(np.diff(F) >= -1e-15) and F[0] == 0.0 and F[-1] == pytest.approx(1.0)
    assert np.all(n.radii >= 0.05) and np.all(n.radii <= 0.1)


def test_grid_refinement_converges(params25):
    W = Window.unit()
    Z = sample_realization(params25, W, 4, reach=0.05)
    C = RadiusSet.upto(0.075)
    vals = [eta_measure(Z, W, EstimatorConfig(Method.WEIGHTED, BALL, F05, h)).mass(C) for h in (1 / 100, 1 / 300,
                                                                                             1 / 900)]
    assert abs(vals[1] - vals[2]) < abs(vals[0] - vals[2]) + 1e-3 * vals[2]
    assert vals[1] == pytest.approx(vals[2], rel=0.01)


def test_radius_zero_atoms_dropped_for_segments():
    p = ModelParams(25.0, RadiusDistribution.uniform(0.0, 0.1))
    W = Window.unit()
    # the point grain sits on a lattice row so +x rays from its left hit it
    Z = Realization(np.array([[0.5, 150.5 / 300], [0.3, 0.3]]), np.array([0.0, 0.05]), W, W.dilate(0.2), 0.2,
                    0.1, p, 0, None)
    with pytest.warns(RuntimeWarning, match="radius-0"):
        eta = eta_measure(Z, W, EstimatorConfig(Method.WEIGHTED, GaugeBody.segment((1.0, 0.0)), F05, 1 / 300))
    assert np.all(eta.radii > 0) and len(eta) == 1


def test_consistency_trend(params25):
    # KS distances of the weighted estimator shrink as the window grows
    G = params25.radius_dist
    means = []
    for n in (1, 2, 4):
        W = Window.centered(n)
        ks = []
        for r in range(50 if n < 4 else 15):
            Z = sample_realization(params25, W, 800 + r, reach=0.05)
            ks.append(ks_distance(eta_measure(Z, W, EstimatorConfig(Method.WEIGHTED, BALL, F05, 1 / 60)).normalized(), G))
        means.append(np.mean(ks))
    assert means[0] > means[1] > means[2]


@given(st.integers(0, 10**6))
def test_eta_is_additive_over_subwindows(seed):
    p = ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1))
    W = Window.unit()
    Z = sample_realization(p, W, seed, reach=0.05)
    cfg = EstimatorConfig(Method.WEIGHTED, BALL, F05, 1 / 50)
    grid = GridContacts(Z, W, 1 / 50, cap=0.05)
    full = eta_measure(Z, W, cfg, grid)
    left = eta_measure(Z, W, cfg, grid, region=Window((0.0, 0.0), (0.5, 1.0)))
    right = eta_measure(Z, W, cfg, grid, region=Window((0.5, 0.0), (1.0, 1.0)))
    assert full.total == pytest.approx(left.total + right.total, rel=1e-12)


def test_unbiasedness_holds_and_detects_mutation(monkeypatch):
    cfg = ValidationConfig(unbiasedness_reps=60)
    assert unbiasedness_suite(cfg).status == PASS
    real = est_mod.h_B
    monkeypatch.setattr(est_mod, "h_B", lambda t, r, B: 2.0 * real(t, r, B))
    assert unbiasedness_suite(cfg).status == FAIL


def test_scale_matches_beta(params25):
    # mean total mass over the unit window is gamma * beta
    W = Window.unit()
    beta = beta_constant(F05, params25, BALL)
    tot = [eta_measure(sample_realization(params25, W, 900 + r, reach=0.05), W,
                       EstimatorConfig(Method.WEIGHTED, BALL, F05, 1 / 100)).total for r in range(80)]
    m, se = np.mean(tot), np.std(tot, ddof=1) / math.sqrt(len(tot))
    assert abs(m - 25 * beta) <= 3.5 * se
