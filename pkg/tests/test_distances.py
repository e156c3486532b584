import numpy as np
import pytest
from scipy import stats

from oracles import grid_cvm, grid_ks
from spheregrains import RadiusDistribution, WeightedRadiusMeasure, cvm_distance, ks_distance
from spheregrains.distances import CVM_EXP_QUANTILE

U = RadiusDistribution.uniform(0.05, 0.1)
E = RadiusDistribution.exponential(20.0)


def _point(r):
    return WeightedRadiusMeasure(np.array([r]), np.array([1.0]))


def test_point_mass_examples():
    assert ks_distance(_point(0.05), U) == pytest.approx(1.0)
    assert ks_distance(_point(0.075), U) == pytest.approx(0.5)
    assert cvm_distance(_point(0.075), U) == pytest.approx(1.0 / 12.0, rel=1e-12)


def test_null_measure_is_maximally_far():
    assert ks_distance(WeightedRadiusMeasure.null(), U) == pytest.approx(1.0)
    assert cvm_distance(WeightedRadiusMeasure.null(), U) == pytest.approx(1.0 / 3.0)


def test_deterministic_law_uses_squared_gap():
    D = RadiusDistribution.deterministic(0.1)
    assert cvm_distance(_point(0.1), D) == 0.0
    assert cvm_distance(_point(0.2), D) == pytest.approx(1.0)
    half = WeightedRadiusMeasure(np.array([0.05, 0.2]), np.array([0.5, 0.5]))
    assert cvm_distance(half, D) == pytest.approx(0.25)
    assert ks_distance(half, D) == pytest.approx(0.5)


def _random_estimates(G, lo, hi, k, seed):
    rng = np.random.default_rng(seed)
    for _ in range(k):
        m = int(rng.integers(1, 60))
        atoms = rng.uniform(lo, hi, m)
        w = rng.exponential(1.0, m)
        yield atoms, w / w.sum()


def test_ks_cvm_uniform_against_grid_oracle():
    cdf = stats.uniform(loc=0.05, scale=0.05).cdf
    for atoms, w in _random_estimates(U, 0.04, 0.11, 100, 1):
        est = WeightedRadiusMeasure(atoms, w)
        assert ks_distance(est, U) == pytest.approx(grid_ks(atoms, w, cdf, 0.0, 0.12), abs=1e-6)
        assert cvm_distance(est, U) == pytest.approx(grid_cvm(atoms, w, cdf, 0.05, 0.1), abs=1e-8)


def test_ks_cvm_exponential_against_grid_oracle():
    law = stats.expon(scale=1 / 20.0)
    top = law.ppf(CVM_EXP_QUANTILE)
    for atoms, w in _random_estimates(E, 0.0, 0.4, 100, 2):
        est = WeightedRadiusMeasure(atoms, w)
        assert ks_distance(est, E) == pytest.approx(grid_ks(atoms, w, law.cdf, 0.0, 0.8), abs=1e-6)
        assert cvm_distance(est, E) == pytest.approx(grid_cvm(atoms, w, law.cdf, 0.0, top), abs=1e-8)


def test_ks_counts_missing_mass():
    sub = WeightedRadiusMeasure(np.array([0.07]), np.array([0.4]))
    assert ks_distance(sub, U) >= 0.6 - 1e-12
