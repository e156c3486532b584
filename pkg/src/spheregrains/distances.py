"""Kolmogorov-Smirnov and Cramér-von Mises distances to the true radius law."""

from __future__ import annotations

import numpy as np

from .estimators import WeightedRadiusMeasure
from .model import RadiusDistribution, RadiusKind

# Exponential radii: Cramér-von Mises support is cut at this quantile.
CVM_EXP_QUANTILE = 0.999


def ks_distance(est: WeightedRadiusMeasure, G: RadiusDistribution) -> float:
    """``sup_s |est(s) - G(s)|`` evaluated exactly at atoms and breakpoints.

    Between consecutive candidates ``est`` is constant and ``G`` monotone, so
    the supremum is attained as a value or a left limit at a candidate.
    """
    cand = np.unique(np.concatenate([[0.0], est.radii, G.breakpoints()]))
    right = np.abs(est.cdf(cand) - G.cdf(cand))
    left = np.abs(est.cdf_left(cand) - G.cdf_left(cand))
    tail = abs(est.total - 1.0)
    return float(max(right.max(), left.max(), tail))


def cvm_support(G: RadiusDistribution) -> tuple[float, float]:
    if G.kind is RadiusKind.EXPONENTIAL:
        return 0.0, float(G.ppf(CVM_EXP_QUANTILE))
    return G.support


def cvm_distance(est: WeightedRadiusMeasure, G: RadiusDistribution) -> float:
    """``∫_a^b (est(s) - G(s))^2 ds / (b - a)`` over the support of ``G``.

    Integrated piecewise in closed form.  For a point mass the support has
    length zero and the squared gap at the atom is returned instead.
    """
    a, b = cvm_support(G)
    if b <= a:
        return float((est.cdf(a) - G.cdf(a)) ** 2)
    inner = np.unique(est.radii[(est.radii > a) & (est.radii < b)])
    edges = np.concatenate([[a], inner, [b]])
    levels = est.cdf(edges[:-1])
    total = 0.0
    if G.kind is RadiusKind.UNIFORM:
        v = (edges - a) / (b - a)
        d1 = v[1:] - levels
        d0 = v[:-1] - levels
        total = float(np.sum(d1**3 - d0**3) / 3.0)
    else:
        lam = G.params[0]
        e0 = np.exp(-lam * edges[:-1])
        e1 = np.exp(-lam * edges[1:])
        c1 = levels - 1.0
        # ∫ (c - 1 + e^{-lam s})^2 ds
        seg = c1**2 * np.diff(edges) + 2.0 * c1 * (e0 - e1) / lam + (e0**2 - e1**2) / (2.0 * lam)
        total = float(np.sum(seg)) / (b - a)
    return max(total, 0.0)


def dense_grid_ks(est: WeightedRadiusMeasure, G: RadiusDistribution, n: int = 1_000_000,
                  upper: float | None = None) -> float:
    """Brute-force KS on a uniform grid (test oracle)."""
    upper = upper if upper is not None else max(float(G.r_sup), float(est.radii.max(initial=0.0))) * 1.1 + 1e-9
    s = np.linspace(0.0, upper, n)
    return float(np.max(np.abs(est.cdf(s) - G.cdf(s))))


def dense_grid_cvm(est: WeightedRadiusMeasure, G: RadiusDistribution, n: int = 1_000_000) -> float:
    """Midpoint-rule CvM on a uniform grid (test oracle)."""
    a, b = cvm_support(G)
    s = a + (np.arange(n) + 0.5) * (b - a) / n
    return float(np.mean((est.cdf(s) - G.cdf(s)) ** 2))


__all__ = ["ks_distance", "cvm_distance", "dense_grid_ks", "dense_grid_cvm"]
