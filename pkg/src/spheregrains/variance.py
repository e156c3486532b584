"""Asymptotic variances of the weighted measure and the ratio estimator.

Everything here is planar with the unit-disk gauge.  Write ``g(x)`` for the
integrand of the random measure at ``x``.  The covariance of ``g(0)`` and
``g(u)`` splits into two parts:

* both points hit the same grain, which gives the term linear in the intensity;
* they hit two different grains, which gives the quadratic term.

After polar substitution around the contacted grains the Jacobians cancel
against ``h_B``, leaving::

    T1 = ∫ psi(r)^2 G(dr) ∫∫ f(s1) f(s2) E_theta[ F2(|u|; s1, s2) ] ds1 ds2
    T2 = ∫∫ psi(r1) psi(r2) G G ∫∫ f f ∫ [P1 P2 F2(u) - F(s1) F(s2)] du

where ``|u|^2 = a^2 + b^2 - 2ab cos(theta)`` with ``a = s1 + r``,
``b = s2 + r``.  ``P1`` and ``P2`` are the probabilities that the grain
contacted from one point does not cover the other point's empty disk.  The
bracket vanishes once ``|u| >= s1 + s2 + 2 r_sup``.  Integrals are evaluated
by scrambled Sobol points; the spread over independent scrambles is the
reported standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.stats import qmc

from .emptyspace import (
    WeightFunction,
    beta_constant,
    check_assumption,
    empty_space_Fbar,
    expected_lens_volume,
    tail_cutoff,
)
from .errors import BoundsViolationError, UnsupportedDimensionError, UnsupportedGaugeError
from .estimators import EstimatorConfig, GridContacts, Method, RadiusSet, eta_measure
from .geometry import GaugeBody, circle_fraction_outside
from .model import ModelParams, Window, sample_realization

# Grid spacing used by the growing-window campaigns (coarser than the
# estimation default; the campaigns cover windows up to 64 times larger).
CAMPAIGN_H = 1.0 / 100.0
# Relative slack allowed when checking F̄F̄ <= F̄2 <= sqrt(F̄F̄) in floating point.
BOUNDS_RTOL = 1e-10


@dataclass(frozen=True)
class VarianceResult:
    """``sigma2 = linear + quadratic`` with a QMC standard error."""

    sigma2: float
    linear: float
    quadratic: float
    stderr: float
    n_samples: int
    n_scrambles: int

    @property
    def decomposition(self) -> tuple[float, float]:
        return self.linear, self.quadratic


@dataclass(frozen=True)
class GVarianceReport:
    """The ratio-estimator variance by the combination and the direct path."""

    combination: float
    combination_stderr: float
    direct: float
    direct_stderr: float
    beta: float
    prob: float

    @property
    def value(self) -> float:
        return max(self.combination, 0.0)

    def agree(self, k: float = 2.0) -> bool:
        return abs(self.combination - self.direct) <= k * (self.combination_stderr + self.direct_stderr)


@dataclass(frozen=True)
class VariancePoint:
    n: float
    area: float
    variance: float
    stderr: float
    mean: float
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CltReport:
    replications: int
    statistics: np.ndarray = field(repr=False)
    ks_statistic: float
    p_value: float
    sigma_G2: float
    sample_variance: float
    seed: int

    @property
    def variance_ratio(self) -> float:
        return self.sample_variance / self.sigma_G2


def _check_setting(params: ModelParams, B: GaugeBody | None):
    if params.dim != 2:
        raise UnsupportedDimensionError("variance integrals are implemented for d = 2")
    if B is not None and not B.is_ball:
        raise UnsupportedGaugeError("variance integrals are implemented for the unit-disk gauge")


def _checked_F2(dist, s1, s2, params: ModelParams):
    ball = GaugeBody.ball(2)
    fb1 = empty_space_Fbar(s1, params, ball)
    fb2 = empty_space_Fbar(s2, params, ball)
    prod = fb1 * fb2
    val = prod * np.exp(params.intensity * expected_lens_volume(dist, s1, s2, params))
    lo_bad = val < prod * (1.0 - BOUNDS_RTOL)
    hi_bad = val > np.sqrt(prod) * (1.0 + BOUNDS_RTOL)
    if np.any(lo_bad | hi_bad):
        k = int(np.flatnonzero(lo_bad | hi_bad)[0])
        raise BoundsViolationError(
            "second-order empty space value outside its bounds",
            {"dist": float(np.ravel(dist)[k]), "s1": float(np.ravel(s1)[k]),
             "s2": float(np.ravel(s2)[k]), "value": float(np.ravel(val)[k]),
             "lower": float(np.ravel(prod)[k]), "upper": float(np.sqrt(np.ravel(prod)[k])),
             "count": int(np.sum(lo_bad | hi_bad))},
        )
    return val, prod


class _Integrator:
    """Shared QMC samples for all radius weightings (common random numbers)."""

    def __init__(self, params: ModelParams, f: WeightFunction, m: int, scrambles: int, seed: int):
        self.params = params
        G = params.radius_dist
        self.s_top = min(f.upper, tail_cutoff(params, GaugeBody.ball(2)))
        self.r_sup = G.r_sup
        self.m = m
        self.scrambles = scrambles
        ss = np.random.SeedSequence(seed)
        self._one, self._two = [], []
        for child in ss.spawn(scrambles):
            k1, k2 = child.spawn(2)
            self._one.append(self._linear_samples(qmc.Sobol(4, seed=np.random.default_rng(k1)).random(m), f))
            self._two.append(self._quadratic_samples(qmc.Sobol(5, seed=np.random.default_rng(k2)).random(m), f))

    def _s(self, q, f):
        s = self.s_top * q
        return s, np.asarray(f(s)) * self.s_top

    def _linear_samples(self, q, f):
        G = self.params.radius_dist
        r = G.ppf(q[:, 0])
        s1, w1 = self._s(q[:, 1], f)
        s2, w2 = self._s(q[:, 2], f)
        theta = 2.0 * math.pi * q[:, 3]
        a, b = s1 + r, s2 + r
        dist = np.sqrt(np.maximum(a * a + b * b - 2.0 * a * b * np.cos(theta), 0.0))
        F2, _ = _checked_F2(dist, s1, s2, self.params)
        return r, w1 * w2 * F2

    def _quadratic_samples(self, q, f):
        G = self.params.radius_dist
        r1 = G.ppf(q[:, 0])
        r2 = G.ppf(q[:, 1])
        s1, w1 = self._s(q[:, 2], f)
        s2, w2 = self._s(q[:, 3], f)
        L = s1 + s2 + 2.0 * self.r_sup
        rho = L * np.sqrt(q[:, 4])
        F2, prod = _checked_F2(rho, s1, s2, self.params)
        # P1: grain hit from u (radius r2) misses the empty disk about 0
        p1 = circle_fraction_outside(s2 + r2, rho, s1 + r2)
        # P2: grain hit from 0 (radius r1) misses the empty disk about u
        p2 = circle_fraction_outside(s1 + r1, rho, s2 + r1)
        area = math.pi * L * L
        full = w1 * w2 * area * (p1 * p2 * F2 - prod)
        centred = w1 * w2 * area * (1.0 - p1) * (1.0 - p2) * F2
        return r1, r2, full, centred

    def per_scramble(self, psi, centred: bool = False):
        """Per-scramble ``(gamma T1, gamma^2 T2)`` for the radius weight ``psi``."""
        g = self.params.intensity
        lin, quad = [], []
        for (r, v1), (r1, r2, full, cen) in zip(self._one, self._two):
            lin.append(g * np.mean(psi(r) ** 2 * v1))
            vals = cen if centred else full
            quad.append(g * g * np.mean(psi(r1) * psi(r2) * vals))
        return np.array(lin), np.array(quad)


def _result(lin, quad, m, k) -> VarianceResult:
    tot = lin + quad
    se = float(np.std(tot, ddof=1) / math.sqrt(k)) if k > 1 else math.nan
    return VarianceResult(float(tot.mean()), float(lin.mean()), float(quad.mean()), se, m * k, k)


def _indicator(C: RadiusSet):
    return lambda r: C.contains(r).astype(float)


def sigma2(C: RadiusSet, params: ModelParams, f: WeightFunction, B: GaugeBody | None = None,
           m: int = 2**13, scrambles: int = 16, seed: int = 0) -> VarianceResult:
    """Asymptotic variance of ``eta_{W_n}(C) / sqrt|W_n|`` for the unit-disk gauge."""
    _check_setting(params, B)
    check_assumption(f, params, GaugeBody.ball(2))
    integ = _Integrator(params, f, m, scrambles, seed)
    lin, quad = integ.per_scramble(_indicator(C))
    return _result(lin, quad, m, scrambles)


def sigma_G2_report(C: RadiusSet, params: ModelParams, f: WeightFunction, B: GaugeBody | None = None,
                    m: int = 2**13, scrambles: int = 16, seed: int = 0) -> GVarianceReport:
    """Ratio-estimator variance by both routes on common QMC samples.

    The combination route weights ``sigma2`` of ``C``, its complement and
    the whole half-line.  The direct route integrates the centred radius
    weight ``1_C - G(C)``; since that weight has zero mean under ``G`` the
    subtracted product term drops out and the integrand has compact support.
    """
    _check_setting(params, B)
    ball = GaugeBody.ball(2)
    check_assumption(f, params, ball)
    beta = beta_constant(f, params, ball)
    p = C.probability(params.radius_dist)
    norm = (params.intensity * beta) ** 2
    if p <= 0.0 or p >= 1.0:
        return GVarianceReport(0.0, 0.0, 0.0, 0.0, beta, p)
    integ = _Integrator(params, f, m, scrambles, seed)
    parts = {}
    for name, S in (("C", C), ("Cc", C.complement()), ("all", RadiusSet.everything())):
        lin, quad = integ.per_scramble(_indicator(S))
        parts[name] = lin + quad
    comb = ((1.0 - p) * parts["C"] + p * parts["Cc"] - p * (1.0 - p) * parts["all"]) / norm
    lin, quad = integ.per_scramble(lambda r: C.contains(r) - p, centred=True)
    direct = (lin + quad) / norm
    k = scrambles
    return GVarianceReport(
        float(comb.mean()), float(np.std(comb, ddof=1) / math.sqrt(k)),
        float(direct.mean()), float(np.std(direct, ddof=1) / math.sqrt(k)), beta, p,
    )


def sigma_G2(C: RadiusSet, params: ModelParams, f: WeightFunction, B: GaugeBody | None = None,
             **kwargs) -> float:
    """``(gamma beta)^-2 [(1-G(C)) s(C) + G(C) s(C') - G(C)(1-G(C)) s(R+)]``."""
    return sigma_G2_report(C, params, f, B, **kwargs).value


def _eta_values(sets, params, f, n, h, seed):
    W = Window.centered(n, params.dim)
    Z = sample_realization(params, W, seed, reach=f.upper)
    cfg = EstimatorConfig(Method.WEIGHTED, GaugeBody.ball(params.dim), f, h)
    grid = GridContacts(Z, W, h, cap=f.upper)
    eta = eta_measure(Z, W, cfg, grid)
    return [eta.mass(S) for S in sets], W.volume


def _sample_variance_se(x: np.ndarray) -> float:
    # delta-method standard error of the unbiased sample variance
    k = len(x)
    c = x - x.mean()
    m2, m4 = np.mean(c**2), np.mean(c**4)
    return float(math.sqrt(max(m4 - m2 * m2 * (k - 3) / (k - 1), 0.0) / k))


def empirical_variance_curve(C: RadiusSet, params: ModelParams, f: WeightFunction, n_list,
                             replications: int, seed: int, h: float = CAMPAIGN_H) -> list[VariancePoint]:
    """Sample variance of ``eta_{W_n}(C) / sqrt|W_n|`` on ``W_n = [-n, n)^2``.

    Replication ``r`` at window index ``j`` uses seed ``seed + j * replications + r``.
    """
    if replications < 2:
        raise ValueError("need at least two replications")
    out = []
    for j, n in enumerate(n_list):
        vals = np.empty(replications)
        area = 0.0
        for r in range(replications):
            (v,), area = _eta_values([C], params, f, n, h, seed + j * replications + r)
            vals[r] = v
        scaled = vals / math.sqrt(area)
        out.append(VariancePoint(float(n), area, float(np.var(scaled, ddof=1)),
                                 _sample_variance_se(scaled), float(vals.mean() / area), vals))
    return out


def clt_campaign(C: RadiusSet, params: ModelParams, f: WeightFunction, n: float, replications: int,
                 seed: int, h: float = CAMPAIGN_H, sigma: GVarianceReport | None = None) -> CltReport:
    """Standardized ratio-estimator errors on ``W_n`` and a KS test against N(0, 1)."""
    p = C.probability(params.radius_dist)
    if p <= 0.0 or p >= 1.0:
        raise ValueError("the limit variance vanishes when G(C) is 0 or 1")
    if replications < 2:
        raise ValueError("need at least two replications")
    sigma = sigma or sigma_G2_report(C, params, f)
    sg2 = sigma.value
    if not sg2 > 0:
        raise ValueError("computed limit variance is not positive")
    stat = np.empty(replications)
    for r in range(replications):
        (a, tot), area = _eta_values([C, RadiusSet.everything()], params, f, n, h, seed + r)
        est = a / tot if tot > 0 else 0.0
        stat[r] = math.sqrt(area) * (est - p)
    z = stat / math.sqrt(sg2)
    ks = stats.kstest(z, "norm")
    return CltReport(replications, z, float(ks.statistic), float(ks.pvalue), sg2,
                     float(np.var(stat, ddof=1)), seed)


__all__ = [
    "VarianceResult", "GVarianceReport", "VariancePoint", "CltReport",
    "sigma2", "sigma_G2", "sigma_G2_report", "empirical_variance_curve", "clt_campaign",
]
