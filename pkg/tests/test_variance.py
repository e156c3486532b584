import math

import numpy as np
import pytest

import spheregrains.variance as var_mod
from spheregrains import (
    AXIS_SEGMENTS,
    ModelParams,
    RadiusDistribution,
    RadiusSet,
    WeightFunction,
    clt_campaign,
    empirical_variance_curve,
    sigma2,
    sigma_G2,
)
from spheregrains.errors import BoundsViolationError, UnsupportedDimensionError, UnsupportedGaugeError
from spheregrains.variance import _Integrator, _indicator, sigma_G2_report

F05 = WeightFunction.band(0.05)
SMALL = dict(m=2**10, scrambles=8, seed=1)


def test_zero_when_G_of_C_is_degenerate(params25):
    assert sigma_G2(RadiusSet.upto(0.01), params25, F05, **SMALL) == 0.0
    assert sigma_G2(RadiusSet.everything(), params25, F05, **SMALL) == 0.0


def test_empty_set_has_zero_variance(params25):
    assert sigma2(RadiusSet.empty(), params25, F05, **SMALL).sigma2 == 0.0


def test_deterministic_radius_outside_C_gives_zero():
    p = ModelParams(25.0, RadiusDistribution.deterministic(0.08))
    res = sigma2(RadiusSet.upto(0.05), p, F05, **SMALL)
    assert res.sigma2 == 0.0 and res.linear == 0.0 and res.quadratic == 0.0


def test_positive_and_decomposed(params25):
    res = sigma2(RadiusSet.upto(0.075), params25, F05, **SMALL)
    assert res.sigma2 > 0 and res.linear > 0
    assert res.decomposition == pytest.approx((res.linear, res.quadratic))
    assert res.sigma2 == pytest.approx(res.linear + res.quadratic)
    assert res.n_samples == 2**10 * 8


def test_two_routes_agree(params25):
    rep = sigma_G2_report(RadiusSet.upto(0.075), params25, F05, **SMALL)
    assert rep.agree()
    assert rep.combination > 0 and rep.direct > 0
    assert rep.beta * 25.0 == pytest.approx(11.3147, rel=1e-4)


def test_quadratic_form_identities(params25):
    # on common samples the variance is an exact quadratic form in the radius weight
    integ = _Integrator(params25, F05, 2**9, 4, 3)
    a, b = _indicator(RadiusSet.upto(0.07)), _indicator(RadiusSet.between(0.08, 1.0))

    def Q(psi):
        lin, quad = integ.per_scramble(psi)
        return lin + quad

    plus = Q(lambda r: a(r) + b(r))
    minus = Q(lambda r: a(r) - b(r))
    assert np.allclose(plus + minus, 2 * Q(a) + 2 * Q(b), rtol=1e-10)
    assert np.allclose(Q(lambda r: 3.0 * a(r)), 9.0 * Q(a), rtol=1e-12)


def test_covariance_identity_on_samples(params25):
    # var(A + B) = var A + var B + 2 cov(A, B) with A, B the masses of disjoint sets
    C = RadiusSet.upto(0.075)
    integ = _Integrator(params25, F05, 2**9, 4, 5)
    lin, quad = integ.per_scramble(_indicator(C))
    lin2, quad2 = integ.per_scramble(_indicator(C.complement()))
    lin3, quad3 = integ.per_scramble(_indicator(RadiusSet.everything()))
    cov = 0.5 * ((lin3 + quad3) - (lin + quad) - (lin2 + quad2))
    # the implied covariance must respect the Cauchy-Schwarz bound
    assert np.all(np.abs(cov) <= np.sqrt((lin + quad) * (lin2 + quad2)) * (1 + 1e-9))


def test_combination_matches_formula(params25):
    C = RadiusSet.upto(0.075)
    rep = sigma_G2_report(C, params25, F05, **SMALL)
    s = {k: sigma2(S, params25, F05, **SMALL).sigma2
         for k, S in (("C", C), ("Cc", C.complement()), ("all", RadiusSet.everything()))}
    expect = (0.5 * s["C"] + 0.5 * s["Cc"] - 0.25 * s["all"]) / (25.0 * rep.beta) ** 2
    assert rep.combination == pytest.approx(expect, rel=1e-10)


def test_rejects_unsupported_settings(params25):
    with pytest.raises(UnsupportedGaugeError):
        sigma2(RadiusSet.upto(0.075), params25, F05, AXIS_SEGMENTS[0], **SMALL)
    p3 = ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1), dim=3)
    with pytest.raises(UnsupportedDimensionError):
        sigma2(RadiusSet.upto(0.075), p3, F05, **SMALL)


def test_bounds_violation_is_raised(params25, monkeypatch):
    monkeypatch.setattr(var_mod, "expected_lens_volume", lambda *a, **k: np.full(np.shape(a[0]), 10.0))
    with pytest.raises(BoundsViolationError):
        sigma2(RadiusSet.upto(0.075), params25, F05, **SMALL)


def test_empirical_curve_shape_and_seeds(params25):
    pts = empirical_variance_curve(RadiusSet.upto(0.075), params25, F05, [0.5, 1.0], 4, seed=7)
    assert [p.n for p in pts] == [0.5, 1.0] and pts[1].area == pytest.approx(4.0)
    again = empirical_variance_curve(RadiusSet.upto(0.075), params25, F05, [0.5, 1.0], 4, seed=7)
    assert np.array_equal(pts[1].values, again[1].values)
    with pytest.raises(ValueError):
        empirical_variance_curve(RadiusSet.upto(0.075), params25, F05, [1.0], 1, seed=7)


def test_empirical_variance_near_limit(params25):
    C = RadiusSet.everything()
    limit = sigma2(C, params25, F05, m=2**11, scrambles=8).sigma2
    (pt,) = empirical_variance_curve(C, params25, F05, [2.0], 120, seed=31)
    assert abs(pt.variance - limit) <= 3 * pt.stderr + 0.1 * limit


def test_clt_campaign_guards(params25):
    with pytest.raises(ValueError):
        clt_campaign(RadiusSet.upto(0.01), params25, F05, 1.0, 10, seed=0)


def test_clt_campaign_small(params25):
    rep = clt_campaign(RadiusSet.upto(0.075), params25, F05, 1.0, 30, seed=3)
    assert rep.statistics.shape == (30,) and 0 <= rep.p_value <= 1
    assert rep.variance_ratio == pytest.approx(rep.sample_variance / rep.sigma_G2)
    assert math.isfinite(rep.ks_statistic)
