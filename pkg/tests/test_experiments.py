import json
import math
from dataclasses import replace

import numpy as np
import pytest

import spheregrains.experiments as ex
from spheregrains import GaugeBody, ModelParams, RadiusDistribution, Window
from spheregrains.errors import InsufficientMarginError
from spheregrains.experiments import (
    FAIL,
    PUBLISHED_TABLE_25,
    PASS,
    SKIPPED,
    TABLE_ESTIMATORS,
    CampaignFailed,
    EstimatorSpec,
    ExperimentConfig,
    ValidationConfig,
    compare_to_published,
    identities_suite,
    published_value,
    refb_integral,
    refb_monte_carlo,
    refb_suite,
    run_table_experiment,
    run_validation_suite,
    second_order_suite,
)


def small_config(**kw):
    base = dict(params=ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1)),
                estimators=tuple(EstimatorSpec.parse(s) for s in ("weighted:0.05", "limit", "hanisch:0.01")),
                h=1 / 60, replications=3, base_seed=50)
    base.update(kw)
    return ExperimentConfig(**base)


def test_table_has_twelve_rows_matching_published_keys():
    assert len(TABLE_ESTIMATORS) == 12
    assert [e.label for e in TABLE_ESTIMATORS] == list(PUBLISHED_TABLE_25)


@pytest.mark.parametrize("text", ["weighted:0.05", "limit", "minus:1", "uncorrected:0.01", "hanisch:1"])
def test_estimator_spec_roundtrip(text):
    assert EstimatorSpec.parse(text).label == text


@pytest.mark.parametrize("text", ["limit:0.1", "weighted", "weighted:0", "bogus:1"])
def test_estimator_spec_rejects(text):
    with pytest.raises(ValueError):
        EstimatorSpec.parse(text)


def test_published_value_lookup():
    assert published_value(PUBLISHED_TABLE_25, "limit", "spherical", "ks") == 0.171
    assert published_value(PUBLISHED_TABLE_25, "weighted:1", "linear", "cvm") == 5.139


def test_config_roundtrip_and_hash():
    cfg = small_config()
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.to_dict() == cfg.to_dict() and again.config_hash() == cfg.config_hash()
    assert replace(cfg, base_seed=51).config_hash() != cfg.config_hash()
    assert cfg.reach == 0.05


def test_sequential_and_parallel_csv_identical():
    seq = run_table_experiment(small_config())
    par = run_table_experiment(small_config(workers=2))
    assert seq.to_csv() == par.to_csv()
    assert seq.to_csv() == run_table_experiment(small_config()).to_csv()
    assert seq.to_csv().splitlines()[0] == "estimator,gauge,n,mean_ks,se_ks,mean_cvm1000,se_cvm1000"
    assert len(seq.rows) == 6 and all(r.n == 3 for r in seq.rows)


def test_metadata_contents():
    res = run_table_experiment(small_config(replications=2))
    meta = res.metadata()
    assert meta["config_hash"] == res.config.config_hash() and meta["seed"] == 50 and meta["aborted"] == []
    json.dumps(meta)


def test_limit_and_tiny_band_rows_are_close():
    res = run_table_experiment(small_config(replications=2, h=1 / 150))
    assert res.row("limit", "spherical").mean_ks == pytest.approx(res.row("hanisch:0.01", "spherical").mean_ks,
                                                                  abs=0.05)


def test_campaign_fails_when_replications_abort(monkeypatch):
    real = ex._replication

    def flaky(cfg, rep):
        if rep == 1:
            raise InsufficientMarginError("boom")
        return real(cfg, rep)

    monkeypatch.setattr(ex, "_replication", flaky)
    with pytest.raises(CampaignFailed):
        run_table_experiment(small_config())

    # one abort in 200 is within the 1% allowance
    def first_fails(cfg, rep):
        if rep == 0:
            raise InsufficientMarginError("boom")
        return {(s.label, g): (0.1, 1.0) for s in cfg.estimators for g in cfg.gauges}

    monkeypatch.setattr(ex, "_replication", first_fails)
    res = run_table_experiment(small_config(replications=200))
    assert res.aborted[0][0] == 0 and res.rows[0].n == 199


def test_compare_to_published_rule():
    cfg = small_config(estimators=(EstimatorSpec.parse("limit"),), gauges=("spherical",))
    row = ex.TableRow("limit", "spherical", 100, 0.17, 0.002, 7.2, 0.1)
    res = ex.TableResult(cfg, (row,), ())
    out = compare_to_published(res, PUBLISHED_TABLE_25)
    assert [o[-1] for o in out] == [True, True]
    far = ex.TableResult(cfg, (replace(row, mean_ks=0.2),), ())
    assert compare_to_published(far, PUBLISHED_TABLE_25)[0][-1] is False


def test_refb_quadrature_closed_forms():
    assert refb_integral(GaugeBody.ball(2), 0.07, 0.05) == pytest.approx(2 * math.pi * (0.07 + 0.025), rel=1e-12)
    assert refb_integral(GaugeBody.segment((1.0, 0.0)), 0.07, 0.05) == pytest.approx(0.14, rel=1e-12)
    rng = np.random.default_rng(0)
    mc, se = refb_monte_carlo(GaugeBody.segment((0.0, 1.0)), 0.07, 0.05, 200_000, rng)
    assert abs(mc - 0.14) <= 4 * se


def test_zero_reps_gives_skipped_suites_and_exit_two():
    rep = run_validation_suite(ValidationConfig().with_reps(0))
    assert {s.status for s in rep.suites} == {SKIPPED}
    assert rep.exit_code == 2 and not rep.passed
    json.loads(rep.to_json())


def test_small_suites_pass():
    cfg = ValidationConfig(refb_samples=100_000, identity_reps=3)
    assert refb_suite(cfg).status == PASS
    assert identities_suite(cfg).status == PASS
    assert second_order_suite(replace(cfg, second_order_reps=2000)).status == PASS


def test_suite_errors_are_failures(monkeypatch):
    def broken(cfg):
        raise InsufficientMarginError("no room")

    monkeypatch.setitem(ex.SUITES, "refb", broken)
    rep = run_validation_suite(replace(ValidationConfig(), suites=("refb",)))
    assert rep.suites[0].status == FAIL and rep.exit_code == 2


def test_window_must_match_dimension():
    with pytest.raises(ValueError):
        small_config(window=Window.unit(3))
