"""Command line interface: ``spheregrains {simulate,estimate,variance,table,validate}``.

Settings come from defaults, then an optional JSON ``--config`` file, then
flags; later sources win.  Exit codes: 0 success, 2 validation did not pass,
3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import SphereGrainsError
from .estimators import DEFAULT_H, RadiusSet
from .variance import CAMPAIGN_H

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 2, 3

DEFAULTS = {
    "gamma": 25.0,
    "radius_dist": "uniform:0.05:0.1",
    "window": "0:0:1:1",
    "gauge": None,
    "epsilon": 0.05,
    "grid_h": None,
    "reps": None,
    "seed": 1000,
    "method": None,
    "out": None,
    "radius_set": "upto:0.075",
    "knots": None,
    "reach": None,
    "workers": 1,
}

METHODS = ("weighted", "minus", "uncorrected", "hanisch", "limit-spherical", "limit-linear")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with settings (flags override it)")
    p.add_argument("--gamma", type=float, help="germ intensity per unit area")
    p.add_argument("--radius-dist", help="uniform:a:b | exp:rate | det:r0")
    p.add_argument("--window", help="observation window x0:y0:x1:y1")
    p.add_argument("--seed", type=int, help="seed (replication r uses seed + r)")
    p.add_argument("--out", help="output path (prefix for table)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spheregrains", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="sample a realization and write it as CSV")
    _common(p)
    p.add_argument("--reach", type=float, help="largest gauge distance probed from the window")

    p = sub.add_parser("estimate", help="estimate the radius law from one realization")
    _common(p)
    p.add_argument("--input", help="realization CSV (otherwise one is simulated)")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--gauge", help="ball | segment:+x|-x|+y|-y")
    p.add_argument("--epsilon", type=float, help="band width of the weight function")
    p.add_argument("--grid-h", type=float, help="lattice spacing")
    p.add_argument("--knots", help="comma-separated radii at which to print the estimated CDF")

    p = sub.add_parser("variance", help="asymptotic variances by quasi-Monte Carlo")
    _common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--radius-set", help="all | upto:b | between:a:b")
    p.add_argument("--reps", type=int, help="if given, also run the growing-window check with this many replications")
    p.add_argument("--grid-h", type=float)

    p = sub.add_parser("table", help="distance table over replications")
    _common(p)
    p.add_argument("--method", help="comma-separated rows, e.g. weighted:1,limit,minus:0.05")
    p.add_argument("--gauge", help="comma-separated gauge sets: spherical,linear")
    p.add_argument("--grid-h", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--sequential", action="store_true", help="force a single process")

    p = sub.add_parser("validate", help="cross-module validation suites")
    _common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--grid-h", type=float)
    p.add_argument("--reps", type=int, help="override every replication count")
    p.add_argument("--suites", help="comma-separated subset of suites")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and explicit flags (flags win)."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(data) - set(DEFAULTS) - {"suites", "input"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key, val in vars(args).items():
        if key not in ("command", "config", "verbose") and val is not None and val is not False:
            cfg[key] = val
    return cfg


def _params(cfg):
    from .model import ModelParams, RadiusDistribution

    return ModelParams(float(cfg["gamma"]), RadiusDistribution.parse(cfg["radius_dist"]))


def _write(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(cfg) -> int:
    from .model import Window, sample_realization

    Z = sample_realization(_params(cfg), Window.parse(cfg["window"]), int(cfg["seed"]),
                           reach=cfg["reach"])
    _write(Z.to_csv(), cfg["out"])
    return EXIT_OK


def cmd_estimate(cfg) -> int:
    import numpy as np

    from .arcs import estimate_limit_linear, estimate_limit_spherical
    from .emptyspace import WeightFunction
    from .estimators import EstimatorConfig, Method, estimate_edge_corrected
    from .geometry import GaugeBody
    from .model import Realization, Window, sample_realization

    method = Method(cfg["method"] or "weighted")
    B = GaugeBody.parse(cfg["gauge"] or "ball")
    W = Window.parse(cfg["window"])
    eps = float(cfg["epsilon"])
    if cfg.get("input"):
        # a stored realization carries its own observation window
        Z = Realization.from_csv(Path(cfg["input"]).read_text())
        W = Z.window
    else:
        Z = sample_realization(_params(cfg), W, int(cfg["seed"]), reach=eps)
    if method is Method.LIMIT_SPHERICAL:
        est = estimate_limit_spherical(Z, W)
    elif method is Method.LIMIT_LINEAR:
        if B.is_ball:
            raise ConfigError("limit-linear needs a segment gauge")
        est = estimate_limit_linear(Z, W, B)
    else:
        ecfg = EstimatorConfig(method, B, WeightFunction.band(eps), float(cfg["grid_h"] or DEFAULT_H))
        est = estimate_edge_corrected(Z, W, ecfg)
    knots = None
    if cfg["knots"]:
        knots = np.array([float(k) for k in str(cfg["knots"]).split(",")])
    _write(est.to_csv(knots), cfg["out"])
    return EXIT_OK


def cmd_variance(cfg) -> int:
    from .emptyspace import WeightFunction
    from .variance import empirical_variance_curve, sigma2, sigma_G2_report

    params = _params(cfg)
    f = WeightFunction.band(float(cfg["epsilon"]))
    C = RadiusSet.parse(cfg["radius_set"])
    s_c = sigma2(C, params, f)
    s_all = sigma2(RadiusSet.everything(), params, f)
    sg = sigma_G2_report(C, params, f)
    out = {
        "inputs": {"params": params.to_dict(), "epsilon": f.eps, "radius_set": C.label(),
                   "seed": int(cfg["seed"])},
        "outputs": {
            "sigma2": {"value": s_c.sigma2, "stderr": s_c.stderr, "linear": s_c.linear,
                       "quadratic": s_c.quadratic},
            "sigma2_all": {"value": s_all.sigma2, "stderr": s_all.stderr},
            "sigma_G2": {"combination": sg.combination, "combination_stderr": sg.combination_stderr,
                         "direct": sg.direct, "direct_stderr": sg.direct_stderr, "beta": sg.beta},
        },
        "environment": {"version": __version__},
    }
    if cfg["reps"]:
        pts = empirical_variance_curve(C, params, f, [1.0, 2.0, 4.0], int(cfg["reps"]), int(cfg["seed"]),
                                       h=float(cfg["grid_h"] or CAMPAIGN_H))
        out["outputs"]["empirical"] = [{"n": p.n, "variance": p.variance, "stderr": p.stderr} for p in pts]
    _write(json.dumps(out, indent=2, sort_keys=True) + "\n", cfg["out"])
    return EXIT_OK


def cmd_table(cfg) -> int:
    from .experiments import PUBLISHED_TABLES, EstimatorSpec, ExperimentConfig, TABLE_ESTIMATORS, \
        compare_to_published, run_table_experiment
    from .model import Window

    ests = TABLE_ESTIMATORS
    if cfg["method"]:
        ests = tuple(EstimatorSpec.parse(s) for s in str(cfg["method"]).split(","))
    gauges = tuple(str(cfg["gauge"] or "spherical,linear").split(","))
    workers = 1 if cfg.get("sequential") else int(cfg["workers"])
    ecfg = ExperimentConfig(
        params=_params(cfg), window=Window.parse(cfg["window"]), gauges=gauges, estimators=ests,
        h=float(cfg["grid_h"] or DEFAULT_H), replications=int(cfg["reps"] or 100), base_seed=int(cfg["seed"]),
        workers=workers,
    )
    res = run_table_experiment(ecfg)
    if cfg["out"]:
        prefix = Path(cfg["out"])
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_suffix(".csv").write_text(res.to_csv())
        prefix.with_suffix(".json").write_text(json.dumps(res.metadata(), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(res.to_csv())
    table = PUBLISHED_TABLES.get(ecfg.params.intensity)
    if table is not None and ecfg.params.radius_dist.spec() == "uniform:0.05:0.1":
        for label, gauge, metric, mean, se, ref, ok in compare_to_published(res, table):
            print(f"{label:18s} {gauge:9s} {metric:3s} {mean:8.4f} ± {se:.4f}  published {ref:7.3f}  "
                  f"{'ok' if ok else 'OFF'}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(cfg) -> int:
    from .experiments import SUITES, ValidationConfig, run_validation_suite

    vcfg = ValidationConfig(params=_params(cfg), eps=float(cfg["epsilon"]), seed=int(cfg["seed"]),
                            h=float(cfg["grid_h"] or CAMPAIGN_H))
    if cfg["reps"] is not None:
        vcfg = vcfg.with_reps(int(cfg["reps"]))
    if cfg.get("suites"):
        names = tuple(cfg["suites"].split(",")) if isinstance(cfg["suites"], str) else tuple(cfg["suites"])
        bad = [n for n in names if n not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}")
        vcfg = replace(vcfg, suites=names)
    report = run_validation_suite(vcfg)
    _write(report.to_json(), cfg["out"])
    for s in report.suites:
        print(f"{s.name:14s} {s.status}", file=sys.stderr)
    return report.exit_code


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "variance": cmd_variance,
            "table": cmd_table, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, SphereGrainsError) as exc:
        print(f"spheregrains: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
