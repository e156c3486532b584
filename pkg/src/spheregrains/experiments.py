"""Replication campaigns: the distance tables and the cross-module validation suites."""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .arcs import estimate_limit_linear_combined, estimate_limit_spherical, visible_arcs
from .distances import cvm_distance, ks_distance
from .emptyspace import (
    WeightFunction,
    beta_constant,
    empty_space_F,
    second_order_bounds,
    second_order_F2bar_radial,
)
from .errors import SphereGrainsError
from .estimators import (
    DEFAULT_H,
    EstimatorConfig,
    GridContacts,
    Method,
    RadiusSet,
    WeightedRadiusMeasure,
    eta_measure,
    estimate_edge_corrected,
)
from .geometry import AXIS_SEGMENTS, GaugeBody, h_B, ray_ball_entry
from .model import ModelParams, RadiusDistribution, Window, contact_field, lattice_points, sample_realization

log = logging.getLogger(__name__)

# Share of replications allowed to abort before a campaign is declared failed.
MAX_ABORT_SHARE = 0.01

GAUGE_SETS = {"spherical": (GaugeBody.ball(2),), "linear": AXIS_SEGMENTS}


@dataclass(frozen=True)
class EstimatorSpec:
    """One table row: an estimator kind and, except for the limit row, a band width."""

    kind: str
    eps: float | None = None

    KINDS = ("weighted", "limit", "minus", "uncorrected", "hanisch")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown estimator {self.kind!r}")
        if (self.kind == "limit") != (self.eps is None):
            raise ValueError("the limit estimator takes no epsilon; all others need one")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("epsilon must be positive")

    @property
    def label(self) -> str:
        return self.kind if self.eps is None else f"{self.kind}:{self.eps:g}"

    @classmethod
    def parse(cls, text: str) -> "EstimatorSpec":
        kind, _, eps = text.partition(":")
        return cls(kind, float(eps) if eps else None)

    @property
    def method(self) -> Method:
        return {"weighted": Method.WEIGHTED, "minus": Method.WEIGHTED_MINUS,
                "uncorrected": Method.UNCORRECTED, "hanisch": Method.HANISCH}[self.kind]


TABLE_ESTIMATORS = tuple(
    EstimatorSpec.parse(s)
    for s in ("weighted:1", "weighted:0.05", "weighted:0.01", "limit", "minus:0.05", "minus:0.01",
              "uncorrected:1", "uncorrected:0.05", "uncorrected:0.01",
              "hanisch:1", "hanisch:0.05", "hanisch:0.01")
)

# Published sample means: (KS spherical, KS linear, 1000 CvM spherical, 1000 CvM linear).
PUBLISHED_TABLE_25 = {
    "weighted:1": (0.178, 0.147, 7.921, 5.139),
    "weighted:0.05": (0.172, 0.170, 7.317, 7.101),
    "weighted:0.01": (0.172, 0.172, 7.295, 7.292),
    "limit": (0.171, 0.172, 7.243, 7.257),
    "minus:0.05": (0.191, 0.177, 9.243, 7.753),
    "minus:0.01": (0.176, 0.173, 7.674, 7.435),
    "uncorrected:1": (0.182, 0.179, 8.389, 7.890),
    "uncorrected:0.05": (0.173, 0.169, 7.480, 7.553),
    "uncorrected:0.01": (0.173, 0.168, 7.322, 7.472),
    "hanisch:1": (0.187, 0.179, 9.003, 7.890),
    "hanisch:0.05": (0.179, 0.169, 8.023, 7.553),
    "hanisch:0.01": (0.174, 0.168, 7.462, 7.472),
}
PUBLISHED_TABLE_100 = {
    "weighted:1": (0.147, 0.134, 5.506, 4.406),
    "weighted:0.05": (0.145, 0.131, 5.294, 4.238),
    "weighted:0.01": (0.132, 0.128, 4.276, 4.008),
    "limit": (0.127, 0.127, 3.919, 3.928),
    "minus:0.05": (0.158, 0.135, 6.162, 4.460),
    "minus:0.01": (0.134, 0.129, 4.359, 4.029),
    "uncorrected:1": (0.150, 0.140, 5.710, 4.838),
    "uncorrected:0.05": (0.147, 0.137, 5.431, 4.807),
    "uncorrected:0.01": (0.133, 0.129, 4.299, 4.208),
    "hanisch:1": (0.150, 0.140, 5.602, 4.838),
    "hanisch:0.05": (0.148, 0.137, 5.438, 4.807),
    "hanisch:0.01": (0.133, 0.129, 4.323, 4.208),
}
PUBLISHED_TABLES = {25.0: PUBLISHED_TABLE_25, 100.0: PUBLISHED_TABLE_100}


def published_value(table: dict, label: str, gauge: str, metric: str) -> float:
    col = {("ks", "spherical"): 0, ("ks", "linear"): 1, ("cvm", "spherical"): 2, ("cvm", "linear"): 3}
    return table[label][col[(metric, gauge)]]


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    window: Window = field(default_factory=Window.unit)
    gauges: tuple[str, ...] = ("spherical", "linear")
    estimators: tuple[EstimatorSpec, ...] = TABLE_ESTIMATORS
    h: float = DEFAULT_H
    replications: int = 100
    base_seed: int = 1000
    knots: tuple[float, ...] = ()
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        for g in self.gauges:
            if g not in GAUGE_SETS:
                raise ValueError(f"unknown gauge set {g!r}")
        if self.params.dim != 2:
            raise ValueError("table experiments are planar")
        if self.window.dim != self.params.dim:
            raise ValueError("window and model dimensions differ")

    @property
    def reach(self) -> float:
        eps = [e.eps for e in self.estimators if e.eps is not None]
        return max(eps, default=0.0)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "window": self.window.spec(),
            "gauges": list(self.gauges),
            "estimators": [e.label for e in self.estimators],
            "h": self.h,
            "replications": self.replications,
            "base_seed": self.base_seed,
            "knots": list(self.knots),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            params=ModelParams.from_dict(d["params"]),
            window=Window.parse(d.get("window", "0:0:1:1")),
            gauges=tuple(d.get("gauges", ("spherical", "linear"))),
            estimators=tuple(EstimatorSpec.parse(s) for s in d["estimators"]) if "estimators" in d
            else TABLE_ESTIMATORS,
            h=float(d.get("h", DEFAULT_H)),
            replications=int(d.get("replications", 100)),
            base_seed=int(d.get("base_seed", 1000)),
            knots=tuple(float(k) for k in d.get("knots", ())),
        )

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def estimate_on_realization(Z, W: Window, spec: EstimatorSpec, gauge: str, h: float,
                            grid: GridContacts | None = None, arcs=None) -> WeightedRadiusMeasure:
    """Normalized estimate for one table row; linear rows average the four axes."""
    if spec.kind == "limit":
        if gauge == "spherical":
            return estimate_limit_spherical(Z, W, arcs).normalized()
        return estimate_limit_linear_combined(Z, W, arcs)
    f = WeightFunction.band(spec.eps)
    parts = [estimate_edge_corrected(Z, W, EstimatorConfig(spec.method, B, f, h), grid).normalized()
             for B in GAUGE_SETS[gauge]]
    return parts[0] if len(parts) == 1 else WeightedRadiusMeasure.mixture(parts)


def _replication(cfg: ExperimentConfig, rep: int):
    G = cfg.params.radius_dist
    W = cfg.window
    Z = sample_realization(cfg.params, W, cfg.base_seed + rep, reach=max(cfg.reach, 0.0))
    grid = GridContacts(Z, W, cfg.h, cap=cfg.reach if cfg.reach > 0 else math.inf)
    arcs = visible_arcs(Z, W) if any(e.kind == "limit" for e in cfg.estimators) else None
    out = {}
    for spec in cfg.estimators:
        for gauge in cfg.gauges:
            est = estimate_on_realization(Z, W, spec, gauge, cfg.h, grid, arcs)
            out[(spec.label, gauge)] = (ks_distance(est, G), 1000.0 * cvm_distance(est, G))
    return out


def _safe_replication(args):
    cfg, rep = args
    try:
        return rep, _replication(cfg, rep), None
    except SphereGrainsError as exc:
        return rep, None, f"{type(exc).__name__}: {exc}"


@dataclass(frozen=True)
class TableRow:
    estimator: str
    gauge: str
    n: int
    mean_ks: float
    se_ks: float
    mean_cvm1000: float
    se_cvm1000: float


@dataclass(frozen=True)
class TableResult:
    config: ExperimentConfig
    rows: tuple[TableRow, ...]
    aborted: tuple[tuple[int, str], ...]

    CSV_COLUMNS = ("estimator", "gauge", "n", "mean_ks", "se_ks", "mean_cvm1000", "se_cvm1000")

    def row(self, estimator: str, gauge: str) -> TableRow:
        for r in self.rows:
            if r.estimator == estimator and r.gauge == gauge:
                return r
        raise KeyError((estimator, gauge))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.CSV_COLUMNS) + "\n")
        for r in self.rows:
            buf.write(f"{r.estimator},{r.gauge},{r.n},{r.mean_ks!r},{r.se_ks!r},"
                      f"{r.mean_cvm1000!r},{r.se_cvm1000!r}\n")
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "kind": "table",
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash(),
            "seed": self.config.base_seed,
            "version": __version__,
            "aborted": [{"replication": r, "error": e} for r, e in self.aborted],
        }


class CampaignFailed(SphereGrainsError):
    pass


def run_table_experiment(cfg: ExperimentConfig) -> TableResult:
    """Simulate, estimate every configured row and average the two distances.

    Replication ``r`` uses seed ``base_seed + r``.  Results are aggregated in
    replication order, so parallel and sequential runs give identical output.
    """
    jobs = [(cfg, r) for r in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_safe_replication, jobs))
    else:
        results = [_safe_replication(j) for j in jobs]
    results.sort(key=lambda t: t[0])
    aborted = tuple((rep, err) for rep, _, err in results if err is not None)
    for rep, err in aborted:
        log.warning("replication %d aborted: %s", rep, err)
    if len(aborted) > MAX_ABORT_SHARE * cfg.replications:
        raise CampaignFailed(f"{len(aborted)} of {cfg.replications} replications aborted")
    good = [res for _, res, err in results if err is None]
    rows = []
    for spec in cfg.estimators:
        for gauge in cfg.gauges:
            v = np.array([res[(spec.label, gauge)] for res in good])
            k = len(v)
            mean = v.mean(axis=0)
            se = v.std(axis=0, ddof=1) / math.sqrt(k) if k > 1 else np.full(2, math.nan)
            rows.append(TableRow(spec.label, gauge, k, float(mean[0]), float(se[0]),
                                 float(mean[1]), float(se[1])))
    return TableResult(cfg, tuple(rows), aborted)


def compare_to_published(result: TableResult, table: dict, rel: float = 0.2, k_se: float = 3.0):
    """Per cell: (label, gauge, metric, artifact mean, se, published value, passed)."""
    out = []
    for r in result.rows:
        if r.estimator not in table:
            continue
        for metric, mean, se in (("ks", r.mean_ks, r.se_ks), ("cvm", r.mean_cvm1000, r.se_cvm1000)):
            ref = published_value(table, r.estimator, r.gauge, metric)
            ok = abs(mean - ref) <= rel * ref and abs(mean - ref) <= k_se * se
            out.append((r.estimator, r.gauge, metric, mean, se, ref, ok))
    return out


# ---------------------------------------------------------------- validation

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass(frozen=True)
class SuiteResult:
    name: str
    status: str
    details: dict


@dataclass(frozen=True)
class ValidationConfig:
    params: ModelParams = field(
        default_factory=lambda: ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1)))
    eps: float = 0.05
    seed: int = 20_000
    h: float = 1.0 / 100.0
    unbiasedness_reps: int = 500
    empty_space_reps: int = 200
    refb_samples: int = 400_000
    second_order_reps: int = 10_000
    identity_reps: int = 10
    variance_reps: int = 500
    variance_n: float = 4.0
    clt_reps: int = 200
    clt_n: float = 3.0
    suites: tuple[str, ...] = ("unbiasedness", "empty_space", "refb", "second_order", "identities",
                               "variance", "clt")

    def with_reps(self, reps: int) -> "ValidationConfig":
        """Same config with every replication count set to ``reps``."""
        names = ("unbiasedness_reps", "empty_space_reps", "refb_samples", "second_order_reps",
                 "identity_reps", "variance_reps", "clt_reps")
        return replace(self, **{n: reps for n in names})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        d["suites"] = list(self.suites)
        return d


@dataclass(frozen=True)
class ValidationReport:
    config: ValidationConfig
    suites: tuple[SuiteResult, ...]

    @property
    def passed(self) -> bool:
        return all(s.status == PASS for s in self.suites)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 2

    def to_json(self) -> str:
        return json.dumps({
            "config": self.config.to_dict(),
            "version": __version__,
            "passed": self.passed,
            "suites": [{"name": s.name, "status": s.status, "details": s.details} for s in self.suites],
        }, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


UNBIASEDNESS_SETS = (
    RadiusSet.upto(0.06), RadiusSet.upto(0.075), RadiusSet.between(0.06, 0.09),
    RadiusSet.between(0.09, math.inf), RadiusSet.everything(),
)


def unbiasedness_suite(cfg: ValidationConfig, gauges=(GaugeBody.ball(2), GaugeBody.segment((1.0, 0.0))),
                       sets=UNBIASEDNESS_SETS) -> SuiteResult:
    """Mean of ``eta_W(C) / (gamma beta |W|)`` against ``G(C)``."""
    reps = cfg.unbiasedness_reps
    if reps < 2:
        return SuiteResult("unbiasedness", SKIPPED, {"reason": "fewer than two replications"})
    W = Window.unit(2)
    f = WeightFunction.band(cfg.eps)
    G = cfg.params.radius_dist
    rows, ok = [], True
    for gi, B in enumerate(gauges):
        scale = cfg.params.intensity * beta_constant(f, cfg.params, B) * W.volume
        vals = np.empty((reps, len(sets)))
        ecfg = EstimatorConfig(Method.WEIGHTED, B, f, cfg.h)
        for r in range(reps):
            Z = sample_realization(cfg.params, W, cfg.seed + gi * reps + r, reach=cfg.eps)
            eta = eta_measure(Z, W, ecfg)
            vals[r] = [eta.mass(C) for C in sets]
        ratio = vals / scale
        mean = ratio.mean(axis=0)
        se = ratio.std(axis=0, ddof=1) / math.sqrt(reps)
        for C, m, s in zip(sets, mean, se):
            target = C.probability(G)
            good = bool(abs(m - target) <= 3.0 * s)
            ok &= good
            rows.append({"gauge": B.label(), "set": C.label(), "mean": float(m), "se": float(s),
                         "target": target, "pass": good})
    return SuiteResult("unbiasedness", PASS if ok else FAIL, {"replications": reps, "rows": rows})


EMPTY_SPACE_TIMES = tuple(np.linspace(0.0, 0.18, 10))


def empty_space_suite(cfg: ValidationConfig, times=EMPTY_SPACE_TIMES) -> SuiteResult:
    """Share of lattice points within gauge distance ``t`` against ``F_B(t)``."""
    reps = cfg.empty_space_reps
    if reps < 2:
        return SuiteResult("empty_space", SKIPPED, {"reason": "fewer than two replications"})
    W = Window.unit(2)
    pts = lattice_points(W, 1.0 / 50.0)
    tmax = float(max(times))
    rows, ok = [], True
    for gi, B in enumerate((GaugeBody.ball(2), GaugeBody.segment((1.0, 0.0)))):
        emp = np.empty((reps, len(times)))
        for r in range(reps):
            Z = sample_realization(cfg.params, W, cfg.seed + 50_000 + gi * reps + r, reach=tmax)
            d = contact_field(pts, Z, B, cap=tmax).distance
            emp[r] = [(d <= t).mean() for t in times]
        mean = emp.mean(axis=0)
        se = emp.std(axis=0, ddof=1) / math.sqrt(reps)
        for t, m, s in zip(times, mean, se):
            target = float(empty_space_F(t, cfg.params, B))
            good = bool(abs(m - target) <= 3.0 * s)
            ok &= good
            rows.append({"gauge": B.label(), "t": float(t), "empirical": float(m), "se": float(s),
                         "analytic": target, "pass": good})
    return SuiteResult("empty_space", PASS if ok else FAIL, {"replications": reps, "rows": rows})


REFB_CASES = tuple((B, r, eps) for B in (GaugeBody.ball(2), GaugeBody.segment((1.0, 0.0)))
                   for r, eps in ((0.05, 0.05), (0.1, 0.02), (0.07, 0.2)))


def refb_integral(B: GaugeBody, r: float, eps: float) -> float:
    """``∫ h_B(t, r) f(t) dt`` for the band weight.

    ``h_B`` is a polynomial in ``t`` of degree below 8, so the 8-point
    Gauss-Legendre rule is exact.
    """
    x, w = np.polynomial.legendre.leggauss(8)
    t = 0.5 * eps * (x + 1.0)
    return float(np.sum(0.5 * eps * w * h_B(t, r, B)) / eps)


def refb_monte_carlo(B: GaugeBody, r: float, eps: float, n: int, rng: np.random.Generator):
    """``∫ f(d_B(z, r B^2)) dz`` by uniform sampling over a box covering the support."""
    half = r + eps
    z = rng.uniform(-half, half, size=(n, 2))
    if B.is_ball:
        d = np.maximum(np.linalg.norm(z, axis=1) - r, 0.0)
    else:
        d = ray_ball_entry(z, B.u, r)
    vals = WeightFunction.band(eps)(d) * (2 * half) ** 2
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


def refb_suite(cfg: ValidationConfig, cases=REFB_CASES) -> SuiteResult:
    n = cfg.refb_samples
    if n < 2:
        return SuiteResult("refb", SKIPPED, {"reason": "no samples"})
    rng = np.random.default_rng(cfg.seed + 70_000)
    rows, ok = [], True
    for B, r, eps in cases:
        mc, se = refb_monte_carlo(B, r, eps, n, rng)
        exact = refb_integral(B, r, eps)
        good = bool(abs(mc - exact) <= 3.0 * se)
        ok &= good
        rows.append({"gauge": B.label(), "r": r, "eps": eps, "monte_carlo": mc, "se": se,
                     "analytic": exact, "pass": good})
    return SuiteResult("refb", PASS if ok else FAIL, {"samples": n, "rows": rows})


def second_order_triples(rng: np.random.Generator, k: int, umax: float = 0.4, tmax: float = 0.1):
    return rng.uniform(0, umax, k), rng.uniform(0, tmax, k), rng.uniform(0, tmax, k)


def empirical_joint_avoidance(params: ModelParams, dist, t1, t2, reps: int, seed: int) -> np.ndarray:
    """Fraction of realizations with ``d(o, Z) > t1`` and ``d(u, Z) > t2``, ``u = (dist, 0)``."""
    dist, t1, t2 = (np.asarray(a, dtype=float) for a in (dist, t1, t2))
    G = params.radius_dist
    pad = G.r_sup + max(t1.max(), t2.max())
    lo = np.array([-pad, -pad])
    hi = np.array([dist.max() + pad, pad])
    area = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    hits = np.zeros(len(dist))
    for _ in range(reps):
        n = rng.poisson(params.intensity * area)
        c = lo + rng.random((n, 2)) * (hi - lo)
        rad = G.sample(rng, n)
        d0 = np.min(np.hypot(c[:, 0], c[:, 1]) - rad, initial=np.inf)
        du = np.min(np.hypot(c[None, :, 0] - dist[:, None], c[None, :, 1]) - rad[None, :], axis=1,
                    initial=np.inf)
        hits += (d0 > t1) & (du > t2)
    return hits / reps


def second_order_suite(cfg: ValidationConfig, analytic_triples: int = 10_000,
                       empirical_triples: int = 20) -> SuiteResult:
    rng = np.random.default_rng(cfg.seed + 80_000)
    u, t1, t2 = second_order_triples(rng, analytic_triples)
    val = second_order_F2bar_radial(u, t1, t2, cfg.params)
    lo, hi = second_order_bounds(t1, t2, cfg.params)
    analytic_ok = bool(np.all(lo <= val) and np.all(val <= hi))
    details = {"analytic_triples": analytic_triples, "analytic_violations":
               int(np.sum((val < lo) | (val > hi)))}
    reps = cfg.second_order_reps
    if reps < 2:
        details["empirical"] = "skipped"
        return SuiteResult("second_order", SKIPPED if analytic_ok else FAIL, details)
    u, t1, t2 = second_order_triples(rng, empirical_triples)
    emp = empirical_joint_avoidance(cfg.params, u, t1, t2, reps, cfg.seed + 81_000)
    ana = second_order_F2bar_radial(u, t1, t2, cfg.params)
    se = np.sqrt(np.maximum(ana * (1 - ana), 1e-300) / reps)
    good = np.abs(emp - ana) <= 3.0 * se
    details["empirical"] = [{"u": float(a), "t1": float(b), "t2": float(c), "empirical": float(e),
                             "analytic": float(v), "se": float(s), "pass": bool(g)}
                            for a, b, c, e, v, s, g in zip(u, t1, t2, emp, ana, se, good)]
    details["replications"] = reps
    return SuiteResult("second_order", PASS if analytic_ok and bool(good.all()) else FAIL, details)


def identities_suite(cfg: ValidationConfig) -> SuiteResult:
    """Hanisch equals uncorrected for segments; normalized totals are 1; 0/0 is null."""
    reps = cfg.identity_reps
    if reps < 1:
        return SuiteResult("identities", SKIPPED, {"reason": "no replications"})
    W = Window.unit(2)
    fails = []
    for r in range(reps):
        Z = sample_realization(cfg.params, W, cfg.seed + 90_000 + r, reach=1.0)
        grid = GridContacts(Z, W, cfg.h, cap=1.0)
        for eps in (1.0, cfg.eps):
            f = WeightFunction.band(eps)
            for B in AXIS_SEGMENTS:
                a = estimate_edge_corrected(Z, W, EstimatorConfig(Method.HANISCH, B, f, cfg.h), grid)
                b = estimate_edge_corrected(Z, W, EstimatorConfig(Method.UNCORRECTED, B, f, cfg.h), grid)
                if not (np.array_equal(a.radii, b.radii) and np.array_equal(a.weights, b.weights)):
                    fails.append({"replication": r, "eps": eps, "gauge": B.label(), "check": "hanisch"})
            est = eta_measure(Z, W, EstimatorConfig(Method.WEIGHTED, GaugeBody.ball(2), f, cfg.h), grid)
            if est.total > 0 and abs(est.normalized().mass(RadiusSet.everything()) - 1.0) > 1e-12:
                fails.append({"replication": r, "eps": eps, "check": "total"})
    null = WeightedRadiusMeasure.null()
    if null.normalized().total != 0.0:
        fails.append({"check": "null"})
    return SuiteResult("identities", PASS if not fails else FAIL, {"replications": reps, "failures": fails})


def variance_suite(cfg: ValidationConfig) -> SuiteResult:
    from .variance import empirical_variance_curve, sigma2

    reps = cfg.variance_reps
    if reps < 2:
        return SuiteResult("variance", SKIPPED, {"reason": "fewer than two replications"})
    f = WeightFunction.band(cfg.eps)
    C = RadiusSet.everything()
    theory = sigma2(C, cfg.params, f)
    (pt,) = empirical_variance_curve(C, cfg.params, f, [cfg.variance_n], reps, cfg.seed + 100_000, h=cfg.h)
    rel = abs(pt.variance - theory.sigma2) / theory.sigma2
    return SuiteResult("variance", PASS if rel <= 0.2 else FAIL, {
        "replications": reps, "n": cfg.variance_n, "sigma2": theory.sigma2, "sigma2_se": theory.stderr,
        "empirical": pt.variance, "empirical_se": pt.stderr, "relative_gap": rel,
    })


def clt_suite(cfg: ValidationConfig, C: RadiusSet = RadiusSet.upto(0.075)) -> SuiteResult:
    from .variance import clt_campaign, sigma_G2_report

    reps = cfg.clt_reps
    if reps < 2:
        return SuiteResult("clt", SKIPPED, {"reason": "fewer than two replications"})
    f = WeightFunction.band(cfg.eps)
    sg = sigma_G2_report(C, cfg.params, f)
    rep = clt_campaign(C, cfg.params, f, cfg.clt_n, reps, cfg.seed + 200_000, h=cfg.h, sigma=sg)
    ratio = rep.variance_ratio
    ok = rep.p_value >= 0.01 and abs(ratio - 1.0) <= 0.25 and sg.agree()
    return SuiteResult("clt", PASS if ok else FAIL, {
        "replications": reps, "n": cfg.clt_n, "set": C.label(), "sigma_G2": sg.combination,
        "sigma_G2_se": sg.combination_stderr, "sigma_G2_direct": sg.direct,
        "sigma_G2_direct_se": sg.direct_stderr, "ks_statistic": rep.ks_statistic,
        "p_value": rep.p_value, "variance_ratio": ratio,
    })


SUITES = {
    "unbiasedness": unbiasedness_suite,
    "empty_space": empty_space_suite,
    "refb": refb_suite,
    "second_order": second_order_suite,
    "identities": identities_suite,
    "variance": variance_suite,
    "clt": clt_suite,
}


def run_validation_suite(cfg: ValidationConfig | None = None) -> ValidationReport:
    """Run the configured cross-module suites; failures are report entries, not exceptions."""
    cfg = cfg or ValidationConfig()
    out = []
    for name in cfg.suites:
        try:
            res = SUITES[name](cfg)
        except SphereGrainsError as exc:
            res = SuiteResult(name, FAIL, {"error": f"{type(exc).__name__}: {exc}"})
        log.info("suite %s: %s", name, res.status)
        out.append(res)
    return ValidationReport(cfg, tuple(out))
