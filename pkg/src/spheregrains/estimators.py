"""Weighted radius measures and the grid-based ratio estimators."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .emptyspace import WeightFunction
from .errors import EmptyWindowError
from .geometry import GaugeBody, h_B
from .model import ContactField, Realization, Window, contact_field, lattice_points

DEFAULT_H = 1.0 / 300.0


@dataclass(frozen=True)
class RadiusSet:
    """Finite union of half-open intervals ``(lo, hi]``.

    ``lo = -inf`` includes radius 0, ``hi = inf`` everything above ``lo``.
    """

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for lo, hi in self.intervals:
            if not lo <= hi:
                raise ValueError(f"bad interval ({lo}, {hi}]")

    @classmethod
    def everything(cls) -> "RadiusSet":
        return cls(((-math.inf, math.inf),))

    @classmethod
    def empty(cls) -> "RadiusSet":
        return cls(())

    @classmethod
    def upto(cls, b: float) -> "RadiusSet":
        """``[0, b]``."""
        return cls(((-math.inf, float(b)),))

    @classmethod
    def between(cls, a: float, b: float) -> "RadiusSet":
        """``(a, b]``."""
        return cls(((float(a), float(b)),))

    @classmethod
    def parse(cls, text: str) -> "RadiusSet":
        """``all``, ``upto:b`` for ``[0, b]`` or ``between:a:b`` for ``(a, b]``."""
        kind, *args = text.split(":")
        if kind == "all" and not args:
            return cls.everything()
        if kind == "upto" and len(args) == 1:
            return cls.upto(float(args[0]))
        if kind == "between" and len(args) == 2:
            return cls.between(float(args[0]), float(args[1]))
        raise ValueError(f"cannot parse radius set {text!r}")

    def complement(self) -> "RadiusSet":
        cuts = sorted(self.intervals)
        out, cur = [], -math.inf
        for lo, hi in cuts:
            if lo > cur:
                out.append((cur, lo))
            cur = max(cur, hi)
        if cur < math.inf:
            out.append((cur, math.inf))
        return RadiusSet(tuple(out))

    def contains(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        inside = np.zeros(r.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (r > lo) & (r <= hi)
        return inside

    def probability(self, dist) -> float:
        """Mass of the set under a :class:`~spheregrains.model.RadiusDistribution`."""
        return float(sum(dist.mass(lo, hi) for lo, hi in self.intervals))

    def label(self) -> str:
        if not self.intervals:
            return "empty"
        return "u".join(f"({lo:g},{hi:g}]" for lo, hi in self.intervals)


@dataclass(frozen=True)
class WeightedRadiusMeasure:
    """Discrete measure ``sum_i w_i delta_{r_i}`` on the radius axis."""

    radii: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.radii.shape != self.weights.shape:
            raise ValueError("radii and weights differ in shape")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    @classmethod
    def null(cls) -> "WeightedRadiusMeasure":
        return cls(np.empty(0), np.empty(0))

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return len(self.radii)

    def normalized(self) -> "WeightedRadiusMeasure":
        """Probability version; the null measure when the total is 0 (0/0 := 0)."""
        tot = self.total
        if tot <= 0:
            return WeightedRadiusMeasure.null()
        return WeightedRadiusMeasure(self.radii, self.weights / tot)

    def mass(self, C: RadiusSet) -> float:
        return float(np.sum(self.weights[C.contains(self.radii)]))

    def cdf(self, s):
        """Right-continuous distribution function of the measure itself."""
        order = np.argsort(self.radii, kind="stable")
        r = self.radii[order]
        cw = np.concatenate([[0.0], np.cumsum(self.weights[order])])
        out = cw[np.searchsorted(r, np.asarray(s, dtype=float), side="right")]
        return out if np.ndim(out) else float(out)

    def cdf_left(self, s):
        order = np.argsort(self.radii, kind="stable")
        r = self.radii[order]
        cw = np.concatenate([[0.0], np.cumsum(self.weights[order])])
        out = cw[np.searchsorted(r, np.asarray(s, dtype=float), side="left")]
        return out if np.ndim(out) else float(out)

    def merged(self) -> "WeightedRadiusMeasure":
        """Atoms with equal radius combined, sorted by radius."""
        if len(self) == 0:
            return self
        r, inv = np.unique(self.radii, return_inverse=True)
        return WeightedRadiusMeasure(r, np.bincount(inv, weights=self.weights, minlength=len(r)))

    @staticmethod
    def mixture(measures, coefs=None) -> "WeightedRadiusMeasure":
        coefs = coefs if coefs is not None else [1.0 / len(measures)] * len(measures)
        radii = np.concatenate([m.radii for m in measures])
        weights = np.concatenate([c * m.weights for c, m in zip(coefs, measures)])
        return WeightedRadiusMeasure(radii, weights)

    def to_csv(self, knots=None) -> str:
        m = self.merged()
        lines = ["radius,weight"]
        lines += [f"{r!r},{w!r}" for r, w in zip(m.radii.tolist(), m.weights.tolist())]
        if knots is not None:
            norm = self.normalized()
            lines.append("")
            lines.append("knot,cdf")
            lines += [f"{k!r},{float(norm.cdf(k))!r}" for k in np.asarray(knots, dtype=float).tolist()]
        return "\n".join(lines) + "\n"


def estimate_ratio(measure: WeightedRadiusMeasure, C: RadiusSet) -> float:
    """``measure(C) / measure(R+)`` with ``0/0 := 0``."""
    tot = measure.total
    return measure.mass(C) / tot if tot > 0 else 0.0


class Method(str, Enum):
    WEIGHTED = "weighted"
    WEIGHTED_MINUS = "minus"
    UNCORRECTED = "uncorrected"
    HANISCH = "hanisch"
    LIMIT_SPHERICAL = "limit-spherical"
    LIMIT_LINEAR = "limit-linear"


@dataclass(frozen=True)
class EstimatorConfig:
    method: Method
    gauge: GaugeBody
    f: WeightFunction | None = None
    h: float = DEFAULT_H
    bin_edges: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.bin_edges is not None and np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if self.method in (Method.WEIGHTED, Method.WEIGHTED_MINUS, Method.UNCORRECTED, Method.HANISCH):
            if self.f is None:
                raise ValueError(f"{self.method.value} estimator needs a weight function")


@dataclass
class GridContacts:
    """Lattice of a window plus memoized contact fields per gauge.

    Several estimators on the same realization share one contact pass.
    """

    Z: Realization
    window: Window
    h: float = DEFAULT_H
    cap: float = math.inf
    _full: dict = field(default_factory=dict, repr=False)
    _clipped: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.points = lattice_points(self.window, self.h)
        self.cell_area = self.h ** self.window.dim

    def full(self, B: GaugeBody) -> ContactField:
        if B not in self._full:
            self._full[B] = contact_field(self.points, self.Z, B, cap=self.cap)
        return self._full[B]

    def clipped(self, B: GaugeBody) -> ContactField:
        if B not in self._clipped:
            self._clipped[B] = contact_field(self.points, self.Z, B, clip=self.window)
        return self._clipped[B]


def point_weights(cf: ContactField, f: WeightFunction, B: GaugeBody, cell_area: float) -> np.ndarray:
    """Per-point contributions ``cell_area * f(d) / h_B(d, r)``; zero inside Z
    and for unhit points."""
    d = cf.distance
    fv = f(d)
    live = (fv > 0) & (cf.grain >= 0)
    w = np.zeros(len(d))
    if np.any(live):
        # radius-0 grains under a segment gauge get an infinite weight; their
        # atoms are dropped in measure_from_points
        with np.errstate(divide="ignore"):
            w[live] = cell_area * fv[live] / h_B(d[live], cf.radius[live], B)
    return w


def measure_from_points(Z: Realization, cf: ContactField, weights: np.ndarray, B: GaugeBody,
                        mask=None) -> WeightedRadiusMeasure:
    """Aggregate point weights onto the atoms of their contacted grains."""
    if mask is not None:
        weights = np.where(mask, weights, 0.0)
    live = weights > 0
    if not np.any(live):
        return WeightedRadiusMeasure.null()
    per_grain = np.bincount(cf.grain[live], weights=weights[live], minlength=len(Z))
    ids = np.flatnonzero(per_grain > 0)
    radii = Z.radii[ids]
    w = per_grain[ids]
    if not B.is_ball and np.any(radii == 0):
        warnings.warn("dropping radius-0 atoms for a segment gauge", RuntimeWarning, stacklevel=2)
        keep = radii > 0
        radii, w = radii[keep], w[keep]
    return WeightedRadiusMeasure(radii.copy(), w)


def _grid(Z, W, cfg, grid):
    if grid is None:
        cap = cfg.f.upper if cfg.f is not None else math.inf
        grid = GridContacts(Z, W, cfg.h, cap=cap)
    elif grid.window != W or grid.h != cfg.h:
        raise ValueError("grid contacts were built for another window or spacing")
    return grid


def eta_measure(Z: Realization, W: Window, cfg: EstimatorConfig, grid: GridContacts | None = None,
                region: Window | None = None) -> WeightedRadiusMeasure:
    """Riemann-sum version of the random measure over the lattice of ``W``.

    ``region`` restricts the sum to lattice points inside a sub-window.
    """
    if cfg.method not in (Method.WEIGHTED, Method.WEIGHTED_MINUS):
        raise ValueError("eta_measure expects the weighted method")
    grid = _grid(Z, W, cfg, grid)
    cf = grid.full(cfg.gauge)
    w = point_weights(cf, cfg.f, cfg.gauge, grid.cell_area)
    mask = None if region is None else region.contains(grid.points)
    return measure_from_points(Z, cf, w, cfg.gauge, mask)


def distance_to_boundary(points: np.ndarray, W: Window, B: GaugeBody) -> np.ndarray:
    """``d_B(x, ∂W)`` for points inside the box ``W``."""
    if B.is_ball:
        return np.minimum(np.min(points - W.lo, axis=1), np.min(W.hi - points, axis=1))
    u = B.u
    t = np.full(len(points), np.inf)
    for k in range(W.dim):
        if u[k] > 0:
            t = np.minimum(t, (W.hi[k] - points[:, k]) / u[k])
        elif u[k] < 0:
            t = np.minimum(t, (W.lo[k] - points[:, k]) / u[k])
    return t


def estimate_edge_corrected(Z: Realization, W: Window, cfg: EstimatorConfig,
                            grid: GridContacts | None = None) -> WeightedRadiusMeasure:
    """Minus-sampling, uncorrected and Hanisch-type weighted measures."""
    grid = _grid(Z, W, cfg, grid)
    B = cfg.gauge
    if cfg.method is Method.WEIGHTED_MINUS:
        eroded = W.erode(B, cfg.f.upper)
        if eroded is None:
            raise EmptyWindowError(f"window eroded by {cfg.f.upper} is empty")
        return eta_measure(Z, W, cfg, grid, region=eroded)
    if cfg.method is Method.UNCORRECTED:
        cf = grid.clipped(B)
        w = point_weights(cf, cfg.f, B, grid.cell_area)
        return measure_from_points(Z, cf, w, B)
    if cfg.method is Method.HANISCH:
        cf = grid.full(B)
        w = point_weights(cf, cfg.f, B, grid.cell_area)
        keep = cf.distance <= distance_to_boundary(grid.points, W, B)
        return measure_from_points(Z, cf, w, B, keep)
    if cfg.method is Method.WEIGHTED:
        return eta_measure(Z, W, cfg, grid)
    raise ValueError(f"{cfg.method.value} is not a grid estimator")
