"""Visible boundary arcs of planar disk unions and the limiting estimators.

Angular sets on a circle are kept as sorted, disjoint ``(a, b)`` pairs with
``0 <= a < b <= 2 pi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimensionError
from .estimators import WeightedRadiusMeasure
from .geometry import AXIS_SEGMENTS, GaugeBody
from .model import Realization, Window

TWO_PI = 2.0 * math.pi
FULL = ((0.0, TWO_PI),)


def arc_set(center: float, half: float) -> list[tuple[float, float]]:
    """Closed arc ``[center - half, center + half]`` as intervals in [0, 2 pi)."""
    if half >= math.pi:
        return list(FULL)
    if half <= 0:
        return []
    a = (center - half) % TWO_PI
    b = a + 2.0 * half
    if b <= TWO_PI:
        return [(a, b)]
    return [(0.0, b - TWO_PI), (a, TWO_PI)]


def union(intervals) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def complement(intervals) -> list[tuple[float, float]]:
    out, cur = [], 0.0
    for a, b in union(intervals):
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < TWO_PI:
        out.append((cur, TWO_PI))
    return out


def intersect(xs, ys) -> list[tuple[float, float]]:
    out = []
    i = j = 0
    xs, ys = union(xs), union(ys)
    while i < len(xs) and j < len(ys):
        a = max(xs[i][0], ys[j][0])
        b = min(xs[i][1], ys[j][1])
        if a < b:
            out.append((a, b))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


def measure(intervals) -> float:
    return float(sum(b - a for a, b in intervals))


def _cos_at_least(center: float, k: float):
    # {theta : cos(theta - center) >= k}
    if k <= -1.0:
        return list(FULL)
    if k > 1.0:
        return []
    return arc_set(center, math.acos(k))


def inside_box(center, radius: float, W: Window) -> list[tuple[float, float]]:
    """Angles whose circle point lies in the closed box."""
    cx, cy = center
    (x0, y0), (x1, y1) = W.lower, W.upper
    if radius == 0:
        return list(FULL) if (x0 <= cx <= x1 and y0 <= cy <= y1) else []
    s = list(FULL)
    for c, k in ((0.0, (x0 - cx) / radius), (math.pi, (cx - x1) / radius),
                 (0.5 * math.pi, (y0 - cy) / radius), (1.5 * math.pi, (cy - y1) / radius)):
        s = intersect(s, _cos_at_least(c, k))
        if not s:
            break
    return s


@dataclass(frozen=True)
class GrainArcs:
    grain: int
    radius: float
    center: tuple[float, float]
    visible: tuple[tuple[float, float], ...]

    @property
    def lengths(self) -> list[float]:
        return [self.radius * (b - a) for a, b in self.visible]

    def restricted(self, W: Window) -> tuple[tuple[float, float], ...]:
        """Visible angles whose boundary points lie in ``W``."""
        return tuple(intersect(self.visible, inside_box(self.center, self.radius, W)))


@dataclass(frozen=True)
class ArcDecomposition:
    """Visible (uncovered) boundary arcs of every grain meeting a region."""

    arcs: tuple[GrainArcs, ...]

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self) -> int:
        return len(self.arcs)

    def by_grain(self) -> dict[int, GrainArcs]:
        return {a.grain: a for a in self.arcs}


def visible_arcs(Z: Realization, region: Window) -> ArcDecomposition:
    """Boundary arcs of grains meeting ``region`` not covered by other grains.

    Covered angular intervals come from the closed-form two-circle
    intersection half-angle.
    """
    if Z.dim != 2:
        raise UnsupportedDimensionError("visible arcs are planar only")
    idx = Z.index
    out = []
    for g in idx.query_box(region.lo, region.hi):
        c = Z.centers[g]
        R = float(Z.radii[g])
        covered = []
        hidden = False
        for j in idx.query_box(c - R, c + R):
            if j == g:
                continue
            Rj = float(Z.radii[j])
            delta = float(math.hypot(Z.centers[j][0] - c[0], Z.centers[j][1] - c[1]))
            if delta >= R + Rj:
                continue
            if Rj >= delta + R:
                # a grain swallowed by an identical copy keeps the lower id visible
                if not (Rj == R and delta == 0.0 and j > g):
                    hidden = True
                    break
                continue
            if R >= delta + Rj:
                continue
            cosphi = (delta * delta + R * R - Rj * Rj) / (2.0 * delta * R)
            phi = math.acos(max(-1.0, min(1.0, cosphi)))
            alpha = math.atan2(Z.centers[j][1] - c[1], Z.centers[j][0] - c[0])
            covered.extend(arc_set(alpha, phi))
        vis = () if hidden else tuple(complement(covered))
        out.append(GrainArcs(int(g), R, (float(c[0]), float(c[1])), vis))
    return ArcDecomposition(tuple(out))


def estimate_limit_spherical(Z: Realization, W: Window, arcs: ArcDecomposition | None = None
                             ) -> WeightedRadiusMeasure:
    """Arc-length estimator: weight ``l_i / (2 pi r_i)`` per effective arc."""
    arcs = arcs or visible_arcs(Z, W)
    radii, weights = [], []
    for ga in arcs:
        eff = ga.restricted(W)
        if not eff:
            continue
        # l_i / (2 pi r_i) is the angular share; a visible point grain counts 1
        w = measure(eff) / TWO_PI
        if w > 0:
            radii.append(ga.radius)
            weights.append(w)
    return WeightedRadiusMeasure(np.asarray(radii, dtype=float), np.asarray(weights, dtype=float))


def projected_length(intervals, radius: float, u) -> float:
    """Length of the projection, along ``u``, of the arc points facing ``-u``."""
    au = math.atan2(u[1], u[0])
    facing = arc_set(au + math.pi, 0.5 * math.pi)
    total = 0.0
    for a, b in intersect(intervals, facing):
        total += -radius * (math.sin(b - au) - math.sin(a - au))
    return max(total, 0.0)


def estimate_limit_linear(Z: Realization, W: Window, u, arcs: ArcDecomposition | None = None
                          ) -> WeightedRadiusMeasure:
    """Directional estimator with weights ``l_i(u) / r_i``."""
    u = GaugeBody.segment(u).u if not isinstance(u, GaugeBody) else u.u
    arcs = arcs or visible_arcs(Z, W)
    radii, weights = [], []
    zero_seen = False
    for ga in arcs:
        if ga.radius == 0:
            zero_seen = True
            continue
        eff = ga.restricted(W)
        if not eff:
            continue
        w = projected_length(eff, ga.radius, u) / ga.radius
        if w > 0:
            radii.append(ga.radius)
            weights.append(w)
    if zero_seen:
        warnings.warn("radius-0 grains ignored by the linear estimator", RuntimeWarning, stacklevel=2)
    return WeightedRadiusMeasure(np.asarray(radii, dtype=float), np.asarray(weights, dtype=float))


def estimate_limit_linear_combined(Z: Realization, W: Window, arcs: ArcDecomposition | None = None
                                   ) -> WeightedRadiusMeasure:
    """Average of the four normalized axis-direction estimates."""
    arcs = arcs or visible_arcs(Z, W)
    parts = [estimate_limit_linear(Z, W, B, arcs).normalized() for B in AXIS_SEGMENTS]
    return WeightedRadiusMeasure.mixture(parts)
