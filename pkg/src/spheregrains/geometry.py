"""Gauge bodies, unit-ball constants and the small geometric kernels.

Two gauge bodies are supported: the Euclidean unit ball and the unit
segment ``[0, u]`` for a unit vector ``u``.  Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import UnsupportedDimensionError


class GaugeKind(str, Enum):
    BALL = "ball"
    SEGMENT = "segment"


@dataclass(frozen=True)
class GaugeBody:
    """Structuring element used to measure distances to the Boolean model.

    Use :meth:`ball` or :meth:`segment` rather than calling the constructor.
    """

    kind: GaugeKind
    dim: int = 2
    direction: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dim}")
        if self.kind is GaugeKind.SEGMENT:
            if self.direction is None or len(self.direction) != self.dim:
                raise ValueError("segment gauge needs a direction of length dim")
            norm = math.sqrt(sum(c * c for c in self.direction))
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"segment direction must have unit norm, got {norm}")
        elif self.direction is not None:
            raise ValueError("ball gauge takes no direction")

    @classmethod
    def ball(cls, dim: int = 2) -> "GaugeBody":
        return cls(GaugeKind.BALL, dim)

    @classmethod
    def segment(cls, direction, normalize: bool = False) -> "GaugeBody":
        u = np.asarray(direction, dtype=float)
        if normalize:
            u = u / np.linalg.norm(u)
        return cls(GaugeKind.SEGMENT, len(u), tuple(float(c) for c in u))

    @classmethod
    def parse(cls, text: str, dim: int = 2) -> "GaugeBody":
        """``ball`` or ``segment:+x|-x|+y|-y`` (or ``segment:u1,u2,...``)."""
        if text == "ball":
            return cls.ball(dim)
        kind, _, arg = text.partition(":")
        if kind != "segment" or not arg:
            raise ValueError(f"unknown gauge {text!r}")
        axes = {"+x": (1.0, 0.0), "-x": (-1.0, 0.0), "+y": (0.0, 1.0), "-y": (0.0, -1.0)}
        if arg in axes:
            return cls.segment(axes[arg])
        return cls.segment([float(c) for c in arg.split(",")], normalize=True)

    @property
    def is_ball(self) -> bool:
        return self.kind is GaugeKind.BALL

    @property
    def u(self) -> np.ndarray:
        return np.asarray(self.direction, dtype=float)

    def label(self) -> str:
        if self.is_ball:
            return "ball"
        names = {(1.0, 0.0): "+x", (-1.0, 0.0): "-x", (0.0, 1.0): "+y", (0.0, -1.0): "-y"}
        key = tuple(float(c) for c in self.direction)
        return "segment:" + names.get(key, ",".join(f"{c:g}" for c in key))


# The four axis directions combined by the linear estimators.
AXIS_SEGMENTS = tuple(
    GaugeBody.segment(u) for u in ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))
)


def kappa_volume(k: int) -> float:
    """Volume of the k-dimensional unit ball, pi^(k/2) / Gamma(1 + k/2)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.pi ** (k / 2.0) / math.gamma(1.0 + k / 2.0)


@lru_cache(maxsize=None)
def _ball_intrinsic_volumes(d: int) -> tuple[float, ...]:
    kd = kappa_volume(d)
    return tuple(math.comb(d, j) * kd / kappa_volume(d - j) for j in range(d + 1))


def intrinsic_volumes(B: GaugeBody) -> np.ndarray:
    """Intrinsic volumes ``(V_0, ..., V_d)`` of the gauge body."""
    if B.is_ball:
        return np.array(_ball_intrinsic_volumes(B.dim))
    v = np.zeros(B.dim + 1)
    v[0] = 1.0
    v[1] = 1.0
    return v


def h_B(t, r, B: GaugeBody):
    """Density factor ``sum_j (j+1) kappa_{d-1-j} V_{j+1}(B) r^(d-1-j) t^j``.

    Accepts scalars or broadcastable arrays.
    """
    d = B.dim
    V = intrinsic_volumes(B)
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    out = np.zeros(np.broadcast(t, r).shape)
    for j in range(d):
        coef = (j + 1) * kappa_volume(d - 1 - j) * V[j + 1]
        if coef != 0.0:
            out = out + coef * r ** (d - 1 - j) * t**j
    return out if out.ndim else float(out)


def gauge_distance_to_ball(x, center, radius: float, B: GaugeBody) -> float:
    """B-distance from ``x`` to the closed ball ``B(center, radius)``.

    Returns ``math.inf`` when a segment gauge points away from the ball.
    """
    x = np.asarray(x, dtype=float)
    w = x - np.asarray(center, dtype=float)
    if B.is_ball:
        return max(float(np.linalg.norm(w)) - radius, 0.0)
    return float(ray_ball_entry(w, B.u, radius))


def ray_ball_entry(w, u, radius):
    """Entry parameter of the ray ``w + t u`` (t >= 0) into the ball of given
    radius at the origin; ``inf`` on a miss, ``0`` if ``w`` is inside.

    Vectorized over leading axes of ``w`` and ``radius``.
    """
    w = np.asarray(w, dtype=float)
    b = w @ np.asarray(u, dtype=float)
    c = np.einsum("...i,...i->...", w, w) - np.asarray(radius, dtype=float) ** 2
    disc = b * b - c
    with np.errstate(invalid="ignore", divide="ignore"):
        # c / (-b + sqrt(disc)) == -b - sqrt(disc) without cancellation
        t = c / (-b + np.sqrt(np.maximum(disc, 0.0)))
    hit = (disc >= 0.0) & (b < 0.0)
    t = np.where(hit, t, np.inf)
    t = np.where(c <= 0.0, 0.0, t)
    return t if t.ndim else float(t)


@dataclass(frozen=True)
class LensSpec:
    """Arguments of the intersection volume of ``B(o, rho1)`` and ``B(u, rho2)``."""

    offset: tuple[float, ...]
    rho1: float
    rho2: float

    def __post_init__(self):
        if self.rho1 < 0 or self.rho2 < 0:
            raise ValueError("lens radii must be nonnegative")

    @classmethod
    def from_times(cls, u, t1: float, t2: float, r: float) -> "LensSpec":
        return cls(tuple(float(c) for c in u), t1 + r, t2 + r)


def lens_volume(spec: LensSpec) -> float:
    """Volume of ``B(o, rho1) ∩ B(u, rho2)`` for d in {2, 3}."""
    d = len(spec.offset)
    dist = float(np.linalg.norm(spec.offset))
    return float(lens_volume_array(dist, spec.rho1, spec.rho2, d))


def lens_volume_array(dist, rho1, rho2, d: int = 2):
    """Vectorized ball intersection volume given center distance and radii."""
    if d not in (2, 3):
        raise UnsupportedDimensionError(f"closed-form lens volume only for d in (2, 3), got {d}")
    dist, rho1, rho2 = np.broadcast_arrays(
        np.asarray(dist, dtype=float), np.asarray(rho1, dtype=float), np.asarray(rho2, dtype=float)
    )
    small = np.minimum(rho1, rho2)
    big = np.maximum(rho1, rho2)
    disjoint = dist >= rho1 + rho2
    nested = dist <= big - small
    partial = ~(disjoint | nested)
    out = np.where(nested, kappa_volume(d) * small**d, 0.0)
    if np.any(partial):
        p = dist[partial]
        a = rho1[partial]
        b = rho2[partial]
        if d == 2:
            # (p^2 + a^2 - b^2) / (2pa) rearranged so tiny p cannot underflow to 0/0
            q = (a - b) * (a + b) / p
            ca = np.clip((p + q) / (2.0 * a), -1.0, 1.0)
            cb = np.clip((p - q) / (2.0 * b), -1.0, 1.0)
            kite = (-p + a + b) * (p + a - b) * (p - a + b) * (p + a + b)
            val = a * a * np.arccos(ca) + b * b * np.arccos(cb) - 0.5 * np.sqrt(np.maximum(kite, 0.0))
        else:
            val = (
                math.pi
                * (a + b - p) ** 2
                * (p * p + 2 * p * b - 3 * b * b + 2 * p * a + 6 * b * a - 3 * a * a)
                / (12.0 * p)
            )
        out = out.copy()
        out[partial] = np.maximum(val, 0.0)
    return out if out.ndim else float(out)


def circle_fraction_outside(rho, dist, b):
    """Fraction of the circle of radius ``rho`` about the origin lying outside
    the closed disk of radius ``b`` centered ``dist`` away.  Planar only.
    """
    rho, dist, b = np.broadcast_arrays(
        np.asarray(rho, dtype=float), np.asarray(dist, dtype=float), np.asarray(b, dtype=float)
    )
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        cosphi = (rho * rho + dist * dist - b * b) / (2.0 * rho * dist)
    phi = np.arccos(np.clip(cosphi, -1.0, 1.0))
    frac = 1.0 - phi / math.pi
    frac = np.where(dist >= rho + b, 1.0, frac)
    frac = np.where(rho >= dist + b, 1.0, frac)
    frac = np.where(b >= rho + dist, 0.0, frac)
    return frac
