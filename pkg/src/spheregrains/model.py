"""Poisson Boolean model with spherical grains: sampling and contact queries."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy import special

from . import _kernels
from .errors import InsufficientMarginError, SphereGrainsError
from .geometry import GaugeBody, gauge_distance_to_ball, ray_ball_entry

# Upper quantile used as the effective supremum of unbounded radius laws.
TRUNCATION_QUANTILE = 1.0 - 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GLAG_NODES, _GLAG_WEIGHTS = special.roots_laguerre(64)


class RadiusKind(str, Enum):
    UNIFORM = "uniform"
    EXPONENTIAL = "exp"
    DETERMINISTIC = "det"


@dataclass(frozen=True)
class RadiusDistribution:
    """Law of the grain radius.

    ``Uniform(a, b)``, ``Exponential(rate)`` or ``Deterministic(r0)``.
    """

    kind: RadiusKind
    params: tuple[float, ...]

    def __post_init__(self):
        p = self.params
        if self.kind is RadiusKind.UNIFORM:
            if len(p) != 2 or not (0.0 <= p[0] < p[1]):
                raise ValueError(f"uniform radii need 0 <= a < b, got {p}")
        elif self.kind is RadiusKind.EXPONENTIAL:
            if len(p) != 1 or not p[0] > 0.0:
                raise ValueError(f"exponential radii need rate > 0, got {p}")
        elif len(p) != 1 or not p[0] >= 0.0:
            raise ValueError(f"deterministic radius must be >= 0, got {p}")

    @classmethod
    def uniform(cls, a: float, b: float) -> "RadiusDistribution":
        return cls(RadiusKind.UNIFORM, (float(a), float(b)))

    @classmethod
    def exponential(cls, rate: float) -> "RadiusDistribution":
        return cls(RadiusKind.EXPONENTIAL, (float(rate),))

    @classmethod
    def deterministic(cls, r0: float) -> "RadiusDistribution":
        return cls(RadiusKind.DETERMINISTIC, (float(r0),))

    @classmethod
    def parse(cls, text: str) -> "RadiusDistribution":
        """Parse ``uniform:a:b``, ``exp:rate`` or ``det:r0``."""
        name, *vals = text.split(":")
        try:
            kind = RadiusKind(name)
            nums = tuple(float(v) for v in vals)
        except ValueError as exc:
            raise ValueError(f"cannot parse radius distribution {text!r}") from exc
        return cls(kind, nums)

    def spec(self) -> str:
        return ":".join([self.kind.value, *(repr(p) for p in self.params)])

    def moment(self, k: int) -> float:
        """Exact ``E R^k``."""
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        if self.kind is RadiusKind.UNIFORM:
            a, b = self.params
            return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))
        if self.kind is RadiusKind.EXPONENTIAL:
            return math.factorial(k) / self.params[0] ** k
        return self.params[0] ** k

    @property
    def positive_mass(self) -> float:
        """``P(R > 0)``."""
        if self.kind is RadiusKind.DETERMINISTIC:
            return 1.0 if self.params[0] > 0 else 0.0
        return 1.0

    @property
    def has_atom_at_zero(self) -> bool:
        return self.kind is RadiusKind.DETERMINISTIC and self.params[0] == 0.0

    @property
    def support(self) -> tuple[float, float]:
        if self.kind is RadiusKind.UNIFORM:
            return self.params
        if self.kind is RadiusKind.EXPONENTIAL:
            return (0.0, math.inf)
        return (self.params[0], self.params[0])

    @property
    def r_sup(self) -> float:
        """Essential supremum, or the truncation quantile for unbounded laws."""
        if self.kind is RadiusKind.EXPONENTIAL:
            return self.ppf(TRUNCATION_QUANTILE)
        return self.support[1]

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind is RadiusKind.UNIFORM:
            a, b = self.params
            out = np.clip((s - a) / (b - a), 0.0, 1.0)
        elif self.kind is RadiusKind.EXPONENTIAL:
            out = np.where(s > 0, -np.expm1(-self.params[0] * np.maximum(s, 0.0)), 0.0)
        else:
            out = np.where(s >= self.params[0], 1.0, 0.0)
        return out if out.ndim else float(out)

    def cdf_left(self, s):
        """``P(R < s)``."""
        if self.kind is RadiusKind.DETERMINISTIC:
            out = np.where(np.asarray(s, dtype=float) > self.params[0], 1.0, 0.0)
            return out if out.ndim else float(out)
        return self.cdf(s)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if self.kind is RadiusKind.UNIFORM:
            a, b = self.params
            out = a + q * (b - a)
        elif self.kind is RadiusKind.EXPONENTIAL:
            out = -np.log1p(-q) / self.params[0]
        else:
            out = np.full(q.shape, self.params[0])
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind is RadiusKind.UNIFORM:
            return rng.uniform(self.params[0], self.params[1], size=n)
        if self.kind is RadiusKind.EXPONENTIAL:
            return rng.exponential(1.0 / self.params[0], size=n)
        return np.full(n, self.params[0])

    def breakpoints(self) -> np.ndarray:
        """Points where the CDF is not smooth."""
        if self.kind is RadiusKind.EXPONENTIAL:
            return np.array([0.0])
        return np.unique(np.array(self.support))

    def expect(self, func, lower=None):
        """``E[func(R); R > lower]`` by quadrature.

        ``func`` maps an array of radii (shape ``(..., n)``) to values of the
        same shape.  ``lower`` broadcasts against the leading shape; the
        integrand is assumed smooth above it.
        """
        lo_shape = () if lower is None else np.shape(lower)
        low = np.zeros(lo_shape) if lower is None else np.asarray(lower, dtype=float)
        if self.kind is RadiusKind.DETERMINISTIC:
            r0 = self.params[0]
            val = np.asarray(func(np.full(lo_shape + (1,), r0)))[..., 0]
            return val if lower is None else np.where(r0 > low, val, 0.0)
        if self.kind is RadiusKind.UNIFORM:
            a, b = self.params
            lo = np.clip(low, a, b)[..., None]
            half = 0.5 * (b - lo)
            r = lo + half * (_GL_NODES + 1.0)
            w = half * _GL_WEIGHTS / (b - a)
            return np.sum(np.asarray(func(r)) * w, axis=-1)
        lam = self.params[0]
        lo = np.maximum(low, 0.0)[..., None]
        # memorylessness: R | R > lo  ==  lo + Exp(lam)
        r = lo + _GLAG_NODES / lam
        return np.exp(-lam * lo[..., 0]) * np.sum(np.asarray(func(r)) * _GLAG_WEIGHTS, axis=-1)

    def mass(self, lo: float, hi: float) -> float:
        """``P(lo < R <= hi)``."""
        return float(self.cdf(hi) - self.cdf(lo)) if lo > -math.inf else float(self.cdf(hi))


@dataclass(frozen=True)
class ModelParams:
    intensity: float
    radius_dist: RadiusDistribution
    dim: int = 2

    def __post_init__(self):
        if not (0.0 < self.intensity < math.inf):
            raise ValueError(f"intensity must be positive and finite, got {self.intensity}")
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")
        if self.radius_dist.positive_mass <= 0.0:
            raise ValueError("radius law must satisfy P(R > 0) > 0")

    def to_dict(self) -> dict:
        return {"intensity": self.intensity, "radius_dist": self.radius_dist.spec(), "dim": self.dim}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(float(d["intensity"]), RadiusDistribution.parse(d["radius_dist"]), int(d.get("dim", 2)))


@dataclass(frozen=True)
class Window:
    """Axis-parallel box ``[lower, upper]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("corner dimensions differ")
        if not all(hi > lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"degenerate window {self.lower} .. {self.upper}")

    @classmethod
    def box(cls, lower, upper) -> "Window":
        return cls(tuple(float(c) for c in lower), tuple(float(c) for c in upper))

    @classmethod
    def unit(cls, dim: int = 2) -> "Window":
        return cls.box([0.0] * dim, [1.0] * dim)

    @classmethod
    def centered(cls, n: float, dim: int = 2) -> "Window":
        """``[-n, n]^d``."""
        return cls.box([-n] * dim, [n] * dim)

    @classmethod
    def parse(cls, text: str) -> "Window":
        vals = [float(v) for v in text.split(":")]
        if len(vals) % 2:
            raise ValueError(f"window needs an even number of coordinates: {text!r}")
        k = len(vals) // 2
        return cls.box(vals[:k], vals[k:])

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.upper)

    def dilate(self, margin: float) -> "Window":
        return Window.box(self.lo - margin, self.hi + margin)

    def erode(self, B: GaugeBody, eps: float) -> "Window | None":
        """``{x in W : x + eps B ⊆ W}``; ``None`` when empty."""
        lo, hi = self.lo.copy(), self.hi.copy()
        if B.is_ball:
            lo += eps
            hi -= eps
        else:
            shift = eps * B.u
            hi = hi - np.maximum(shift, 0.0)
            lo = lo - np.minimum(shift, 0.0)
        if np.any(hi < lo):
            return None
        if np.any(hi == lo):
            return None
        return Window.box(lo, hi)

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.lo, self.hi])

    def spec(self) -> str:
        return ":".join(repr(c) for c in (*self.lower, *self.upper))


def lattice_points(window: Window, h: float) -> np.ndarray:
    """Points ``lower + (k - 1/2) h`` (k = 1, 2, ...) inside the window."""
    axes = []
    for lo, hi in zip(window.lower, window.upper):
        k = np.arange(1, int(math.floor((hi - lo) / h + 0.5)) + 2)
        c = lo + (k - 0.5) * h
        axes.append(c[c <= hi])
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class GridIndex:
    """Uniform cell grid over the plane listing every grain whose bounding box
    meets a cell."""

    def __init__(self, centers: np.ndarray, radii: np.ndarray, bounds: Window, cell: float):
        if bounds.dim != 2:
            raise SphereGrainsError("grid index is planar")
        self.cell = float(cell)
        self.origin = bounds.lo.astype(float)
        extent = bounds.hi - bounds.lo
        self.nx, self.ny = (int(v) for v in np.maximum(np.ceil(extent / self.cell), 1))
        self.centers = np.ascontiguousarray(centers, dtype=float)
        self.radii = np.ascontiguousarray(radii, dtype=float)
        self.start, self.items = _kernels.build_cell_lists(
            self.centers[:, 0].copy(), self.centers[:, 1].copy(), self.radii,
            self.origin[0], self.origin[1], self.cell, self.nx, self.ny,
        )

    def query_box(self, lower, upper) -> np.ndarray:
        """Ids of the grains whose (closed) ball meets the box."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        i0, j0 = np.floor((lower - self.origin) / self.cell).astype(int)
        i1, j1 = np.floor((upper - self.origin) / self.cell).astype(int)
        i0, i1 = max(i0, 0), min(i1, self.nx - 1)
        j0, j1 = max(j0, 0), min(j1, self.ny - 1)
        found = []
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                c = i * self.ny + j
                found.append(self.items[self.start[c]:self.start[c + 1]])
        if not found:
            return np.empty(0, dtype=np.int64)
        ids = np.unique(np.concatenate(found))
        gap = np.maximum(lower - self.centers[ids], 0.0) + np.maximum(self.centers[ids] - upper, 0.0)
        keep = np.einsum("ij,ij->i", gap, gap) <= self.radii[ids] ** 2
        return ids[keep]


@dataclass(frozen=True, eq=False)
class Realization:
    """Germs and radii of one sample, populated on ``sim_window``.

    Contact queries from points of ``window`` are exact up to gauge distance
    ``reach``; beyond that the unsimulated part of the plane could matter.
    """

    centers: np.ndarray
    radii: np.ndarray
    window: Window
    sim_window: Window
    margin: float
    r_sup: float
    params: ModelParams | None = None
    seed: int | None = None
    cell_size: float | None = field(default=None)

    def __post_init__(self):
        self.centers.setflags(write=False)
        self.radii.setflags(write=False)

    @property
    def reach(self) -> float:
        return self.margin - self.r_sup

    @property
    def dim(self) -> int:
        return self.window.dim

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self.radii))

    def __len__(self) -> int:
        return len(self.radii)

    @cached_property
    def index(self) -> GridIndex:
        cell = self.cell_size or default_cell_size(self.r_sup, self.params)
        bounds = self.sim_window.dilate(self.r_sup)
        return GridIndex(self.centers, self.radii, bounds, cell)

    def subset(self, ids) -> "Realization":
        ids = np.asarray(ids, dtype=int)
        return Realization(self.centers[ids].copy(), self.radii[ids].copy(), self.window,
                           self.sim_window, self.margin, self.r_sup, self.params, self.seed,
                           self.cell_size)

    def restrict(self, window: Window, reach: float) -> "Realization":
        """Same germs viewed from a smaller window (needs ``window ⊕ reach``
        inside the populated region)."""
        if np.any(window.lo - reach < self.window.lo - self.reach - 1e-12) or np.any(
            window.hi + reach > self.window.hi + self.reach + 1e-12
        ):
            raise InsufficientMarginError("sub-window reach exceeds the populated region")
        margin = reach + self.r_sup
        return Realization(self.centers, self.radii, window, self.sim_window, margin,
                           self.r_sup, self.params, self.seed, self.cell_size)

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = {
            "params": self.params.to_dict() if self.params else None,
            "seed": self.seed,
            "window": self.window.spec(),
            "sim_window": self.sim_window.spec(),
            "margin": self.margin,
            "r_sup": self.r_sup,
        }
        buf.write("# spheregrains realization " + json.dumps(meta, sort_keys=True) + "\n")
        cols = ["id"] + [f"x{k + 1}" for k in range(self.dim)] + ["radius"]
        buf.write(",".join(cols) + "\n")
        for i, (c, r) in enumerate(zip(self.centers, self.radii)):
            buf.write(",".join([str(i), *(repr(float(v)) for v in c), repr(float(r))]) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Realization":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# spheregrains realization "):
            raise ValueError("missing realization header")
        meta = json.loads(lines[0][len("# spheregrains realization "):])
        rows = [ln.split(",") for ln in lines[2:] if ln.strip()]
        dim = len(lines[1].split(",")) - 2
        data = np.array([[float(v) for v in row[1:]] for row in rows]).reshape(-1, dim + 1)
        params = ModelParams.from_dict(meta["params"]) if meta["params"] else None
        return cls(
            np.ascontiguousarray(data[:, :dim]), np.ascontiguousarray(data[:, dim]),
            Window.parse(meta["window"]), Window.parse(meta["sim_window"]),
            float(meta["margin"]), float(meta["r_sup"]), params, meta["seed"],
        )


def default_cell_size(r_sup: float, params: ModelParams | None) -> float:
    cell = r_sup
    if params is not None:
        cell = max(cell, params.intensity ** (-1.0 / params.dim))
    return max(cell, 1e-6)


def default_reach(params: ModelParams, tail: float = 1e-9) -> float:
    """Ball-gauge distance beyond which the empty probability is below ``tail``."""
    from .emptyspace import empty_space_Fbar

    B = GaugeBody.ball(params.dim)
    t = max(params.radius_dist.r_sup, 1e-3)
    while empty_space_Fbar(t, params, B) > tail:
        t *= 1.5
    return t


def sample_realization(params: ModelParams, window: Window, seed: int, reach: float | None = None,
                       cell_size: float | None = None) -> Realization:
    """Sample germs on ``window`` dilated by ``r_sup + reach``.

    ``reach`` is the largest gauge distance that will be probed from the
    window; it defaults to :func:`default_reach`.
    """
    if window.dim != params.dim:
        raise ValueError("window and model dimensions differ")
    if reach is None:
        reach = default_reach(params)
    r_sup = params.radius_dist.r_sup
    margin = r_sup + reach
    sim = window.dilate(margin)
    rng = np.random.default_rng(seed)
    n = rng.poisson(params.intensity * sim.volume)
    centers = sim.lo + rng.random((n, params.dim)) * (sim.hi - sim.lo)
    radii = params.radius_dist.sample(rng, n)
    return Realization(np.ascontiguousarray(centers), np.ascontiguousarray(radii), window, sim,
                       margin, r_sup, params, seed, cell_size)


@dataclass(frozen=True)
class ContactRecord:
    x: tuple[float, ...]
    distance: float
    radius: float | None
    grain: int
    point: tuple[float, ...] | None


@dataclass(frozen=True)
class ContactField:
    """Contact distances, radii and grain ids for a batch of points.

    ``distance`` is ``inf`` when no grain is hit within ``cap`` (or at all,
    for a segment gauge pointing into empty space); ``grain`` is then -1.
    """

    points: np.ndarray
    distance: np.ndarray
    grain: np.ndarray
    radius: np.ndarray


def _gauge_args(B: GaugeBody):
    if B.is_ball:
        return 0, 0.0, 0.0
    return 1, float(B.u[0]), float(B.u[1])


def _finish(points, Z, dist, gid):
    radius = np.where(gid >= 0, Z.radii[np.maximum(gid, 0)] if len(Z) else 0.0, np.nan)
    return ContactField(points, dist, gid, radius)


def contact_field(points, Z: Realization, B: GaugeBody, cap: float = math.inf,
                  clip: Window | None = None) -> ContactField:
    """Index-pruned contact query for many points.

    With ``clip`` the grains are replaced by their intersections with that
    window (the uncorrected estimator's view ``Z ∩ W``); points must then lie
    in ``clip``.  Raises :class:`InsufficientMarginError` when a point's
    answer depends on grains outside the populated region.
    """
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    if Z.dim != 2 or B.dim != 2:
        return _contact_field_nd(pts, Z, B, cap, clip)
    idx = Z.index
    mode, ux, uy = _gauge_args(B)
    win = (clip or Z.window).as_array()
    dist, gid, status = _kernels.contact_grid(
        pts[:, 0].copy(), pts[:, 1].copy(), idx.centers[:, 0].copy(), idx.centers[:, 1].copy(),
        idx.radii, idx.start, idx.items, idx.origin[0], idx.origin[1], idx.cell, idx.nx, idx.ny,
        mode, ux, uy, float(cap), float(Z.reach), win, clip is not None,
    )
    if np.any(status):
        bad = int(np.flatnonzero(status)[0])
        raise InsufficientMarginError(
            f"contact search from {pts[bad].tolist()} left the populated region "
            f"(reach {Z.reach:g}); enlarge the simulation margin"
        )
    return _finish(pts, Z, dist, gid)


def _contact_field_nd(pts, Z, B, cap, clip):
    if clip is not None:
        raise SphereGrainsError("clipped contact is planar only")
    if len(Z) == 0:
        d = np.full(len(pts), np.inf)
        g = np.full(len(pts), -1)
    else:
        w = pts[:, None, :] - Z.centers[None, :, :]
        if B.is_ball:
            alld = np.maximum(np.sqrt(np.einsum("pgi,pgi->pg", w, w)) - Z.radii[None, :], 0.0)
        else:
            alld = ray_ball_entry(w, B.u, Z.radii[None, :])
        g = np.argmin(alld, axis=1)
        d = alld[np.arange(len(pts)), g]
    outside = np.sqrt(np.sum((np.maximum(Z.window.lo - pts, 0) + np.maximum(pts - Z.window.hi, 0)) ** 2, axis=1))
    reach = Z.reach - outside
    limit = np.minimum(cap, reach)
    ok = d <= limit
    beyond = ~ok & (cap <= reach)
    if np.any(~ok & ~beyond):
        raise InsufficientMarginError("contact search left the populated region")
    d = np.where(ok, d, np.inf)
    g = np.where(ok, g, -1)
    return _finish(pts, Z, d, g)


def contact_brute_force(points, Z: Realization, B: GaugeBody, clip: Window | None = None) -> ContactField:
    """Minimum over every germ without the index (planar)."""
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    mode, ux, uy = _gauge_args(B)
    win = (clip or Z.window).as_array()
    dist, gid = _kernels.contact_all(
        pts[:, 0].copy(), pts[:, 1].copy(), Z.centers[:, 0].copy(), Z.centers[:, 1].copy(),
        np.ascontiguousarray(Z.radii), mode, ux, uy, win, clip is not None,
    )
    return _finish(pts, Z, dist, gid)


def contact(x, Z: Realization, B: GaugeBody, clip: Window | None = None) -> ContactRecord:
    """Contact distance, radius, grain and contact point for a single point."""
    x = np.asarray(x, dtype=float)
    cf = contact_field(x[None, :], Z, B, clip=clip)
    d = float(cf.distance[0])
    g = int(cf.grain[0])
    if g < 0:
        return ContactRecord(tuple(x), d, None, -1, None)
    c = Z.centers[g]
    r = float(Z.radii[g])
    if d == 0.0:
        point = tuple(x)
    elif B.is_ball:
        if clip is None:
            point = tuple(c + r * (x - c) / np.linalg.norm(x - c))
        else:
            point = _clipped_foot(x, c, r, clip, d)
    else:
        point = tuple(x + d * B.u)
    return ContactRecord(tuple(x), d, r if d > 0 else None, g, point)


def _clipped_foot(x, c, r, clip, d):
    foot = c + r * (x - c) / np.linalg.norm(x - c)
    if np.all(foot >= clip.lo) and np.all(foot <= clip.hi):
        return tuple(foot)
    lo, hi = clip.lo, clip.hi
    corners = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
    best, best_pt = math.inf, None
    for k in range(4):
        a = np.array(corners[k])
        e = np.array(corners[(k + 1) % 4]) - a
        f = a - c
        qa, qb, qc = e @ e, 2.0 * (f @ e), f @ f - r * r
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            continue
        s0 = max((-qb - math.sqrt(disc)) / (2 * qa), 0.0)
        s1 = min((-qb + math.sqrt(disc)) / (2 * qa), 1.0)
        if s0 > s1:
            continue
        sp = min(max((x - a) @ e / qa, s0), s1)
        pt = a + sp * e
        dd = float(np.linalg.norm(pt - x))
        if dd < best:
            best, best_pt = dd, pt
    return tuple(best_pt)


__all__ = [
    "RadiusDistribution", "RadiusKind", "ModelParams", "Window", "Realization", "GridIndex",
    "ContactRecord", "ContactField", "sample_realization", "contact", "contact_field",
    "contact_brute_force", "lattice_points", "default_reach", "gauge_distance_to_ball",
]
