"""Analytic first- and second-order empty space functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import AssumptionViolatedError, DivergentWeightError, UnsupportedGaugeError
from .geometry import GaugeBody, intrinsic_volumes, kappa_volume, lens_volume_array
from .model import ModelParams

# Integrals over t stop once the empty probability drops below this.
NEGLIGIBLE = 1e-16


class WeightKind(str, Enum):
    INDICATOR_BAND = "band"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class WeightFunction:
    """Weight ``f`` applied to contact distances.

    ``IndicatorBand(eps)`` is ``f(t) = 1{t <= eps} / eps``.  ``Tabulated`` is
    the piecewise linear interpolant of (knots, values), zero outside the
    knot range.  Values at ``t = 0`` and ``t = inf`` are always zero.
    """

    kind: WeightKind
    eps: float | None = None
    knots: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind is WeightKind.INDICATOR_BAND:
            if self.eps is None or not self.eps > 0:
                raise ValueError("indicator band needs eps > 0")
        else:
            if self.knots is None or self.values is None or len(self.knots) != len(self.values):
                raise ValueError("tabulated weight needs matching knots and values")
            if len(self.knots) < 2 or np.any(np.diff(self.knots) <= 0) or self.knots[0] < 0:
                raise ValueError("knots must be nonnegative and strictly increasing")
            if np.any(np.asarray(self.values) < 0):
                raise ValueError("weights must be nonnegative")

    @classmethod
    def band(cls, eps: float) -> "WeightFunction":
        return cls(WeightKind.INDICATOR_BAND, eps=float(eps))

    @classmethod
    def tabulated(cls, knots, values) -> "WeightFunction":
        return cls(WeightKind.TABULATED, knots=tuple(map(float, knots)), values=tuple(map(float, values)))

    @property
    def upper(self) -> float:
        """Right end of the support."""
        return self.eps if self.kind is WeightKind.INDICATOR_BAND else self.knots[-1]

    @property
    def breakpoints(self) -> list[float]:
        return [self.eps] if self.kind is WeightKind.INDICATOR_BAND else list(self.knots)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WeightKind.INDICATOR_BAND:
            out = np.where((t > 0) & (t <= self.eps), 1.0 / self.eps, 0.0)
        else:
            out = np.interp(t, self.knots, self.values, left=0.0, right=0.0)
            out = np.where((t > 0) & np.isfinite(t), out, 0.0)
        return out if out.ndim else float(out)


def _exponent(t, params: ModelParams, B: GaugeBody):
    d = params.dim
    V = intrinsic_volumes(B)
    t = np.asarray(t, dtype=float)
    s = np.zeros(t.shape)
    for j in range(d + 1):
        s = s + kappa_volume(d - j) * V[j] * t**j * params.radius_dist.moment(d - j)
    return params.intensity * s


def empty_space_Fbar(t, params: ModelParams, B: GaugeBody):
    """``P(d_B(o, Z) > t)``."""
    out = np.exp(-_exponent(t, params, B))
    return out if out.ndim else float(out)


def empty_space_F(t, params: ModelParams, B: GaugeBody):
    """``F_B(t) = P(d_B(o, Z) <= t) = 1 - exp(-gamma E|tB ⊕ R B^d|)``."""
    out = -np.expm1(-_exponent(t, params, B))
    return out if out.ndim else float(out)


def expected_lens_volume(dist, t1, t2, params: ModelParams):
    """``E |B(o, t1 + R) ∩ B(u, t2 + R)|`` for ``|u| = dist``."""
    dist, t1, t2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (dist, t1, t2)))
    # the balls are disjoint for R <= (dist - t1 - t2) / 2
    lower = 0.5 * (dist - t1 - t2)
    d = params.dim

    def vol(r):
        return lens_volume_array(dist[..., None], t1[..., None] + r, t2[..., None] + r, d)

    out = params.radius_dist.expect(vol, lower=lower)
    return out if np.ndim(out) else float(out)


def second_order_F2bar(u, t1: float, t2: float, params: ModelParams, B: GaugeBody | None = None):
    """``P(d_B(o, Z) > t1, d_B(u, Z) > t2)`` for the ball gauge."""
    B = B or GaugeBody.ball(params.dim)
    if not B.is_ball:
        raise UnsupportedGaugeError("second-order empty space function is implemented for the ball only")
    dist = float(np.linalg.norm(np.asarray(u, dtype=float)))
    return float(second_order_F2bar_radial(dist, t1, t2, params))


def second_order_F2bar_radial(dist, t1, t2, params: ModelParams):
    """Vectorized ball-gauge second-order function in terms of ``|u|``."""
    B = GaugeBody.ball(params.dim)
    lens = expected_lens_volume(dist, t1, t2, params)
    return empty_space_Fbar(t1, params, B) * empty_space_Fbar(t2, params, B) * np.exp(
        params.intensity * lens
    )


def second_order_bounds(t1, t2, params: ModelParams):
    """Lower and upper bounds ``(F̄ F̄, sqrt(F̄ F̄))``."""
    B = GaugeBody.ball(params.dim)
    prod = empty_space_Fbar(t1, params, B) * empty_space_Fbar(t2, params, B)
    return prod, np.sqrt(prod)


def decay_constant_c(params: ModelParams, B: GaugeBody) -> float:
    """``c = gamma kappa_{d-1} V_1(B) E R^{d-1} / 4``."""
    d = params.dim
    c = params.intensity * kappa_volume(d - 1) * intrinsic_volumes(B)[1] * params.radius_dist.moment(d - 1) / 4.0
    if not c > 0:
        raise ValueError("decay constant must be positive")
    return c


def tail_cutoff(params: ModelParams, B: GaugeBody, level: float = NEGLIGIBLE) -> float:
    """Smallest ``t`` (up to doubling) with ``F̄_B(t) < level``."""
    t = 1e-3
    while empty_space_Fbar(t, params, B) >= level:
        t *= 2.0
    return t


def beta_constant(f: WeightFunction, params: ModelParams, B: GaugeBody, rtol: float = 1e-9) -> float:
    """``beta = ∫ f(t) F̄_B(t) dt`` by adaptive quadrature."""
    top = min(f.upper, tail_cutoff(params, B))
    pts = [p for p in f.breakpoints if 0 < p < top]

    def integrand(t):
        return float(f(t)) * empty_space_Fbar(t, params, B)

    val, _ = integrate.quad(integrand, 0.0, top, points=pts or None, epsrel=rtol, epsabs=0.0, limit=500)
    if not math.isfinite(val) or val > 1e300:
        raise DivergentWeightError("weight integral diverges")
    if not val > 0:
        raise ValueError("beta must be positive: the weight vanishes where the empty probability lives")
    return val


def check_assumption(f: WeightFunction, params: ModelParams, B: GaugeBody) -> float:
    """Return ``∫ f(t) exp(-c t) dt``; raise if it is not finite and positive."""
    c = decay_constant_c(params, B)
    pts = [p for p in f.breakpoints if 0 < p < f.upper]
    val, _ = integrate.quad(lambda t: float(f(t)) * math.exp(-c * t), 0.0, f.upper,
                            points=pts or None, limit=500)
    if not (math.isfinite(val) and val > 0):
        raise AssumptionViolatedError(f"∫ f(t) exp(-ct) dt = {val}")
    return val
