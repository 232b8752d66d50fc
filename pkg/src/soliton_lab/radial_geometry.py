"""Curvature, Laplacian, divergence and flux for rotationally symmetric metrics.

The metric is ``g = dr² + w(r)² g_{S^{m-1}}`` (optionally times a flat factor
ℝ^k, in which case ``n = m + k``) with a radial potential ``f(r)``.  Callers
supply every derivative; nothing here differentiates numerically.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError, DomainError, OriginLimitError

__all__ = [
    "DEFAULT_SWITCH_RADIUS",
    "RadialPoint",
    "GeometryFrame",
    "sphere_volume",
    "curvature_from_point",
    "frame_from_curvatures",
    "laplacian_radial",
    "divergence_radial",
    "sphere_flux",
    "rescale_metric",
    "scalar_curvature",
]

DEFAULT_SWITCH_RADIUS = 1e-3


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialPoint:
    """State of a warped-product soliton at geodesic distance ``r``.

    ``n_flat`` counts flat ℝ factors multiplied onto the warped part; the
    sphere cross-section then has ``n - 1 - n_flat`` dimensions.
    """

    r: float
    w: float
    wp: float
    fp: float
    n: int
    n_flat: int = 0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DimensionError(f"dimension must be >= 2, got {self.n}")
        if not 0 <= self.n_flat < self.n:
            raise DimensionError(f"invalid flat factor count {self.n_flat} for n={self.n}")
        if not (math.isfinite(self.fp) and math.isfinite(self.wp)):
            raise DomainError(f"non-finite state at r={self.r!r}")
        if self.r < 0:
            raise DomainError(f"negative radius {self.r!r}")
        if self.mult > 0 and self.r > 0 and not self.w > 0:
            raise DomainError(f"w={self.w!r} <= 0 at r={self.r!r}: inside origin chart")

    @property
    def mult(self) -> int:
        """Number of sphere directions (multiplicity of ric_tan)."""
        return self.n - 1 - self.n_flat


@dataclass(frozen=True)
class GeometryFrame:
    """All pointwise geometric scalars at one radius.

    ``Rpp`` is the second radial derivative of R and ``fpp`` the radial
    Hessian of f; both feed the Lemma-style residuals.  ``w``/``wp`` are
    ``None`` for parametrisations without a warping function.
    """

    r: float
    n: int
    R: float
    Rp: float
    Rpp: float
    lapR: float
    ric_rad: float
    ric_tan: float
    ric_norm_sq: float
    rm_norm: float
    grad_f_norm: float
    k_rad: float
    k_tan: float
    fp: float
    fpp: float
    w: float | None
    wp: float | None
    c0: float = 1.0
    n_flat: int = 0

    @property
    def tangential_mult(self) -> int:
        return self.n - 1 - self.n_flat

    def radial_point(self) -> RadialPoint:
        w = 1.0 if self.w is None else self.w
        wp = 0.0 if self.wp is None else self.wp
        return RadialPoint(r=self.r, w=w, wp=wp, fp=self.fp, n=self.n, n_flat=self.n_flat)


# ---------------------------------------------------------------------------
# Sphere volumes (exact Γ recursion on integers and half-integers)
# ---------------------------------------------------------------------------


def _gamma_half(m: int) -> float:
    """Γ(m/2) for a positive integer m."""
    if m % 2 == 0:
        return float(math.factorial(m // 2 - 1))
    g = math.sqrt(math.pi)
    x = 0.5
    while x < m / 2:
        g *= x
        x += 1.0
    return g


@lru_cache(maxsize=None)
def sphere_volume(k: int) -> float:
    """Volume of the unit k-sphere, ω_k = 2π^{(k+1)/2} / Γ((k+1)/2)."""
    if k < 0:
        raise DimensionError(f"sphere dimension must be >= 0, got {k}")
    m = k + 1
    pi_power = math.pi ** (m // 2)
    if m % 2:
        pi_power *= math.sqrt(math.pi)
    return 2.0 * pi_power / _gamma_half(m)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------


def _check_chart(point: RadialPoint, switch_radius: float) -> None:
    if point.mult == 0:
        return
    if point.w <= 0:
        raise OriginLimitError(
            f"w={point.w!r} at r={point.r!r}: inside origin chart, use the series limit"
        )
    if point.r < switch_radius:
        raise OriginLimitError(
            f"r={point.r!r} below switch radius {switch_radius!r}: use the series limit"
        )


def frame_from_curvatures(
    point: RadialPoint,
    *,
    k_rad: float,
    k_tan: float,
    fpp: float,
    Rpp: float,
    lapR: float,
    c0: float = 1.0,
    warped: bool = True,
) -> GeometryFrame:
    """Assemble a frame from the two sectional curvatures.

    Used directly by callers that already know the curvatures in closed form
    or as series limits (origin, cigar, flat products).
    """
    m = point.n - point.n_flat
    mult = m - 1
    ric_rad = (m - 1) * k_rad
    ric_tan = k_rad + (m - 2) * k_tan
    R = ric_rad + mult * ric_tan
    ric_norm_sq = ric_rad**2 + mult * ric_tan**2
    rm_norm = math.sqrt(4 * (m - 1) * k_rad**2 + 2 * (m - 1) * (m - 2) * k_tan**2)
    return GeometryFrame(
        r=point.r,
        n=point.n,
        R=R,
        Rp=-2.0 * fpp * point.fp,
        Rpp=Rpp,
        lapR=lapR,
        ric_rad=ric_rad,
        ric_tan=ric_tan,
        ric_norm_sq=ric_norm_sq,
        rm_norm=rm_norm,
        grad_f_norm=abs(point.fp),
        k_rad=k_rad,
        k_tan=k_tan,
        fp=point.fp,
        fpp=fpp,
        w=point.w if warped else None,
        wp=point.wp if warped else None,
        c0=c0,
        n_flat=point.n_flat,
    )


def curvature_from_point(
    point: RadialPoint,
    wpp: float,
    fpp: float,
    *,
    fppp: float | None = None,
    c0: float = 1.0,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> GeometryFrame:
    """Warped-product curvature at a point away from the origin.

    ``Rp`` is filled from the soliton relation ∇R = -2 Ric(∇f), i.e.
    ``-2·fpp·fp``.  When ``fppp`` is supplied, ``Rpp`` and ``lapR`` are
    filled as well; otherwise they are NaN.

    Raises
    ------
    DimensionError
        If ``n < 3``.
    OriginLimitError
        If ``w <= 0`` or ``r`` is below the switch radius.
    """
    if point.n < 3:
        raise DimensionError(f"warped-product curvature needs n >= 3, got {point.n}")
    if not (math.isfinite(wpp) and math.isfinite(fpp)):
        raise DomainError(f"non-finite second derivatives at r={point.r!r}")
    _check_chart(point, switch_radius)

    w, wp = point.w, point.wp
    k_rad = -wpp / w
    k_tan = (1.0 - wp * wp) / (w * w)

    Rpp = lapR = math.nan
    if fppp is not None:
        Rpp = -2.0 * (fpp * fpp + point.fp * fppp)
        lapR = laplacian_radial(-2.0 * fpp * point.fp, Rpp, point, switch_radius=switch_radius)

    return frame_from_curvatures(
        point, k_rad=k_rad, k_tan=k_tan, fpp=fpp, Rpp=Rpp, lapR=lapR, c0=c0
    )


def scalar_curvature(
    w: ArrayLike, wp: ArrayLike, wpp: ArrayLike, n: int
) -> NDArray[np.float64]:
    """Vectorised R = 2(n-1)(-w''/w) + (n-1)(n-2)(1-w'²)/w² (requires w > 0)."""
    w_a = np.asarray(w, dtype=float)
    wp_a = np.asarray(wp, dtype=float)
    wpp_a = np.asarray(wpp, dtype=float)
    return 2 * (n - 1) * (-wpp_a / w_a) + (n - 1) * (n - 2) * (1.0 - wp_a**2) / w_a**2


# ---------------------------------------------------------------------------
# Differential operators on radial quantities
# ---------------------------------------------------------------------------


def _mean_curvature(point: RadialPoint, switch_radius: float) -> float:
    if point.mult == 0:
        return 0.0
    _check_chart(point, switch_radius)
    return point.mult * point.wp / point.w


def laplacian_radial(
    qp: float,
    qpp: float,
    point: RadialPoint,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> float:
    """Δq = q'' + (n-1)(w'/w) q' for a radial scalar q.

    At the origin the caller must use the limit ``n·q''(0)`` instead.
    """
    if not (math.isfinite(qp) and math.isfinite(qpp)):
        raise DomainError(f"non-finite derivatives at r={point.r!r}")
    return qpp + _mean_curvature(point, switch_radius) * qp


def divergence_radial(
    v: float,
    vp: float,
    point: RadialPoint,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> float:
    """div(v ∂_r) = v' + (n-1)(w'/w) v."""
    if not (math.isfinite(v) and math.isfinite(vp)):
        raise DomainError(f"non-finite field at r={point.r!r}")
    return vp + _mean_curvature(point, switch_radius) * v


def sphere_flux(q: float, point: RadialPoint) -> float:
    """Integral of the radial scalar q over the distance sphere at ``point.r``."""
    if q < 0:
        raise DomainError(f"flux integrand must be >= 0, got {q!r}")
    mult = point.mult
    return sphere_volume(mult) * point.w**mult * q


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


def rescale_metric(frame: GeometryFrame, lam: float) -> GeometryFrame:
    """Frame of the soliton ``(λ g, f)``.

    The Ricci (0,2)-tensor is scale invariant, so its eigenvalues with respect
    to λg, like all sectional curvatures and R, scale by 1/λ.  Distances scale
    by √λ, hence |∇f| by 1/√λ and R + |∇f|² by 1/λ.
    """
    if not lam > 0:
        raise DomainError(f"scale factor must be positive, got {lam!r}")
    s = math.sqrt(lam)
    return replace(
        frame,
        r=frame.r * s,
        R=frame.R / lam,
        Rp=frame.Rp / (lam * s),
        Rpp=frame.Rpp / lam**2,
        lapR=frame.lapR / lam**2,
        ric_rad=frame.ric_rad / lam,
        ric_tan=frame.ric_tan / lam,
        ric_norm_sq=frame.ric_norm_sq / lam**2,
        rm_norm=frame.rm_norm / lam,
        grad_f_norm=frame.grad_f_norm / s,
        k_rad=frame.k_rad / lam,
        k_tan=frame.k_tan / lam,
        fp=frame.fp / s,
        fpp=frame.fpp / lam,
        w=None if frame.w is None else frame.w * s,
        c0=frame.c0 / lam,
    )
