"""Closed-form steady solitons used as exact ground truth.

* Hamilton's cigar ``(dx² + dy²)/(1 + x² + y²)``, optionally times flat ℝ^k.
  In geodesic polar coordinates ρ = sinh s, w = tanh s and, with the
  outward-increasing sign convention used throughout, f = 2 log cosh s.
* Flat ℝⁿ with constant potential, and ℝ^{n-1} × ℝ with linear potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Protocol

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionError, DomainError, FitError
from .fitting import fit_exponential
from .radial_geometry import GeometryFrame, RadialPoint, frame_from_curvatures, rescale_metric

__all__ = [
    "SolitonSource",
    "CigarPoint",
    "CigarSoliton",
    "FlatSoliton",
    "cigar_frame",
    "cigar_frame_at_distance",
    "cigar_decay_exponent",
    "flat_soliton_frame",
]


class SolitonSource(Protocol):
    """Anything that can produce a GeometryFrame at a geodesic radius."""

    n: int

    @property
    def c0(self) -> float: ...

    @property
    def r_max(self) -> float: ...

    def frame_at(self, r: float) -> GeometryFrame: ...


# ---------------------------------------------------------------------------
# Cigar
# ---------------------------------------------------------------------------


class CigarPoint(NamedTuple):
    rho: float
    s: float
    k_extra: int
    frame: GeometryFrame


def _cigar(s: float, tanh_s: float, sech2: float, k_extra: int) -> GeometryFrame:
    """Frame of the unnormalised cigar (R + |∇f|² = 4) at distance s."""
    if k_extra < 0:
        raise DimensionError(f"flat factor count must be >= 0, got {k_extra}")
    K = 2.0 * sech2
    fp = 2.0 * tanh_s
    Rpp = 16.0 * sech2 * tanh_s * tanh_s - 8.0 * sech2 * sech2
    lapR = Rpp - 8.0 * sech2 * sech2
    point = RadialPoint(r=s, w=tanh_s, wp=sech2, fp=fp, n=2 + k_extra, n_flat=k_extra)
    return frame_from_curvatures(
        point, k_rad=K, k_tan=0.0, fpp=K, Rpp=Rpp, lapR=lapR, c0=4.0
    )


def cigar_frame(rho: float, k_extra: int = 0) -> CigarPoint:
    """Cigar (× ℝ^k_extra) at conformal radius ρ.

    R = 4/(1+ρ²), |∇f| = 2ρ/√(1+ρ²), |∇R| = R·|∇f|.
    """
    if rho < 0 or not math.isfinite(rho):
        raise DomainError(f"conformal radius must be finite and >= 0, got {rho!r}")
    q = 1.0 / (1.0 + rho * rho)
    t = rho * math.sqrt(q)
    s = math.asinh(rho)
    return CigarPoint(rho=rho, s=s, k_extra=k_extra, frame=_cigar(s, t, q, k_extra))


def cigar_frame_at_distance(s: float, k_extra: int = 0) -> GeometryFrame:
    """Cigar frame at geodesic distance s from the tip; stable for large s."""
    if s < 0 or not math.isfinite(s):
        raise DomainError(f"geodesic distance must be finite and >= 0, got {s!r}")
    e = math.exp(-2.0 * s)
    sech2 = 4.0 * e / (1.0 + e) ** 2
    return _cigar(s, math.tanh(s), sech2, k_extra)


@dataclass(frozen=True)
class CigarSoliton:
    """Cigar × ℝ^k_extra with metric scaled by ``scale`` (4 gives c0 = 1)."""

    k_extra: int = 0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.k_extra < 0:
            raise DimensionError(f"flat factor count must be >= 0, got {self.k_extra}")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale!r}")

    @property
    def n(self) -> int:
        return 2 + self.k_extra

    @property
    def c0(self) -> float:
        return 4.0 / self.scale

    @property
    def r_max(self) -> float:
        return math.inf

    def frame_at(self, r: float) -> GeometryFrame:
        frame = cigar_frame_at_distance(r / math.sqrt(self.scale), self.k_extra)
        if self.scale == 1.0:
            return frame
        scaled = rescale_metric(frame, self.scale)
        return GeometryFrame(**{**scaled.__dict__, "r": r})


def cigar_decay_exponent(
    samples: ArrayLike,
    values: ArrayLike | None = None,
    *,
    scale: float = 1.0,
) -> float:
    """Slope of log R against the cigar's geodesic distance s.

    ``values`` defaults to the cigar's own R at ``samples``, divided by
    ``scale`` (the curvature of the cigar rescaled by that factor); pass
    other values (e.g. a flat soliton's constant R) to fit them instead.
    The closed form R = 4 sech² s gives −2 asymptotically.
    """
    s = np.asarray(samples, dtype=float)
    if s.size < 8:
        raise FitError(f"need at least 8 samples, got {s.size}")
    if np.any(np.diff(s) <= 0):
        raise FitError("samples must be strictly increasing")
    if s[-1] - s[0] < 2.0:
        raise FitError("samples must span at least two e-foldings of distance")
    if values is None:
        v = np.array([cigar_frame_at_distance(float(x)).R for x in s]) / scale
    else:
        v = np.asarray(values, dtype=float)
    return fit_exponential(s, v).slope


# ---------------------------------------------------------------------------
# Flat solitons
# ---------------------------------------------------------------------------


def flat_soliton_frame(n: int, linear: bool = False, r: float = 0.0) -> GeometryFrame:
    """Frame of a flat steady soliton.

    ``linear=False``: Euclidean ℝⁿ (w = r) with constant f, so c0 = 0.
    ``linear=True``: ℝ^{n-1} × ℝ with f equal to the line coordinate, so
    |∇f| = 1 and c0 = 1; there is no warping function.
    """
    if n < 2:
        raise DimensionError(f"dimension must be >= 2, got {n}")
    if linear:
        point = RadialPoint(r=r, w=1.0, wp=0.0, fp=1.0, n=n, n_flat=n - 1)
        return frame_from_curvatures(
            point, k_rad=0.0, k_tan=0.0, fpp=0.0, Rpp=0.0, lapR=0.0, c0=1.0, warped=False
        )
    point = RadialPoint(r=r, w=r, wp=1.0, fp=0.0, n=n)
    return frame_from_curvatures(
        point, k_rad=0.0, k_tan=0.0, fpp=0.0, Rpp=0.0, lapR=0.0, c0=0.0
    )


@dataclass(frozen=True)
class FlatSoliton:
    n: int
    linear: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DimensionError(f"dimension must be >= 2, got {self.n}")

    @property
    def c0(self) -> float:
        return 1.0 if self.linear else 0.0

    @property
    def r_max(self) -> float:
        return math.inf

    def frame_at(self, r: float) -> GeometryFrame:
        return flat_soliton_frame(self.n, self.linear, r)
