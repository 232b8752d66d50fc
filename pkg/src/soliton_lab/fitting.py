"""Least-squares line fits in log-log and semi-log coordinates."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import FitError

__all__ = ["LineFit", "fit_line", "fit_power_law", "fit_exponential", "last_decade"]

MIN_FIT_POINTS = 8


class LineFit(NamedTuple):
    slope: float
    intercept: float
    rms: float
    count: int


def fit_line(x: ArrayLike, y: ArrayLike, *, min_points: int = MIN_FIT_POINTS) -> LineFit:
    """Ordinary least squares ``y ≈ slope·x + intercept``."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise FitError("fit arrays must be one-dimensional and aligned")
    if xa.size < min_points:
        raise FitError(f"need at least {min_points} points, got {xa.size}")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise FitError("non-finite values in fit input")
    if np.ptp(xa) == 0:
        raise FitError("degenerate sample range")
    slope, intercept = np.polyfit(xa, ya, 1)
    resid = ya - (slope * xa + intercept)
    return LineFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), int(xa.size))


def _positive(y: NDArray[np.float64]) -> None:
    if np.any(y <= 0):
        raise FitError("values must be positive for a logarithmic fit")


def fit_power_law(x: ArrayLike, y: ArrayLike, *, min_points: int = MIN_FIT_POINTS) -> LineFit:
    """Fit ``log y ≈ a·log x + b``; ``slope`` is the decay exponent a."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    _positive(xa)
    _positive(ya)
    return fit_line(np.log(xa), np.log(ya), min_points=min_points)


def fit_exponential(x: ArrayLike, y: ArrayLike, *, min_points: int = MIN_FIT_POINTS) -> LineFit:
    """Fit ``log y ≈ a·x + b``; ``slope`` is the exponential rate a."""
    ya = np.asarray(y, dtype=float)
    _positive(ya)
    return fit_line(np.asarray(x, dtype=float), np.log(ya), min_points=min_points)


def last_decade(x: ArrayLike) -> NDArray[np.bool_]:
    """Mask selecting samples within one decade of the largest abscissa."""
    xa = np.asarray(x, dtype=float)
    return xa >= xa.max() / 10.0
