"""Bryant soliton construction.

The steady soliton equation Ric = Hess f on ``dr² + w² g_{S^{n-1}}`` reduces to

    w''  = (n-2)(1 - w'²)/w - f' w'      (sphere directions)
    f''  = -(n-1) w''/w                  (radial direction)

which is singular at r = 0.  The solution is seeded from its Taylor series at
a small switch radius r₀ and continued with an adaptive embedded Runge–Kutta
pair.  Sign convention: f' ≥ 0 (f increases outward).

Normalisation: R(0) = c0, so the first integral R + f'² equals c0 (1 by
default).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    DimensionError,
    DomainError,
    IntegrationStallError,
    MonotonicityError,
    OriginLimitError,
    ProfileFormatError,
    RangeError,
)
from .fitting import fit_power_law, last_decade
from .radial_geometry import (
    DEFAULT_SWITCH_RADIUS,
    GeometryFrame,
    RadialPoint,
    curvature_from_point,
    frame_from_curvatures,
    rescale_metric,
    scalar_curvature,
    sphere_volume,
)

__all__ = [
    "SeriesCoefficients",
    "DenseState",
    "RadialProfile",
    "VolumeGrowth",
    "exact_series_coefficients",
    "series_coefficients",
    "series_seed",
    "series_frame",
    "soliton_rhs",
    "third_derivatives",
    "solve_bryant",
    "frame_at",
    "volume_growth",
]

log = logging.getLogger("soliton_lab.bryant_solver")

TOL_MIN = 1e-14
TOL_MAX = 1e-4
DEFAULT_MAX_STEP = 0.01


# ---------------------------------------------------------------------------
# Series at the origin
# ---------------------------------------------------------------------------


class SeriesCoefficients(NamedTuple):
    """Taylor data of the normalised solution.

    w = r + a3 r³ + a5 r⁵,  f' = b1 r + b3 r³ + b5 r⁵.  ``a7`` is the next
    coefficient of w; it is only needed to fix ``b5``.
    """

    a3: float
    a5: float
    a7: float
    b1: float
    b3: float
    b5: float


@lru_cache(maxsize=None)
def exact_series_coefficients(n: int) -> tuple[Fraction, ...]:
    """Exact (a3, a5, a7, b1, b3, b5) from matching powers of r in the ODE system."""
    if n < 3:
        raise DimensionError(f"Bryant soliton needs n >= 3, got {n}")
    N = Fraction(n)
    b1 = 1 / N
    a3 = -b1 / (6 * (N - 1))
    a5 = 3 * (13 * N - 10) * a3**2 / (10 * (N + 2))
    b3 = -(N - 1) * (20 * a5 - 6 * a3**2) / 3
    rhs = (
        (N - 2) * (3 * a3**3 - 14 * a3 * a5)
        - 5 * a5 * b1
        - 3 * a3 * b3
        - (N + 1) / 3 * (26 * a3 * a5 - 6 * a3**3)
    )
    b5 = -3 * (N - 1) * rhs / (2 * (N + 4))
    a7 = (-5 * b5 / (N - 1) + 26 * a3 * a5 - 6 * a3**3) / 42
    return a3, a5, a7, b1, b3, b5


@lru_cache(maxsize=None)
def series_coefficients(n: int) -> SeriesCoefficients:
    """Coefficients in floating point."""
    return SeriesCoefficients(*(float(c) for c in exact_series_coefficients(n)))


class DenseState(NamedTuple):
    w: float
    wp: float
    fp: float
    wpp: float
    fpp: float


def series_seed(
    n: int,
    r: float,
    *,
    c0: float = 1.0,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> DenseState:
    """Degree-5 Taylor data (w, w', f', w'', f'') at a small radius."""
    if not 0 <= r <= switch_radius:
        raise RangeError(f"series is only used on [0, {switch_radius!r}], got r={r!r}")
    c = series_coefficients(n)
    s = math.sqrt(c0)
    x = s * r
    x2 = x * x
    w = x * (1 + c.a3 * x2 + c.a5 * x2 * x2)
    wp = 1 + 3 * c.a3 * x2 + 5 * c.a5 * x2 * x2
    wpp = x * (6 * c.a3 + 20 * c.a5 * x2)
    fp = x * (c.b1 + c.b3 * x2 + c.b5 * x2 * x2)
    fpp = c.b1 + 3 * c.b3 * x2 + 5 * c.b5 * x2 * x2
    return DenseState(w=w / s, wp=wp, fp=s * fp, wpp=s * wpp, fpp=c0 * fpp)


def series_frame(
    n: int,
    r: float,
    *,
    c0: float = 1.0,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> GeometryFrame:
    """Frame near the origin, using series ratios so nothing divides by w.

    At r = 0 this gives the umbilic limits R = c0, Ric = (c0/n) g and
    ΔR = n·R''(0).
    """
    state = series_seed(n, r, c0=c0, switch_radius=switch_radius)
    c = series_coefficients(n)
    x = math.sqrt(c0) * r
    x2 = x * x
    w_over_x = 1 + c.a3 * x2 + c.a5 * x2 * x2
    k_rad = -(6 * c.a3 + 20 * c.a5 * x2) / w_over_x
    k_tan = -(3 * c.a3 + 5 * c.a5 * x2) * (2 + 3 * c.a3 * x2 + 5 * c.a5 * x2 * x2) / w_over_x**2
    fp_over_w = (c.b1 + c.b3 * x2 + c.b5 * x2 * x2) / w_over_x

    fp = x * (c.b1 + c.b3 * x2 + c.b5 * x2 * x2)
    wp = 1 + 3 * c.a3 * x2 + 5 * c.a5 * x2 * x2
    fpp = c.b1 + 3 * c.b3 * x2 + 5 * c.b5 * x2 * x2
    fppp = x * (6 * c.b3 + 20 * c.b5 * x2)
    Rpp = -2.0 * (fpp * fpp + fp * fppp)
    lapR = Rpp - 2.0 * (n - 1) * wp * fpp * fp_over_w

    point = RadialPoint(r=x, w=x * w_over_x, wp=wp, fp=fp, n=n)
    frame = frame_from_curvatures(
        point, k_rad=k_rad, k_tan=k_tan, fpp=fpp, Rpp=Rpp, lapR=lapR, c0=1.0
    )
    if c0 == 1.0:
        return frame
    scaled = rescale_metric(frame, 1.0 / c0)
    # keep the caller's radius bit-exact
    return GeometryFrame(**{**scaled.__dict__, "r": r, "w": state.w})


# ---------------------------------------------------------------------------
# Reduced ODE
# ---------------------------------------------------------------------------


def _rhs(w: Any, wp: Any, fp: Any, n: int) -> tuple[Any, Any]:
    wpp = (n - 2) * (1.0 - wp * wp) / w - fp * wp
    fpp = -(n - 1) * wpp / w
    return wpp, fpp


def third_derivatives(
    w: float, wp: float, fp: float, wpp: float, fpp: float, n: int
) -> tuple[float, float]:
    wppp = (n - 2) * (-2.0 * wp * wpp / w - (1.0 - wp * wp) * wp / (w * w)) - fpp * wp - fp * wpp
    fppp = -(n - 1) * (wppp * w - wpp * wp) / (w * w)
    return wppp, fppp


def soliton_rhs(state: tuple[float, float, float], n: int) -> tuple[float, float, float]:
    """Right-hand side (w', w'', f'') of the reduced soliton system."""
    w, wp, fp = state
    if not w > 0:
        raise OriginLimitError(f"w={w!r} <= 0: use series_seed near the origin")
    wpp, fpp = _rhs(w, wp, fp, n)
    return wp, wpp, fpp


# ---------------------------------------------------------------------------
# Profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Integrated Bryant solution; immutable and safe for concurrent reads."""

    n: int
    c0: float
    grid: NDArray[np.float64]
    w: NDArray[np.float64]
    wp: NDArray[np.float64]
    fp: NDArray[np.float64]
    switch_radius: float = DEFAULT_SWITCH_RADIUS
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)
    _spline: CubicHermiteSpline | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_table(
        cls,
        n: int,
        grid: NDArray[np.float64],
        w: NDArray[np.float64],
        wp: NDArray[np.float64],
        fp: NDArray[np.float64],
        *,
        c0: float = 1.0,
        switch_radius: float = DEFAULT_SWITCH_RADIUS,
        metadata: dict[str, Any] | None = None,
    ) -> "RadialProfile":
        """Build the dense evaluator from sampled (w, w', f').

        Rows below the switch radius are kept in the table but the
        interpolant only uses rows at or beyond it; the series covers the rest.
        """
        if n < 3:
            raise DimensionError(f"Bryant soliton needs n >= 3, got {n}")
        grid = np.asarray(grid, dtype=float)
        w, wp, fp = (np.asarray(a, dtype=float) for a in (w, wp, fp))
        if not (grid.shape == w.shape == wp.shape == fp.shape) or grid.ndim != 1:
            raise ProfileFormatError("profile columns must be aligned one-dimensional arrays")
        if np.any(np.diff(grid) <= 0):
            raise ProfileFormatError("profile radii must be strictly increasing")
        outer = grid >= switch_radius
        if outer.sum() < 2:
            raise ProfileFormatError("profile needs at least two rows beyond the switch radius")
        if np.any(w[outer] <= 0):
            raise ProfileFormatError("w must be positive beyond the switch radius")

        wpp, fpp = _rhs(w[outer], wp[outer], fp[outer], n)
        y = np.column_stack([w[outer], wp[outer], fp[outer]])
        dydr = np.column_stack([wp[outer], wpp, fpp])
        spline = CubicHermiteSpline(grid[outer], y, dydr)
        return cls(
            n=n,
            c0=c0,
            grid=grid,
            w=w,
            wp=wp,
            fp=fp,
            switch_radius=switch_radius,
            metadata=dict(metadata or {}),
            _spline=spline,
        )

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    def dense_eval(self, r: float) -> DenseState:
        """(w, w', f', w'', f'') at any r in [0, r_max]."""
        self._check_range(r)
        if r < self.switch_radius:
            return series_seed(self.n, r, c0=self.c0, switch_radius=self.switch_radius)
        assert self._spline is not None
        w, wp, fp = (float(v) for v in self._spline(r))
        wpp, fpp = _rhs(w, wp, fp, self.n)
        return DenseState(w, wp, fp, wpp, fpp)

    def frame_at(self, r: float) -> GeometryFrame:
        return frame_at(self, r)

    def _check_range(self, r: float) -> None:
        if not 0 <= r <= self.r_max:
            raise RangeError(f"r={r!r} outside profile range [0, {self.r_max!r}]")


def frame_at(profile: RadialProfile, r: float) -> GeometryFrame:
    """Full GeometryFrame of the profile at radius r.

    Below the switch radius the series limits are used; above it the dense
    state is passed through the warped-product curvature formulas.
    """
    profile._check_range(r)
    if r < profile.switch_radius:
        return series_frame(profile.n, r, c0=profile.c0, switch_radius=profile.switch_radius)
    s = profile.dense_eval(r)
    _, fppp = third_derivatives(s.w, s.wp, s.fp, s.wpp, s.fpp, profile.n)
    point = RadialPoint(r=r, w=s.w, wp=s.wp, fp=s.fp, n=profile.n)
    return curvature_from_point(
        point,
        s.wpp,
        s.fpp,
        fppp=fppp,
        c0=profile.c0,
        switch_radius=profile.switch_radius,
    )


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


def _validate(n: int, r_max: float, tol: float, c0: float, switch_radius: float) -> None:
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise DimensionError(
            f"Bryant soliton needs an integer n >= 3, got {n!r}; use the cigar for n = 2"
        )
    if not TOL_MIN <= tol <= TOL_MAX:
        raise RangeError(f"tolerance {tol!r} outside [{TOL_MIN}, {TOL_MAX}]")
    if not r_max > switch_radius:
        raise RangeError(f"r_max={r_max!r} must exceed the switch radius {switch_radius!r}")
    if not c0 > 0:
        raise DomainError(f"normalisation constant must be positive, got {c0!r}")


def _check_envelope(
    t: NDArray[np.float64], y: NDArray[np.float64], c0: float, slack: float
) -> None:
    w, wp, fp = y
    bad = (w <= 0) | (wp <= 0) | (wp > 1 + slack) | (fp < -slack) | (fp >= math.sqrt(c0) + slack)
    if np.any(bad):
        i = int(np.argmax(bad))
        msg = (
            f"state left the Bryant envelope at r={t[i]!r}: "
            f"w={w[i]!r}, wp={wp[i]!r}, fp={fp[i]!r}"
        )
        log.error(msg)
        raise MonotonicityError(msg)


def solve_bryant(
    n: int,
    r_max: float = 100.0,
    tol: float = 1e-10,
    *,
    c0: float = 1.0,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
    max_step: float = DEFAULT_MAX_STEP,
    method: str = "DOP853",
) -> RadialProfile:
    """Integrate the Bryant soliton from the origin to ``r_max``.

    Parameters
    ----------
    n : int
        Dimension, n >= 3.
    r_max : float
        Outer radius of the profile.
    tol : float
        Per-step relative tolerance of the embedded error estimate,
        within [1e-14, 1e-4].
    c0 : float, default 1.0
        Value of the first integral R + |∇f|².
    switch_radius : float
        Hand-off radius between the Taylor series and the integrator.
    max_step : float
        Step cap; keeps the cubic dense output accurate between steps.
    method : str
        Any explicit embedded pair accepted by ``scipy.integrate.solve_ivp``.

    Raises
    ------
    DimensionError, RangeError
        Invalid inputs.
    IntegrationStallError
        Step size underflow; carries the last good radius.
    MonotonicityError
        w', f' left their admissible ranges.
    """
    _validate(n, r_max, tol, c0, switch_radius)
    seed = series_seed(n, switch_radius, c0=c0, switch_radius=switch_radius)

    def fun(_r: float, y: NDArray[np.float64]) -> list[float]:
        wpp, fpp = _rhs(y[0], y[1], y[2], n)
        return [y[1], wpp, fpp]

    sol = solve_ivp(
        fun,
        (switch_radius, r_max),
        [seed.w, seed.wp, seed.fp],
        method=method,
        rtol=tol,
        atol=tol * 1e-2,
        max_step=max_step,
    )
    if sol.status < 0:
        last_r = float(sol.t[-1])
        log.error("integration stalled at r=%.6g: %s", last_r, sol.message)
        raise IntegrationStallError(f"integration stalled at r={last_r!r}: {sol.message}", last_r)

    _check_envelope(sol.t, sol.y, c0, slack=100 * tol)

    grid = np.concatenate([[0.0], sol.t])
    w = np.concatenate([[0.0], sol.y[0]])
    wp = np.concatenate([[1.0], sol.y[1]])
    fp = np.concatenate([[0.0], sol.y[2]])

    wpp, _ = _rhs(sol.y[0], sol.y[1], sol.y[2], n)
    R = scalar_curvature(sol.y[0], sol.y[1], wpp, n)
    drift = float(np.max(np.abs(R + sol.y[2] ** 2 - c0)))

    metadata: dict[str, Any] = {
        "n": n,
        "c0": c0,
        "c0_drift": drift,
        "r_max": r_max,
        "tol": tol,
        "switch_radius": switch_radius,
        "steps": int(sol.t.size - 1),
        "decay_exponent": None,
        "decay_constant": None,
    }
    tail = last_decade(sol.t)
    if tail.sum() >= 8 and np.all(R[tail] > 0):
        fit = fit_power_law(sol.t[tail], R[tail])
        metadata["decay_exponent"] = fit.slope
        metadata["decay_constant"] = math.exp(fit.intercept)

    log.info(
        "Bryant n=%d integrated to r=%.6g in %d steps, conservation drift %.3e",
        n,
        r_max,
        metadata["steps"],
        drift,
    )
    return RadialProfile.from_table(
        n, grid, w, wp, fp, c0=c0, switch_radius=switch_radius, metadata=metadata
    )


# ---------------------------------------------------------------------------
# Volume growth
# ---------------------------------------------------------------------------


class VolumeGrowth(NamedTuple):
    radii: NDArray[np.float64]
    volume: NDArray[np.float64]
    exponent: float


def volume_growth(profile: RadialProfile) -> VolumeGrowth:
    """Geodesic-ball volume V(r) = ∫₀^r ω_{n-1} w^{n-1} and its log-log slope."""
    area = sphere_volume(profile.n - 1) * profile.w ** (profile.n - 1)
    volume = cumulative_trapezoid(area, profile.grid, initial=0.0)
    tail = last_decade(profile.grid) & (volume > 0)
    fit = fit_power_law(profile.grid[tail], volume[tail])
    return VolumeGrowth(profile.grid, volume, fit.slope)
