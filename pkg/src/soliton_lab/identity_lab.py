"""Pointwise soliton identities and their residuals.

Every identity is written as a list of left-hand and right-hand terms so the
relative residual can be scaled by the largest term on either side.  All
occurrences of ``1 - R`` (more generally ``c0 - R``) are written as ``fp²``;
with that substitution the identities hold for any value of the first
integral, not only the normalised one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel

from .errors import DimensionError, OriginLimitError, SolitonLabError
from .exact_solitons import SolitonSource
from .radial_geometry import (
    DEFAULT_SWITCH_RADIUS,
    GeometryFrame,
    divergence_radial,
    laplacian_radial,
)
from .spec import IdentityName

__all__ = [
    "Residual",
    "IdentityReport",
    "IdentitySummary",
    "VerificationSummary",
    "DEFAULT_TOLERANCES",
    "RELATIVE_FLOOR",
    "first_integral_residual",
    "gradR_ric_residual",
    "bianchi_traced_residual",
    "d_tensor_norm_sq",
    "lemma23_residual",
    "lemma24_residual",
    "trace_soliton_residual",
    "brendle_form_residual",
    "potential_divergence_residual",
    "evaluate_identities",
    "default_radii",
    "verify_profile",
    "summarize",
]

log = logging.getLogger("soliton_lab.identity_lab")

RELATIVE_FLOOR = 1e-300

DEFAULT_TOLERANCES: dict[IdentityName, float] = {
    IdentityName.FIRST_INTEGRAL: 1e-8,
    IdentityName.GRADR_RIC: 1e-8,
    IdentityName.BIANCHI_TRACED: 1e-6,
    IdentityName.D_TENSOR_NORM: 1e-8,
    IdentityName.LEMMA23: 1e-6,
    IdentityName.LEMMA24: 1e-5,
    IdentityName.TRACE_SOLITON: 1e-6,
    IdentityName.BRENDLE_FORM: 1e-6,
    IdentityName.POTENTIAL_DIVERGENCE: 1e-6,
}


class Residual(NamedTuple):
    abs: float
    rel: float
    scale: float


class _Terms(NamedTuple):
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    extra_scale: float = 0.0

    def residual(self) -> Residual:
        value = math.fsum(self.lhs) - math.fsum(self.rhs)
        scale = max((abs(t) for t in self.lhs + self.rhs), default=0.0)
        scale = max(scale, self.extra_scale)
        return Residual(abs(value), abs(value) / max(scale, RELATIVE_FLOOR), scale)


def _fp(frame: GeometryFrame, fp: float | None) -> float:
    return frame.fp if fp is None else fp


def _require_d_tensor_dim(frame: GeometryFrame) -> None:
    if frame.n < 3:
        raise DimensionError(f"identity divides by n-2; needs n >= 3, got {frame.n}")


# ---------------------------------------------------------------------------
# Basic soliton relations
# ---------------------------------------------------------------------------


def _first_integral_terms(frame: GeometryFrame, fp: float | None = None) -> _Terms:
    g = _fp(frame, fp)
    return _Terms((frame.R, g * g), (frame.c0,))


def first_integral_residual(frame: GeometryFrame, fp: float | None = None) -> float:
    """R + |∇f|² − c0."""
    t = _first_integral_terms(frame, fp)
    return math.fsum(t.lhs) - math.fsum(t.rhs)


def _gradR_ric_terms(frame: GeometryFrame, fp: float | None = None) -> _Terms:
    return _Terms((frame.Rp,), (-2.0 * frame.ric_rad * _fp(frame, fp),))


def gradR_ric_residual(frame: GeometryFrame, fp: float | None = None) -> float:
    """∇R + 2 Ric(∇f), radial component."""
    return frame.Rp + 2.0 * frame.ric_rad * _fp(frame, fp)


def _bianchi_terms(frame: GeometryFrame, fp: float | None = None) -> _Terms:
    return _Terms((2.0 * frame.ric_norm_sq, frame.Rp * _fp(frame, fp), frame.lapR), (0.0,))


def bianchi_traced_residual(frame: GeometryFrame, fp: float | None = None) -> float:
    """2|Ric|² + ⟨∇R, ∇f⟩ + ΔR (zero on any steady soliton)."""
    return 2.0 * frame.ric_norm_sq + frame.Rp * _fp(frame, fp) + frame.lapR


# ---------------------------------------------------------------------------
# D-tensor and its integral-identity forms
# ---------------------------------------------------------------------------


def d_tensor_norm_sq(frame: GeometryFrame, fp: float | None = None) -> float:
    """|D|² for radial data.

    The independent components are D_rθθ for sphere directions θ and D_rζζ
    for flat-factor directions ζ, each appearing twice with opposite sign.
    """
    _require_d_tensor_dim(frame)
    n = frame.n
    g = _fp(frame, fp)
    common = (frame.Rp + 2.0 * frame.R * g) / (2.0 * (n - 1) * (n - 2))
    d_sphere = -frame.ric_tan * g / (n - 2) + common
    d_flat = common
    return 2.0 * (frame.tangential_mult * d_sphere**2 + frame.n_flat * d_flat**2)


def _d_tensor_terms(frame: GeometryFrame) -> _Terms:
    # |D| against |Ric|·|∇f|
    size = math.sqrt(frame.ric_norm_sq) * abs(frame.fp)
    return _Terms((math.sqrt(d_tensor_norm_sq(frame)),), (0.0,), size)


def _gradient_combo_sq(frame: GeometryFrame, g: float) -> float:
    return (frame.Rp + 2.0 * frame.R * g) ** 2


def _lemma23_terms(frame: GeometryFrame, fp: float | None = None) -> _Terms:
    _require_d_tensor_dim(frame)
    n = frame.n
    g = _fp(frame, fp)
    g2 = g * g
    k = (n - 2) ** 2
    lhs = (
        d_tensor_norm_sq(frame, g),
        _gradient_combo_sq(frame, g) / (2.0 * (n - 1) * k),
    )
    rhs = (
        -g2 / k * frame.lapR,
        -g2 / k * frame.Rp * g,
        -frame.Rp**2 / (2.0 * k),
    )
    return _Terms(lhs, rhs)


def lemma23_residual(frame: GeometryFrame, fp: float | None = None) -> float:
    """|D|² + |∇R+2R∇f|²/(2(n-1)(n-2)²) minus its expression through ΔR and ∇R."""
    t = _lemma23_terms(frame, fp)
    return math.fsum(t.lhs) - math.fsum(t.rhs)


def _lemma24_terms(
    frame: GeometryFrame,
    fp: float | None = None,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> _Terms:
    _require_d_tensor_dim(frame)
    g = _fp(frame, fp)
    if g == 0:
        raise OriginLimitError(f"|∇f| = 0 at r={frame.r!r}: the weighted divergence is 0 = 0 there")
    n = frame.n
    Y = frame.Rp / g - 2.0 * g * g
    Yp = (frame.Rpp * g - frame.Rp * frame.fpp) / (g * g) - 4.0 * g * frame.fpp
    divY = divergence_radial(Y, Yp, frame.radial_point(), switch_radius=switch_radius)
    lhs = (
        g**3 * divY,
        (n - 2) ** 2 * d_tensor_norm_sq(frame, g),
        _gradient_combo_sq(frame, g) / (2.0 * (n - 1)),
        2.0 * frame.R * g**4,
    )
    return _Terms(lhs, (0.0,))


def lemma24_residual(
    frame: GeometryFrame,
    fp: float | None = None,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> float:
    """|∇f|³ div(∇R/|∇f| − 2|∇f|∇f) + (n-2)²|D|² + |∇R+2R∇f|²/(2(n-1)) + 2R|∇f|⁴.

    Raises
    ------
    OriginLimitError
        At the origin, where |∇f| = 0 and the field is singular.
    """
    return math.fsum(_lemma24_terms(frame, fp, switch_radius=switch_radius).lhs)


# ---------------------------------------------------------------------------
# Supplementary identities
# ---------------------------------------------------------------------------


def _trace_terms(
    frame: GeometryFrame,
    fp: float | None = None,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> _Terms:
    g = _fp(frame, fp)
    lap_f = laplacian_radial(g, frame.fpp, frame.radial_point(), switch_radius=switch_radius)
    return _Terms((lap_f,), (frame.R,))


def trace_soliton_residual(
    frame: GeometryFrame,
    fp: float | None = None,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> float:
    """Δf − R."""
    t = _trace_terms(frame, fp, switch_radius=switch_radius)
    return t.lhs[0] - t.rhs[0]


def _brendle_terms(frame: GeometryFrame, fp: float | None = None) -> _Terms:
    _require_d_tensor_dim(frame)
    n = frame.n
    g = _fp(frame, fp)
    g2 = g * g
    k = (n - 2) ** 2
    grad_dot = frame.Rp * g
    rhs = (
        -g2 * frame.lapR / k,
        -grad_dot / k,
        -n * frame.Rp**2 / (2.0 * (n - 1) * k),
        (n - 3) * frame.R * grad_dot / ((n - 1) * k),
        -2.0 * frame.R**2 * g2 / ((n - 1) * k),
    )
    return _Terms((d_tensor_norm_sq(frame, g),), rhs)


def brendle_form_residual(frame: GeometryFrame, fp: float | None = None) -> float:
    """|D|² minus its expanded form in R, ΔR and ⟨∇R, ∇f⟩.

    The expanded form uses the normalised first integral (c0 = 1).
    """
    t = _brendle_terms(frame, fp)
    return math.fsum(t.lhs) - math.fsum(t.rhs)


def _potential_divergence_terms(
    frame: GeometryFrame,
    fp: float | None = None,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> _Terms:
    g = _fp(frame, fp)
    v = 2.0 * g**3
    vp = 6.0 * g * g * frame.fpp
    div = divergence_radial(v, vp, frame.radial_point(), switch_radius=switch_radius)
    return _Terms((div,), (-2.0 * frame.Rp * g, 2.0 * g * g * frame.R))


def potential_divergence_residual(
    frame: GeometryFrame,
    fp: float | None = None,
    *,
    switch_radius: float = DEFAULT_SWITCH_RADIUS,
) -> float:
    """div(2|∇f|²∇f) + 2⟨∇R, ∇f⟩ − 2|∇f|²R."""
    t = _potential_divergence_terms(frame, fp, switch_radius=switch_radius)
    return math.fsum(t.lhs) - math.fsum(t.rhs)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of every identity at one radius.

    ``limits`` names identities that were not evaluated at this radius and
    why (``"origin"`` or ``"dimension"``); their residual is recorded as 0.
    """

    point: float
    residuals: dict[IdentityName, Residual]
    limits: dict[IdentityName, str] = field(default_factory=dict)

    @property
    def origin_limit(self) -> bool:
        return any(reason == "origin" for reason in self.limits.values())


def _brendle_applicable(frame: GeometryFrame) -> bool:
    return math.isclose(frame.c0, 1.0, rel_tol=0.0, abs_tol=1e-12)


def evaluate_identities(
    frame: GeometryFrame, *, switch_radius: float = DEFAULT_SWITCH_RADIUS
) -> IdentityReport:
    """Evaluate every named identity on one frame."""
    builders: dict[IdentityName, Callable[[], _Terms]] = {
        IdentityName.FIRST_INTEGRAL: lambda: _first_integral_terms(frame),
        IdentityName.GRADR_RIC: lambda: _gradR_ric_terms(frame),
        IdentityName.BIANCHI_TRACED: lambda: _bianchi_terms(frame),
        IdentityName.D_TENSOR_NORM: lambda: _d_tensor_terms(frame),
        IdentityName.LEMMA23: lambda: _lemma23_terms(frame),
        IdentityName.LEMMA24: lambda: _lemma24_terms(frame, switch_radius=switch_radius),
        IdentityName.TRACE_SOLITON: lambda: _trace_terms(frame, switch_radius=switch_radius),
        IdentityName.BRENDLE_FORM: lambda: _brendle_terms(frame),
        IdentityName.POTENTIAL_DIVERGENCE: lambda: _potential_divergence_terms(
            frame, switch_radius=switch_radius
        ),
    }
    residuals: dict[IdentityName, Residual] = {}
    limits: dict[IdentityName, str] = {}
    for name, build in builders.items():
        if name is IdentityName.BRENDLE_FORM and not _brendle_applicable(frame):
            limits[name] = "normalisation"
            residuals[name] = Residual(0.0, 0.0, 0.0)
            continue
        try:
            residuals[name] = build().residual()
        except OriginLimitError:
            limits[name] = "origin"
            residuals[name] = Residual(0.0, 0.0, 0.0)
        except DimensionError:
            limits[name] = "dimension"
            residuals[name] = Residual(0.0, 0.0, 0.0)
    return IdentityReport(point=frame.r, residuals=residuals, limits=limits)


def default_radii(source: SolitonSource, count: int = 64, *, r_min: float = 0.1) -> list[float]:
    """The origin followed by ``count`` log-spaced radii up to min(r_max, 100)."""
    r_hi = min(source.r_max, 100.0)
    grid = np.geomspace(r_min, r_hi, count)
    return [0.0, *(float(r) for r in grid)]


def verify_profile(
    source: SolitonSource,
    radii: Iterable[float],
    *,
    switch_radius: float | None = None,
) -> list[IdentityReport]:
    """Evaluate every identity at each radius of ``source``.

    Errors raised at a radius propagate with that radius prefixed to the
    message.
    """
    sr = switch_radius if switch_radius is not None else getattr(
        source, "switch_radius", DEFAULT_SWITCH_RADIUS
    )
    reports = []
    for r in radii:
        try:
            frame = source.frame_at(r)
            reports.append(evaluate_identities(frame, switch_radius=sr))
        except SolitonLabError as exc:
            exc.args = (f"r={r!r}: {exc}", *exc.args[1:])
            log.error("identity sweep failed at r=%.6g: %s", r, exc)
            raise
    log.info("evaluated %d identities at %d radii", len(IdentityName), len(reports))
    return reports


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


class IdentitySummary(BaseModel):
    identity: str
    max_abs: float
    max_rel: float
    worst_r: float | None
    tolerance: float
    passed: bool


class VerificationSummary(BaseModel):
    source: str
    n: int
    passed: bool
    identities: list[IdentitySummary]
    origin_limits: list[float]


def summarize(
    reports: Sequence[IdentityReport],
    *,
    source: str,
    n: int,
    tolerances: dict[IdentityName, float] | None = None,
) -> VerificationSummary:
    """Worst residual per identity, in report order."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    rows = []
    for name in IdentityName:
        worst_abs = worst_rel = 0.0
        worst_r: float | None = None
        for report in reports:
            res = report.residuals[name]
            if worst_r is None or res.rel > worst_rel:
                worst_abs, worst_rel, worst_r = res.abs, res.rel, report.point
        rows.append(
            IdentitySummary(
                identity=name.value,
                max_abs=worst_abs,
                max_rel=worst_rel,
                worst_r=worst_r,
                tolerance=tol[name],
                passed=worst_rel <= tol[name],
            )
        )
    origin = [rep.point for rep in reports if rep.origin_limit]
    return VerificationSummary(
        source=source,
        n=n,
        passed=all(row.passed for row in rows),
        identities=rows,
        origin_limits=origin,
    )
