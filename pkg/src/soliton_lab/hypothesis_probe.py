"""Probes for the hypotheses of the soliton rigidity theorems.

Nothing here decides whether a hypothesis "holds"; every probe reports
margins, fitted exponents and the radii where a margin changes sign.
Exhaustions are geodesic balls, so boundary integrals become sphere fluxes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

from .bryant_solver import RadialProfile, third_derivatives
from .errors import (
    DimensionError,
    DomainError,
    FitError,
    InversionError,
    OriginLimitError,
    RangeError,
)
from .exact_solitons import SolitonSource
from .fitting import LineFit, fit_exponential, fit_line, fit_power_law, last_decade
from .radial_geometry import GeometryFrame, sphere_flux
from .spec import DecayClass, IntegrandName, validate_integrand

__all__ = [
    "sigma_constant",
    "PinchingProfile",
    "pinching_profile",
    "FluxSeries",
    "flux_series",
    "radial_integrand",
    "PsiTable",
    "reconstruct_psi",
    "brendle_flux",
    "DecayFit",
    "decay_classifier",
]

log = logging.getLogger("soliton_lab.hypothesis_probe")

SIGN_CHANGE_XTOL = 1e-6
PSI_EPSILON = 1e-4
PSI_SAMPLES = 200
QUAD_EPSREL = 1e-10
VANISHING_FLUX = 1e-12
BRENDLE_FLUX_TOL = 1e-6
DECAY_MARGIN = 10.0
SLOPE_DRIFT = 0.25
MARGIN_ROUNDOFF = 1e-12


# ---------------------------------------------------------------------------
# σ(n)
# ---------------------------------------------------------------------------


def sigma_constant(n: int) -> float:
    """σ(n) = ((n+1) + √((n-1)(7n-13))) / (3n-2).

    σ(2) = 1 (cigar equality) and σ increases towards (1+√7)/3.
    """
    if n < 2:
        raise DimensionError(f"sigma is defined for n >= 2, got {n}")
    return ((n + 1) + math.sqrt((n - 1) * (7 * n - 13))) / (3 * n - 2)


# ---------------------------------------------------------------------------
# Pinching margins
# ---------------------------------------------------------------------------

MARGIN_NAMES = (
    "sigma_margin",
    "kato_margin",
    "munteanu_margin",
    "pinch33_margin",
    "ricci_bound_margin",
    "gradient_bound_margin",
)


def _snap(value: float, *terms: float) -> float:
    """Margins within round-off of their terms are reported as exactly 0."""
    size = max(abs(t) for t in terms)
    return 0.0 if abs(value) <= MARGIN_ROUNDOFF * size else value


def _margins(frame: GeometryFrame) -> dict[str, float]:
    """All pinching margins at one frame; ratios by |∇f| are NaN where it vanishes."""
    n = frame.n
    R, Rp, fp = frame.R, frame.Rp, frame.grad_f_norm
    ric_norm = math.sqrt(frame.ric_norm_sq)
    sigma_term = sigma_constant(n) * R * fp
    bound_term = math.sqrt(2.0) * R * fp
    out = {
        "sigma_margin": _snap(abs(Rp) - sigma_term, Rp, sigma_term),
        "ricci_bound_margin": _snap(0.5 * R * R - frame.ric_norm_sq, 0.5 * R * R, frame.ric_norm_sq),
        "gradient_bound_margin": _snap(bound_term - abs(Rp), bound_term, Rp),
        "kato_margin": math.nan,
        "munteanu_margin": math.nan,
        "pinch33_margin": math.nan,
    }
    if fp > 0:
        ratio_sq = Rp * Rp / (fp * fp)
        ratio = abs(Rp) / fp
        pinch_term = math.sqrt((3 * n - 4) / (2 * (n - 1))) * R
        munteanu_term = 0.25 * (1.5 * ratio_sq - 2.0 * R * R)
        out["kato_margin"] = _snap(frame.ric_norm_sq - ratio_sq / 4.0, frame.ric_norm_sq, ratio_sq)
        out["munteanu_margin"] = _snap(munteanu_term - ric_norm, ratio_sq, R * R, ric_norm)
        out["pinch33_margin"] = _snap(ratio - pinch_term, ratio, pinch_term)
    return out


def _delta(frame: GeometryFrame) -> float:
    if not frame.R > 0:
        return math.nan
    eigen = [frame.ric_rad]
    if frame.tangential_mult > 0:
        eigen.append(frame.ric_tan)
    if frame.n_flat > 0:
        eigen.append(0.0)
    return min(eigen) / frame.R


@dataclass(frozen=True)
class PinchingProfile:
    """Margins per radius; positive means the inequality holds with room."""

    radii: NDArray[np.float64]
    delta: NDArray[np.float64]
    sigma_margin: NDArray[np.float64]
    kato_margin: NDArray[np.float64]
    munteanu_margin: NDArray[np.float64]
    pinch33_margin: NDArray[np.float64]
    ricci_bound_margin: NDArray[np.float64]
    gradient_bound_margin: NDArray[np.float64]
    sign_changes: dict[str, list[float]] = field(default_factory=dict)

    def margin(self, name: str) -> NDArray[np.float64]:
        if name not in MARGIN_NAMES:
            raise KeyError(f"unknown margin '{name}'. Allowed: {list(MARGIN_NAMES)}")
        return getattr(self, name)  # type: ignore[no-any-return]


def _locate_sign_changes(
    radii: NDArray[np.float64],
    values: NDArray[np.float64],
    func: Callable[[float], float],
) -> list[float]:
    roots = []
    for i in range(radii.size - 1):
        a, b = values[i], values[i + 1]
        if not (math.isfinite(a) and math.isfinite(b)) or a * b >= 0:
            continue
        roots.append(float(brentq(func, radii[i], radii[i + 1], xtol=SIGN_CHANGE_XTOL)))
    return roots


def pinching_profile(source: SolitonSource, radii: Iterable[float]) -> PinchingProfile:
    """Evaluate every pinching margin on ``radii`` and bracket its sign changes."""
    r = np.asarray(list(radii), dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(np.diff(r) <= 0):
        raise RangeError("radii must be a non-empty strictly increasing sequence")
    frames = [source.frame_at(float(x)) for x in r]
    columns = {name: np.array([_margins(fr)[name] for fr in frames]) for name in MARGIN_NAMES}
    delta = np.array([_delta(fr) for fr in frames])

    sign_changes: dict[str, list[float]] = {}
    for name, values in columns.items():
        roots = _locate_sign_changes(
            r, values, lambda x, _name=name: _margins(source.frame_at(x))[_name]
        )
        if roots:
            sign_changes[name] = roots
            log.info("%s changes sign at r=%s", name, ", ".join(f"{x:.6g}" for x in roots))
    return PinchingProfile(radii=r, delta=delta, sign_changes=sign_changes, **columns)


# ---------------------------------------------------------------------------
# Boundary fluxes over geodesic spheres
# ---------------------------------------------------------------------------


def radial_integrand(frame: GeometryFrame, name: IntegrandName | str) -> float:
    """Nonnegative radial integrand whose sphere flux is tracked."""
    kind = validate_integrand(name) if isinstance(name, str) else name
    fp, R, Rp = frame.grad_f_norm, frame.R, frame.Rp
    if kind is IntegrandName.GRADR_PLUS_RGRADF:
        return abs(Rp + R * fp)
    if kind is IntegrandName.GRADR_PLUS_2RGRADF:
        return abs(Rp) + 2.0 * R * fp
    return fp * fp * abs(Rp + R * fp)


@dataclass(frozen=True)
class FluxSeries:
    """Sphere fluxes of one integrand.

    ``fitted_exponent`` is the log-log slope and ``fitted_rate`` the
    semi-log slope over the last decade; both are None when the flux
    vanishes identically and for the relative series of ``brendle_flux``.
    """

    radii: NDArray[np.float64]
    flux: NDArray[np.float64]
    integrand_name: str
    fitted_exponent: float | None
    fitted_rate: float | None
    vanishing: bool


def _fit_flux(
    r: NDArray[np.float64], flux: NDArray[np.float64], scale: float, name: str
) -> FluxSeries:
    if float(np.max(flux, initial=0.0)) <= VANISHING_FLUX * scale:
        log.info("flux of %s vanishes identically on the sampled radii", name)
        return FluxSeries(r, flux, name, None, None, True)
    usable = last_decade(r) & (flux > 0) & (r > 0)
    if usable.sum() < 8:
        raise FitError(f"need at least 8 positive flux samples in the last decade, got {usable.sum()}")
    exponent = fit_power_law(r[usable], flux[usable]).slope
    rate = fit_exponential(r[usable], flux[usable]).slope
    log.info("flux of %s: exponent %.4g, rate %.4g", name, exponent, rate)
    return FluxSeries(r, flux, name, exponent, rate, False)


def _checked_radii(source: SolitonSource, radii: Iterable[float]) -> NDArray[np.float64]:
    r = np.asarray(list(radii), dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(np.diff(r) <= 0):
        raise RangeError("radii must be a non-empty strictly increasing sequence")
    if r[0] < 0 or r[-1] > source.r_max:
        raise RangeError(f"radii must lie in [0, {source.r_max!r}]")
    return r


def flux_series(
    source: SolitonSource,
    integrand_name: IntegrandName | str,
    radii: Iterable[float],
) -> FluxSeries:
    """Flux of the named integrand through the geodesic spheres of radii ``radii``."""
    kind = validate_integrand(integrand_name) if isinstance(integrand_name, str) else integrand_name
    r = _checked_radii(source, radii)
    flux = np.empty_like(r)
    scale = 0.0
    for i, x in enumerate(r):
        frame = source.frame_at(float(x))
        q = radial_integrand(frame, kind)
        flux[i] = sphere_flux(q, frame.radial_point()) if frame.r > 0 else 0.0
        size = abs(frame.Rp) + frame.R * frame.grad_f_norm
        scale = max(scale, sphere_flux(size, frame.radial_point()) if frame.r > 0 else 0.0)
    return _fit_flux(r, flux, scale, kind.value)


# ---------------------------------------------------------------------------
# ψ and u
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiTable:
    """ψ(s) making ∇R + ψ(R)∇f vanish, and u(s), tabulated on s = R values.

    ``s`` is ascending (so the matching radii descend).  ``x_residual`` is
    the largest |Rp + ψ(R)·fp| / |Rp| seen at off-grid radii and
    ``quad_convergence`` the relative change of the u integrals when the
    quadrature tolerance is tightened.
    """

    n: int
    s: NDArray[np.float64]
    psi: NDArray[np.float64]
    u: NDArray[np.float64]
    radii: NDArray[np.float64]
    x_residual: float
    quad_convergence: float
    _psi_spline: CubicHermiteSpline = field(repr=False, compare=False)
    _u_spline: CubicHermiteSpline = field(repr=False, compare=False)

    @property
    def s_range(self) -> tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])

    def _check(self, s: float) -> None:
        lo, hi = self.s_range
        if not lo <= s <= hi:
            raise RangeError(f"s={s!r} outside the tabulated range [{lo!r}, {hi!r}]")

    def psi_at(self, s: float) -> float:
        self._check(s)
        return float(self._psi_spline(s))

    def u_at(self, s: float) -> float:
        self._check(s)
        return float(self._u_spline(s))


class _Inverse:
    """r(s) for a strictly decreasing R(r): monotone cubic guess plus Newton polish."""

    def __init__(self, profile: RadialProfile):
        self.profile = profile
        outer = profile.grid[profile.grid >= profile.switch_radius]
        R = np.array([profile.frame_at(float(x)).R for x in outer])
        if np.any(np.diff(R) >= 0):
            bad = float(outer[int(np.argmax(np.diff(R) >= 0))])
            raise InversionError(f"R is not strictly decreasing near r={bad!r}")
        self.r_lo, self.r_hi = float(outer[0]), float(outer[-1])
        self.R_lo, self.R_hi = float(R[-1]), float(R[0])
        self._guess = PchipInterpolator(R[::-1], outer[::-1])

    def __call__(self, s: float) -> float:
        r = float(self._guess(s))
        for _ in range(8):
            frame = self.profile.frame_at(r)
            step = (frame.R - s) / frame.Rp
            r = min(max(r - step, self.r_lo), self.r_hi)
            if abs(step) <= 1e-15 * max(r, 1.0):
                break
        return r


def _psi_state(profile: RadialProfile, r: float) -> tuple[GeometryFrame, float, float]:
    """Frame, ψ and dψ/ds at radius r."""
    frame = profile.frame_at(r)
    if not frame.fp > 0:
        raise OriginLimitError(f"|∇f| = 0 at r={r!r}")
    psi = -frame.Rp / frame.fp
    s = profile.dense_eval(r)
    _, fppp = third_derivatives(s.w, s.wp, s.fp, s.wpp, s.fpp, profile.n)
    # ψ = 2 f'' along the profile, and ds/dr = R'
    dpsi_ds = 2.0 * fppp / frame.Rp
    return frame, psi, dpsi_ds


def reconstruct_psi(
    profile: RadialProfile,
    *,
    samples: int = PSI_SAMPLES,
    epsilon: float = PSI_EPSILON,
    n_checks: int = 100,
) -> PsiTable:
    """Tabulate ψ and u on the range of R covered by ``profile``.

    Raises
    ------
    InversionError
        R is not strictly decreasing on the profile.
    DomainError
        ψ ≤ 0 somewhere, so log ψ is undefined.
    """
    n = profile.n
    inverse = _Inverse(profile)
    s_lo, s_hi = inverse.R_lo + epsilon, inverse.R_hi - epsilon
    if not 0.5 < s_hi or not s_lo < 0.5:
        raise RangeError(f"computed range [{s_lo!r}, {s_hi!r}] does not contain 1/2; extend r_max")
    s_nodes = np.union1d(np.geomspace(s_lo, s_hi, samples), [0.5])

    radii = np.array([inverse(float(s)) for s in s_nodes])
    psi = np.empty_like(s_nodes)
    dpsi = np.empty_like(s_nodes)
    one_minus = np.empty_like(s_nodes)
    for i, r in enumerate(radii):
        frame, psi[i], dpsi[i] = _psi_state(profile, float(r))
        one_minus[i] = frame.fp**2
    if np.any(psi <= 0):
        bad = float(s_nodes[int(np.argmax(psi <= 0))])
        raise DomainError(f"psi <= 0 at s={bad!r}: log psi undefined")

    def integrand(t: float) -> float:
        frame, p, _ = _psi_state(profile, inverse(t))
        g2 = frame.fp**2
        return n / g2 - (n - 1 - (n - 3) * t) / (g2 * p)

    def cumulative(epsrel: float) -> NDArray[np.float64]:
        base = int(np.searchsorted(s_nodes, 0.5))
        out = np.zeros_like(s_nodes)
        for i in range(base + 1, s_nodes.size):
            out[i] = out[i - 1] + quad(integrand, s_nodes[i - 1], s_nodes[i], epsrel=epsrel)[0]
        for i in range(base - 1, -1, -1):
            out[i] = out[i + 1] - quad(integrand, s_nodes[i], s_nodes[i + 1], epsrel=epsrel)[0]
        return out

    integral = cumulative(QUAD_EPSREL)
    refined = cumulative(QUAD_EPSREL * 1e-2)
    quad_convergence = float(
        np.max(np.abs(integral - refined) / np.maximum(np.abs(refined), 1e-300))
    )
    u = np.log(psi) + integral / (n - 1)

    integrand_nodes = n / one_minus - (n - 1 - (n - 3) * s_nodes) / (one_minus * psi)
    du = dpsi / psi + integrand_nodes / (n - 1)
    psi_spline = CubicHermiteSpline(s_nodes, psi, dpsi)
    u_spline = CubicHermiteSpline(s_nodes, u, du)

    # off-grid check radii sit between consecutive table radii
    check_r = np.geomspace(radii[-1], radii[0], n_checks + 2)[1:-1]
    x_residual = 0.0
    for r in check_r:
        frame = profile.frame_at(float(r))
        X = frame.Rp + float(psi_spline(frame.R)) * frame.fp
        x_residual = max(x_residual, abs(X) / abs(frame.Rp))

    log.info(
        "psi table n=%d on s in [%.4g, %.4g]: x_residual %.3e, quadrature drift %.3e",
        n,
        s_lo,
        s_hi,
        x_residual,
        quad_convergence,
    )
    return PsiTable(
        n=n,
        s=s_nodes,
        psi=psi,
        u=u,
        radii=radii,
        x_residual=x_residual,
        quad_convergence=quad_convergence,
        _psi_spline=psi_spline,
        _u_spline=u_spline,
    )


def brendle_flux(
    profile: RadialProfile, table: PsiTable, radii: Iterable[float]
) -> FluxSeries:
    """Flux of e^{u(R)}·|∇R + ψ(R)∇f| relative to the flux of e^{u(R)}·|∇R|.

    Radii must map into the tabulated s-range.  e^{u} grows like e^{r} along
    the profile, so only the ratio is reported; it is bounded by the off-grid
    ψ residual and the series counts as vanishing when every ratio is at most
    ``BRENDLE_FLUX_TOL``.  No exponent is fitted.
    """
    r = _checked_radii(profile, radii)
    frames = [profile.frame_at(float(x)) for x in r]
    u = np.array([table.u_at(f.R) for f in frames])
    # common factor e^{max u} cancels in the ratio
    weights = np.exp(u - u.max())
    ratio = np.empty_like(r)
    for i, (frame, weight) in enumerate(zip(frames, weights)):
        point = frame.radial_point()
        X = frame.Rp + table.psi_at(frame.R) * frame.fp
        size = sphere_flux(weight * abs(frame.Rp), point)
        ratio[i] = sphere_flux(weight * abs(X), point) / size if size > 0 else 0.0
    vanishing = bool(float(np.max(ratio)) <= BRENDLE_FLUX_TOL)
    log.info("brendle flux: max relative flux %.3e over %d radii", float(np.max(ratio)), r.size)
    return FluxSeries(r, ratio, "brendle_X", None, None, vanishing)


# ---------------------------------------------------------------------------
# Decay classification
# ---------------------------------------------------------------------------


class DecayFit(NamedTuple):
    classification: DecayClass
    power: LineFit
    exponential: LineFit
    envelope_ok: bool | None

    @property
    def exponent(self) -> float:
        return self.power.slope

    @property
    def rate(self) -> float:
        return self.exponential.slope


def _stable(x: NDArray[np.float64], y: NDArray[np.float64], slope: float) -> bool:
    half = x.size // 2
    first = fit_line(x[:half], y[:half], min_points=4).slope
    second = fit_line(x[half:], y[half:], min_points=4).slope
    return abs(first - second) <= SLOPE_DRIFT * max(abs(slope), 1e-300)


def decay_classifier(
    r: ArrayLike,
    values: ArrayLike,
    *,
    n: int | None = None,
) -> DecayFit:
    """Classify samples as power-law ("linear"), exponential or neither.

    A model wins when its rms residual is at least 10× smaller than the
    other's and its slope is stable between the two halves of the samples.
    When the exponential class wins and ``n`` is given, the envelope
    v·(1+r)^{-3(n+1)}·e^{r} is checked for growth over the last half.
    """
    x = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape or x.ndim != 1:
        raise FitError("samples must be aligned one-dimensional arrays")
    if x.size < 16:
        raise FitError(f"need at least 16 samples, got {x.size}")
    if np.any(np.diff(x) <= 0) or not x[0] > 0:
        raise FitError("radii must be positive and strictly increasing")
    if x[-1] < 10.0 * x[0]:
        raise FitError("samples must span at least one decade")

    power = fit_power_law(x, v)
    expo = fit_exponential(x, v)
    logv = np.log(v)
    verdict = DecayClass.NEITHER
    if power.rms * DECAY_MARGIN <= expo.rms and _stable(np.log(x), logv, power.slope):
        verdict = DecayClass.LINEAR
    elif expo.rms * DECAY_MARGIN <= power.rms and _stable(x, logv, expo.slope):
        verdict = DecayClass.EXPONENTIAL

    envelope_ok: bool | None = None
    if verdict is DecayClass.EXPONENTIAL and n is not None:
        g = logv - 3 * (n + 1) * np.log1p(x) + x
        half = x.size // 2
        envelope_ok = fit_line(x[half:], g[half:], min_points=4).slope <= 0.0
    log.info(
        "decay classified %s (power slope %.4g rms %.2e, exp rate %.4g rms %.2e)",
        verdict.value,
        power.slope,
        power.rms,
        expo.slope,
        expo.rms,
    )
    return DecayFit(verdict, power, expo, envelope_ok)
