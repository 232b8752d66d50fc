"""Command-line entry point for the soliton lab.

Example usage::

    python -m src.soliton_lab bryant --dim 3 --rmax 100 --tol 1e-10 --out /tmp/lab
    python -m src.soliton_lab verify --profile /tmp/lab/bryant_n3.csv
    python -m src.soliton_lab probe sigma --dim 3
    python -m src.soliton_lab probe decay --source cigar --format svg

Exit codes: 0 success, 1 verification failure, 2 usage or validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import ValidationError

from src.config import LOG_LEVEL_ENV_VAR, RunConfig, get_setting, load_config_file

from . import __version__
from .bryant_solver import RadialProfile, solve_bryant, volume_growth
from .errors import DimensionError, SolitonLabError
from .exact_solitons import CigarSoliton, FlatSoliton, SolitonSource
from .hypothesis_probe import (
    MARGIN_NAMES,
    brendle_flux,
    decay_classifier,
    flux_series,
    pinching_profile,
    reconstruct_psi,
    sigma_constant,
)
from .identity_lab import default_radii, summarize, verify_profile
from .reports import (
    read_profile_csv,
    write_frames_csv,
    write_json,
    write_profile_csv,
    write_svg,
    write_table_csv,
)
from .spec import IdentityName, IntegrandName, OutputFormat, ProbeKind, SourceKind, validate_source

__all__ = ["main"]

log = logging.getLogger("soliton_lab.cli")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


# ───────────────────── argument parsing ─────────────────────


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--dim", type=int, default=None, help="Dimension n (default 3).")
    p.add_argument("--rmax", dest="r_max", type=float, default=None, help="Outer radius.")
    p.add_argument("--tol", type=float, default=None, help="Integrator tolerance.")
    p.add_argument("--switch-radius", dest="switch_radius", type=float, default=None)
    p.add_argument("--max-step", dest="max_step", type=float, default=None)
    p.add_argument("--samples", type=int, default=None, help="Number of sample radii.")
    p.add_argument("--out", type=Path, default=None, help="Output directory.")
    p.add_argument(
        "--format",
        dest="formats",
        action="append",
        choices=[f.value for f in OutputFormat],
        default=None,
        help="Output format; repeat for several (default csv and json).",
    )
    p.add_argument("--config", type=Path, default=None, help="key = value config file.")
    p.add_argument("--quiet", action="store_true", help="Only log warnings and errors.")
    return p


def _source_flags(p: argparse.ArgumentParser, default: SourceKind) -> None:
    p.add_argument(
        "--source",
        choices=[s.value for s in SourceKind],
        default=None,
        help=f"Soliton to evaluate (default {default.value}, or profile with --profile).",
    )
    p.add_argument("--profile", type=Path, default=None, help="Profile CSV to load.")
    p.add_argument("--k-extra", dest="k_extra", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="Cigar metric scale factor.")


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    common = _common_flags()
    p = argparse.ArgumentParser(
        prog="soliton-lab", description="Numerical lab for steady gradient Ricci solitons."
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("bryant", parents=[common], help="Integrate the Bryant soliton.")

    cigar = sub.add_parser("cigar", parents=[common], help="Export cigar frames.")
    cigar.add_argument("--k-extra", dest="k_extra", type=int, default=0)
    cigar.add_argument("--scale", type=float, default=1.0)

    verify = sub.add_parser("verify", parents=[common], help="Run the identity suite.")
    _source_flags(verify, SourceKind.BRYANT)

    probe = sub.add_parser("probe", help="Evaluate theorem hypotheses.")
    probe_sub = probe.add_subparsers(dest="probe", required=True)
    for kind in ProbeKind:
        pp = probe_sub.add_parser(kind.value, parents=[common])
        if kind is not ProbeKind.SIGMA:
            _source_flags(pp, SourceKind.BRYANT)
        if kind is ProbeKind.FLUX:
            pp.add_argument(
                "--integrand",
                choices=[i.value for i in IntegrandName],
                default=IntegrandName.GRADR_PLUS_RGRADF.value,
            )
    return p.parse_args(argv)


def _configure_logging(quiet: bool) -> None:
    level_name = get_setting(LOG_LEVEL_ENV_VAR, default="WARNING" if quiet else "INFO")
    logging.basicConfig(
        level=getattr(logging, level_name.upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _run_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else None
    return RunConfig.merged(
        file_values,
        dim=args.dim,
        r_max=args.r_max,
        tol=args.tol,
        switch_radius=args.switch_radius,
        max_step=args.max_step,
        samples=args.samples,
        out=args.out,
        formats=args.formats,
    )


# ───────────────────── helpers ─────────────────────


def _solve(config: RunConfig) -> RadialProfile:
    if config.dim < 3:
        raise DimensionError(
            f"the Bryant soliton needs --dim >= 3 (got {config.dim}); "
            "use the `cigar` subcommand for n = 2"
        )
    return solve_bryant(
        config.dim,
        config.r_max,
        config.tol,
        switch_radius=config.switch_radius,
        max_step=config.max_step,
    )


def _source(args: argparse.Namespace, config: RunConfig) -> tuple[str, SolitonSource]:
    kind = validate_source(args.source) if args.source else (
        SourceKind.PROFILE if args.profile else SourceKind.BRYANT
    )
    if kind is SourceKind.PROFILE:
        if args.profile is None:
            raise argparse.ArgumentTypeError("--source profile needs --profile PATH")
        return str(args.profile), read_profile_csv(args.profile, n=args.dim)
    if kind is SourceKind.BRYANT:
        return kind.value, _solve(config)
    if kind is SourceKind.CIGAR:
        return kind.value, CigarSoliton(k_extra=args.k_extra, scale=args.scale)
    return kind.value, FlatSoliton(config.dim, linear=kind is SourceKind.FLAT_LINEAR)


def _sample_radii(source: SolitonSource, config: RunConfig, r_min: float = 0.1) -> np.ndarray:
    r_hi = min(source.r_max, config.r_max)
    return np.geomspace(r_min, r_hi, config.samples)


def _emit(
    config: RunConfig,
    stem: str,
    *,
    csv: Callable[[Path], Any] | None = None,
    payload: dict[str, Any] | None = None,
    svg: Callable[[Path], Any] | None = None,
) -> None:
    out = config.out
    if csv is not None and OutputFormat.CSV.value in config.formats:
        csv(out / f"{stem}.csv")
    if payload is not None and OutputFormat.JSON.value in config.formats:
        write_json(out / f"{stem}.json", {"version": __version__, **payload})
    if svg is not None and OutputFormat.SVG.value in config.formats:
        svg(out / f"{stem}.svg")
    log.info("outputs for %s written to %s", stem, out)


# ───────────────────── commands ─────────────────────


def cmd_bryant(args: argparse.Namespace, config: RunConfig) -> int:
    profile = _solve(config)
    frames = [profile.frame_at(float(r)) for r in profile.grid]
    meta = dict(profile.metadata)
    meta["volume_exponent"] = volume_growth(profile).exponent
    R = np.array([f.R for f in frames])
    _emit(
        config,
        f"bryant_n{config.dim}",
        csv=lambda p: write_profile_csv(p, profile, frames),
        payload=meta,
        svg=lambda p: write_svg(
            p, profile.grid[1:], {"R": R[1:], "fp": profile.fp[1:]}, title=f"Bryant n={config.dim}"
        ),
    )
    return EXIT_OK


def cmd_cigar(args: argparse.Namespace, config: RunConfig) -> int:
    cigar = CigarSoliton(k_extra=args.k_extra, scale=args.scale)
    radii = np.concatenate([[0.0], np.geomspace(0.01, config.r_max, config.samples)])
    frames = [cigar.frame_at(float(r)) for r in radii]
    stem = f"cigar_k{args.k_extra}"
    _emit(
        config,
        stem,
        csv=lambda p: write_frames_csv(p, frames),
        payload={"n": cigar.n, "k_extra": args.k_extra, "scale": args.scale, "c0": cigar.c0},
        svg=lambda p: write_svg(p, radii[1:], {"R": [f.R for f in frames[1:]]}, title="cigar"),
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    name, source = _source(args, config)
    radii = default_radii(source, config.samples)
    reports = verify_profile(source, radii)
    summary = summarize(reports, source=name, n=source.n)
    columns: dict[str, Any] = {"r": [rep.point for rep in reports]}
    for ident in IdentityName:
        columns[ident.value] = [rep.residuals[ident].rel for rep in reports]
    _emit(
        config,
        "verify",
        csv=lambda p: write_table_csv(p, columns),
        payload=summary.model_dump(),
    )
    failed = [row for row in summary.identities if not row.passed]
    for row in failed:
        print(
            f"FAIL {row.identity}: max_rel={row.max_rel:.3e} > {row.tolerance:.0e} "
            f"at r={row.worst_r}",
            file=sys.stderr,
        )
    return EXIT_OK if summary.passed else EXIT_VERIFY_FAILED


def _probe_sigma(args: argparse.Namespace, config: RunConfig) -> int:
    value = sigma_constant(config.dim)
    print(f"{value:.17g}")
    _emit(config, f"probe_sigma_n{config.dim}", payload={"n": config.dim, "sigma": value})
    return EXIT_OK


def _probe_pinch(args: argparse.Namespace, config: RunConfig) -> int:
    name, source = _source(args, config)
    pinch = pinching_profile(source, _sample_radii(source, config))
    columns: dict[str, Any] = {"r": pinch.radii, "delta": pinch.delta}
    columns.update({m: pinch.margin(m) for m in MARGIN_NAMES})
    payload = {
        "source": name,
        "n": source.n,
        "sigma": sigma_constant(source.n),
        "min_margin": {m: float(np.nanmin(pinch.margin(m))) for m in MARGIN_NAMES},
        "sign_changes": pinch.sign_changes,
    }
    _emit(
        config,
        "probe_pinch",
        csv=lambda p: write_table_csv(p, columns),
        payload=payload,
        svg=lambda p: write_svg(p, pinch.radii, {m: pinch.margin(m) for m in MARGIN_NAMES}),
    )
    return EXIT_OK


def _probe_flux(args: argparse.Namespace, config: RunConfig) -> int:
    name, source = _source(args, config)
    series = flux_series(source, args.integrand, _sample_radii(source, config))
    payload = {
        "source": name,
        "n": source.n,
        "integrand": series.integrand_name,
        "vanishing": series.vanishing,
        "fitted_exponent": series.fitted_exponent,
        "fitted_rate": series.fitted_rate,
    }
    _emit(
        config,
        f"probe_flux_{series.integrand_name}",
        csv=lambda p: write_table_csv(p, {"r": series.radii, "flux": series.flux}),
        payload=payload,
        svg=lambda p: write_svg(p, series.radii, {"flux": series.flux}),
    )
    return EXIT_OK


def _probe_psi(args: argparse.Namespace, config: RunConfig) -> int:
    name, source = _source(args, config)
    if not isinstance(source, RadialProfile):
        raise DimensionError("probe psi needs a Bryant profile (--source bryant or profile)")
    table = reconstruct_psi(source)
    lo, hi = float(table.radii[-1]), float(table.radii[0])
    check = np.geomspace(lo, hi, 34)[1:-1]
    flux = brendle_flux(source, table, check)
    payload = {
        "source": name,
        "n": source.n,
        "s_range": list(table.s_range),
        "x_residual": table.x_residual,
        "quad_convergence": table.quad_convergence,
        "psi_half": table.psi_at(0.5),
        "u_half": table.u_at(0.5),
        "brendle_flux_rel_max": float(np.max(flux.flux)),
        "brendle_flux_vanishing": flux.vanishing,
    }
    _emit(
        config,
        f"probe_psi_n{source.n}",
        csv=lambda p: write_table_csv(p, {"s": table.s, "psi": table.psi, "u": table.u}),
        payload=payload,
        svg=lambda p: write_svg(p, table.s, {"psi": table.psi}, xlabel="s"),
    )
    return EXIT_OK


def _probe_decay(args: argparse.Namespace, config: RunConfig) -> int:
    name, source = _source(args, config)
    r_hi = min(source.r_max, config.r_max)
    radii = np.geomspace(r_hi / 10.0, r_hi, config.samples)
    frames = [source.frame_at(float(r)) for r in radii]
    # curvature-tensor scale for warped solitons, R for the cigar family
    use_rm = isinstance(source, RadialProfile)
    values = np.array([f.rm_norm if use_rm else f.R for f in frames])
    fit = decay_classifier(radii, values, n=source.n)
    payload = {
        "source": name,
        "n": source.n,
        "quantity": "rm_norm" if use_rm else "R",
        "classification": fit.classification.value,
        "exponent": fit.exponent,
        "rate": fit.rate,
        "power_rms": fit.power.rms,
        "exponential_rms": fit.exponential.rms,
        "envelope_ok": fit.envelope_ok,
    }
    _emit(
        config,
        "probe_decay",
        csv=lambda p: write_table_csv(p, {"r": radii, "value": values}),
        payload=payload,
        svg=lambda p: write_svg(p, radii, {payload["quantity"]: values}),
    )
    return EXIT_OK


_PROBES: dict[ProbeKind, Callable[[argparse.Namespace, RunConfig], int]] = {
    ProbeKind.SIGMA: _probe_sigma,
    ProbeKind.PINCH: _probe_pinch,
    ProbeKind.FLUX: _probe_flux,
    ProbeKind.PSI: _probe_psi,
    ProbeKind.DECAY: _probe_decay,
}


def cmd_probe(args: argparse.Namespace, config: RunConfig) -> int:
    return _PROBES[ProbeKind(args.probe)](args, config)


_COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "bryant": cmd_bryant,
    "cigar": cmd_cigar,
    "verify": cmd_verify,
    "probe": cmd_probe,
}


# ───────────────────── entry point ─────────────────────


def main(argv: list[str] | None = None) -> int:
    args = _parse_args(argv)
    _configure_logging(args.quiet)
    try:
        config = _run_config(args)
        return _COMMANDS[args.command](args, config)
    except SolitonLabError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValidationError, ValueError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
