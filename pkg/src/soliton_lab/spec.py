"""Shared enums used across the soliton lab modules and the CLI."""

from __future__ import annotations

import enum

__all__ = [
    "IdentityName",
    "IntegrandName",
    "DecayClass",
    "ProbeKind",
    "SourceKind",
    "OutputFormat",
    "validate_integrand",
    "validate_source",
    "validate_format",
]


class IdentityName(str, enum.Enum):
    """Residual names carried by every IdentityReport (order is report order)."""

    FIRST_INTEGRAL = "first_integral"
    GRADR_RIC = "gradR_ric"
    BIANCHI_TRACED = "bianchi_traced"
    D_TENSOR_NORM = "d_tensor_norm"
    LEMMA23 = "lemma23"
    LEMMA24 = "lemma24"
    TRACE_SOLITON = "trace_soliton"
    BRENDLE_FORM = "brendle_form"
    POTENTIAL_DIVERGENCE = "potential_divergence"


class IntegrandName(str, enum.Enum):
    """Radial integrands whose sphere flux can be tracked."""

    GRADR_PLUS_RGRADF = "gradR_plus_RgradF"
    GRADR_PLUS_2RGRADF = "gradR_plus_2RgradF"
    ONE_MINUS_R_WEIGHTED = "one_minus_R_weighted"


class DecayClass(str, enum.Enum):
    """Outcome of the asymptotic decay classifier.

    ``linear`` means power-law (linear curvature decay, |Rm| ~ 1/r).
    """

    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    NEITHER = "neither"


class ProbeKind(str, enum.Enum):
    SIGMA = "sigma"
    PINCH = "pinch"
    FLUX = "flux"
    PSI = "psi"
    DECAY = "decay"


class SourceKind(str, enum.Enum):
    """Which soliton a command runs against."""

    BRYANT = "bryant"
    PROFILE = "profile"
    CIGAR = "cigar"
    FLAT = "flat"
    FLAT_LINEAR = "flat-linear"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


# ---------------------------------------------------------------------------
# Helper validation functions (CLI & config reuse)
# ---------------------------------------------------------------------------


def _ensure_enum(value: str, enum_cls: type[enum.Enum], field: str) -> enum.Enum:
    try:
        return enum_cls(value)  # type: ignore[arg-type]
    except ValueError as e:
        msg = f"Unknown {field} '{value}'. Allowed: {[m.value for m in enum_cls]}"
        raise ValueError(msg) from e


def validate_integrand(value: str) -> IntegrandName:
    """Return ``IntegrandName`` or raise ``ValueError`` if invalid."""
    return _ensure_enum(value, IntegrandName, "integrand")  # type: ignore[return-value]


def validate_source(value: str) -> SourceKind:
    return _ensure_enum(value, SourceKind, "source")  # type: ignore[return-value]


def validate_format(value: str) -> OutputFormat:
    return _ensure_enum(value, OutputFormat, "output format")  # type: ignore[return-value]
