"""Exception hierarchy for the soliton lab.

Every error carries the process exit code the CLI maps it to, so the
command layer never needs its own lookup table.
"""

from __future__ import annotations

__all__ = [
    "SolitonLabError",
    "DimensionError",
    "DomainError",
    "OriginLimitError",
    "RangeError",
    "IntegrationStallError",
    "MonotonicityError",
    "InversionError",
    "FitError",
    "ProfileFormatError",
]


class SolitonLabError(Exception):
    """Base class for all lab errors."""

    exit_code = 3


class DimensionError(SolitonLabError, ValueError):
    """Raised when the ambient dimension is outside the supported range."""

    exit_code = 2


class RangeError(SolitonLabError, ValueError):
    """Raised when a radius or parameter lies outside the accepted interval."""

    exit_code = 2


class ProfileFormatError(SolitonLabError, ValueError):
    """Raised when a profile CSV cannot be parsed."""

    exit_code = 2


class DomainError(SolitonLabError, ArithmeticError):
    """Raised when a formula is evaluated outside its domain of definition."""


class OriginLimitError(DomainError):
    """Raised when a formula divides by w (or fp) too close to the origin.

    Callers are expected to fall back to the series limit there.
    """


class IntegrationStallError(SolitonLabError, RuntimeError):
    """Raised when the adaptive integrator cannot take a further step."""

    def __init__(self, message: str, last_r: float):
        super().__init__(message)
        self.last_r = last_r


class MonotonicityError(SolitonLabError, RuntimeError):
    """Raised when wp or fp leaves its admissible envelope during integration."""


class InversionError(SolitonLabError, RuntimeError):
    """Raised when R cannot be inverted as a monotone function of r."""


class FitError(SolitonLabError, ValueError):
    """Raised when a least-squares fit has too few or degenerate samples."""
