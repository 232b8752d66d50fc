"""Soliton Lab package: numerical steady gradient Ricci solitons."""

from __future__ import annotations

__version__ = "1.0.0"

from .bryant_solver import (  # noqa: E402
    RadialProfile,
    frame_at,
    series_seed,
    soliton_rhs,
    solve_bryant,
    volume_growth,
)
from .errors import SolitonLabError  # noqa: E402
from .exact_solitons import CigarSoliton, FlatSoliton, cigar_frame, flat_soliton_frame  # noqa: E402
from .hypothesis_probe import (  # noqa: E402
    decay_classifier,
    flux_series,
    pinching_profile,
    reconstruct_psi,
    sigma_constant,
)
from .identity_lab import verify_profile  # noqa: E402
from .radial_geometry import GeometryFrame, RadialPoint, curvature_from_point  # noqa: E402

__all__ = [
    "__version__",
    "RadialProfile",
    "frame_at",
    "series_seed",
    "soliton_rhs",
    "solve_bryant",
    "volume_growth",
    "SolitonLabError",
    "CigarSoliton",
    "FlatSoliton",
    "cigar_frame",
    "flat_soliton_frame",
    "decay_classifier",
    "flux_series",
    "pinching_profile",
    "reconstruct_psi",
    "sigma_constant",
    "verify_profile",
    "GeometryFrame",
    "RadialPoint",
    "curvature_from_point",
]
