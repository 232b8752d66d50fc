"""CSV / JSON / SVG writers and the profile CSV reader.

Every writer goes through a temporary file in the target directory followed
by ``os.replace`` so a crashed run never leaves a half-written artefact.
Data files contain no timestamps; identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from numpy.typing import ArrayLike  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from .bryant_solver import RadialProfile  # noqa: E402
from .errors import ProfileFormatError  # noqa: E402
from .radial_geometry import DEFAULT_SWITCH_RADIUS, GeometryFrame  # noqa: E402

__all__ = [
    "PROFILE_COLUMNS",
    "format_float",
    "frame_row",
    "write_frames_csv",
    "write_profile_csv",
    "write_table_csv",
    "write_json",
    "write_svg",
    "read_profile_csv",
    "read_metadata",
]

log = logging.getLogger("soliton_lab.reports")

PROFILE_COLUMNS = ("r", "w", "wp", "fp", "R", "Rp", "lapR", "ric_rad", "ric_tan", "rm_norm")
SVG_HASH_SALT = "soliton-lab"


# ---------------------------------------------------------------------------
# Atomic write
# ---------------------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    log.debug("wrote %s", path)
    return path


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def format_float(x: float | None) -> str:
    """17 significant digits; empty for missing values."""
    if x is None:
        return ""
    return f"{float(x):.17g}"


def frame_row(frame: GeometryFrame) -> list[str]:
    values = (
        frame.r,
        frame.w,
        frame.wp,
        frame.fp,
        frame.R,
        frame.Rp,
        frame.lapR,
        frame.ric_rad,
        frame.ric_tan,
        frame.rm_norm,
    )
    return [format_float(v) for v in values]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_frames_csv(path: Path, frames: Iterable[GeometryFrame]) -> Path:
    """Profile schema; ``w``/``wp`` are empty for frames without a warping function."""
    return _atomic_write(path, _csv_text(PROFILE_COLUMNS, (frame_row(f) for f in frames)))


def write_profile_csv(
    path: Path, profile: RadialProfile, frames: Sequence[GeometryFrame] | None = None
) -> Path:
    """Profile schema with ``r``/``w``/``wp``/``fp`` taken verbatim from the solver arrays.

    Derived columns come from ``frames`` (one per grid node) or ``frame_at``.
    """
    if frames is None:
        frames = [profile.frame_at(float(r)) for r in profile.grid]
    if len(frames) != profile.grid.size:
        raise ValueError("need one frame per grid node")
    rows = []
    for i, frame in enumerate(frames):
        row = frame_row(frame)
        row[:4] = [
            format_float(float(a[i])) for a in (profile.grid, profile.w, profile.wp, profile.fp)
        ]
        rows.append(row)
    return _atomic_write(path, _csv_text(PROFILE_COLUMNS, rows))


def write_table_csv(path: Path, columns: Mapping[str, ArrayLike]) -> Path:
    """Column-oriented numeric table (probe outputs)."""
    arrays = [np.asarray(v, dtype=float) for v in columns.values()]
    if len({a.shape for a in arrays}) > 1:
        raise ValueError("all table columns must have the same length")
    rows = ([format_float(float(a[i])) for a in arrays] for i in range(arrays[0].size))
    return _atomic_write(path, _csv_text(list(columns), rows))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return _jsonable(obj.model_dump())
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def write_json(path: Path, payload: Any) -> Path:
    """Insertion-ordered JSON, NaN/inf written as null."""
    text = json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n"
    return _atomic_write(path, text)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def _spans_decades(values: np.ndarray) -> bool:
    finite = np.abs(values[np.isfinite(values)])
    positive = finite[finite > 0]
    return positive.size > 1 and positive.max() / positive.min() > 100.0


def write_svg(
    path: Path,
    x: ArrayLike,
    series: Mapping[str, ArrayLike],
    *,
    xlabel: str = "r",
    ylabel: str = "",
    title: str = "",
) -> Path:
    """Simple polyline plot; log axes where a quantity spans more than 2 decades."""
    xa = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    y_all = np.concatenate(list(ys.values())) if ys else np.array([])
    log_x = _spans_decades(xa) and bool(np.all(xa[np.isfinite(xa)] > 0))
    log_y = _spans_decades(y_all) and bool(np.all(y_all[np.isfinite(y_all)] > 0))
    for label, y in ys.items():
        ax.plot(xa, y, label=label, linewidth=1.0)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(ys) > 1:
        ax.legend()

    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return _atomic_write(path, buf.getvalue())


# ---------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------


def read_metadata(path: Path) -> dict[str, Any]:
    """Sidecar metadata JSON next to a profile CSV, or {} when absent."""
    meta = Path(path).with_suffix(".json")
    if not meta.exists():
        return {}
    try:
        data = json.loads(meta.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"{meta}: invalid metadata JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ProfileFormatError(f"{meta}: metadata must be a JSON object")
    return data


def read_profile_csv(
    path: Path,
    *,
    n: int | None = None,
    c0: float | None = None,
    switch_radius: float | None = None,
) -> RadialProfile:
    """Rebuild a RadialProfile from an exported CSV.

    Missing ``n``/``c0``/``switch_radius`` are taken from the sidecar
    metadata JSON.

    Raises
    ------
    ProfileFormatError
        Unreadable file, wrong header, empty ``w`` cells or non-numeric data.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProfileFormatError(f"{path}: {exc.strerror or exc}") from exc

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header[:4]) != PROFILE_COLUMNS[:4]:
        raise ProfileFormatError(f"{path}: expected header starting with r,w,wp,fp")

    rows: list[tuple[float, float, float, float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            r, w, wp, fp = (float(cell) for cell in row[:4])
        except ValueError as exc:
            raise ProfileFormatError(
                f"{path}:{lineno}: non-numeric or empty profile cell ({exc})"
            ) from exc
        rows.append((r, w, wp, fp))
    if not rows:
        raise ProfileFormatError(f"{path}: no data rows")

    meta = read_metadata(path)
    dim = n if n is not None else meta.get("n")
    if dim is None:
        raise ProfileFormatError(f"{path}: dimension unknown; pass --dim or keep the metadata JSON")
    table = np.array(rows)
    return RadialProfile.from_table(
        int(dim),
        table[:, 0],
        table[:, 1],
        table[:, 2],
        table[:, 3],
        c0=float(c0 if c0 is not None else meta.get("c0", 1.0)),
        switch_radius=float(
            switch_radius
            if switch_radius is not None
            else meta.get("switch_radius", DEFAULT_SWITCH_RADIUS)
        ),
        metadata=meta,
    )
