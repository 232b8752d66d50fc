"""
src/config.py
=============

Centralised settings helper.

Lookup order
------------
1. Environment variables (including those loaded from an .env file).
2. Optional default passed to get_setting().

Run parameters are merged in a second layer: model defaults, then an
optional ``key = value`` config file, then explicit command-line flags.
``python-dotenv`` loads a project-root `.env` once at import time and exposes
the keys via `os.environ`, so the rest of the codebase keeps calling
`get_setting("KEY")` unchanged.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from dotenv import load_dotenv  # pip install python-dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.soliton_lab.spec import validate_format

# ────────────────────────────────
# 🔐  Load .env (project root)
# ────────────────────────────────
_ENV_FILE = Path(__file__).resolve().parent.parent / ".env"
if _ENV_FILE.exists():
    load_dotenv(_ENV_FILE, override=False)


OUT_ENV_VAR = "SOLITON_LAB_OUT"
LOG_LEVEL_ENV_VAR = "SOLITON_LAB_LOG_LEVEL"

# command-line spellings accepted in config files
CONFIG_KEY_ALIASES = {"rmax": "r_max", "format": "formats"}


# ────────────────────────────────
# 🎛️  Public helper
# ────────────────────────────────
def get_setting(name: str, *, default: str | None = None) -> str:
    """
    Fetch a configuration value.

    Parameters
    ----------
    name : str
        Environment variable to look for.
    default : str, optional
        Fallback value if the variable is unset or empty.

    Returns
    -------
    str
        The requested setting.

    Raises
    ------
    RuntimeError
        If the setting is not found and no default is provided.
    """
    # 1️⃣  Immediate environment variable
    if val := os.getenv(name):
        return val

    # 2️⃣  Default fallback
    if default is not None:
        return default

    raise RuntimeError(f"Missing required setting: {name}")


# ────────────────────────────────
# 📄  key = value config files
# ────────────────────────────────
def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped.

    Keys are lower-cased with ``-`` mapped to ``_`` and flag spellings such as
    ``rmax`` or ``format`` resolve to their RunConfig field names.
    """
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        key = CONFIG_KEY_ALIASES.get(key, key)
        if not sep or not key:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        values[key] = value.strip()
    return values


def _default_out() -> Path:
    return Path(get_setting(OUT_ENV_VAR, default="soliton_out"))


class RunConfig(BaseModel):
    """Validated parameters shared by every CLI command."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dim: int = Field(3, ge=2)
    r_max: float = Field(100.0, gt=0)
    tol: float = Field(1e-10, ge=1e-14, le=1e-4)
    switch_radius: float = Field(1e-3, gt=0, le=0.1)
    samples: int = Field(64, ge=16)
    max_step: float = Field(0.01, gt=0)
    out: Path = Field(default_factory=_default_out)
    formats: tuple[str, ...] = ("csv", "json")

    @field_validator("formats", mode="before")
    @classmethod
    def _split_formats(cls, value: Any) -> Any:
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(dict.fromkeys(validate_format(v).value for v in value))

    @classmethod
    def merged(
        cls, file_values: dict[str, str] | None = None, **flags: Any
    ) -> "RunConfig":
        """Defaults ← config file ← explicit flags (``None`` flags are ignored)."""
        data: dict[str, Any] = dict(file_values or {})
        data.update({k: v for k, v in flags.items() if v is not None})
        return cls(**data)
