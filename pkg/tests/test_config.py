"""
Tests for configuration management.
"""

import os
from pathlib import Path
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from src.config import OUT_ENV_VAR, RunConfig, get_setting, load_config_file


class TestGetSetting:
    """Test get_setting function."""

    def test_get_setting_from_env(self):
        """Test getting setting from environment variable."""
        with patch.dict(os.environ, {"TEST_KEY": "test-value"}):
            result = get_setting("TEST_KEY")
            assert result == "test-value"

    def test_get_setting_with_default(self):
        """Test getting setting with default value."""
        result = get_setting("NONEXISTENT_KEY", default="default-value")
        assert result == "default-value"

    def test_get_setting_missing_no_default(self):
        """Test getting setting that doesn't exist without default."""
        with pytest.raises(RuntimeError, match="Missing required setting: NONEXISTENT_KEY"):
            get_setting("NONEXISTENT_KEY")

    def test_empty_env_value_falls_back_to_default(self):
        """An empty variable counts as unset."""
        with patch.dict(os.environ, {"TEST_KEY": ""}):
            assert get_setting("TEST_KEY", default="fallback") == "fallback"

    def test_env_takes_precedence_over_default(self):
        with patch.dict(os.environ, {"TEST_KEY": "env-value"}):
            assert get_setting("TEST_KEY", default="default-value") == "env-value"


class TestLoadConfigFile:
    """Test the key = value config-file parser."""

    def test_parses_keys_comments_and_blank_lines(self, tmp_path: Path):
        path = tmp_path / "lab.cfg"
        path.write_text(
            "# run parameters\n\ndim = 4\nr-max = 50  # outer radius\nTOL=1e-9\n",
            encoding="utf-8",
        )
        assert load_config_file(path) == {"dim": "4", "r_max": "50", "tol": "1e-9"}

    def test_flag_spellings_map_to_field_names(self, tmp_path: Path):
        path = tmp_path / "lab.cfg"
        path.write_text("rmax = 5\nformat = json, svg\nswitch-radius = 0.002\n", encoding="utf-8")
        values = load_config_file(path)
        assert values == {"r_max": "5", "formats": "json, svg", "switch_radius": "0.002"}
        config = RunConfig.merged(values)
        assert config.r_max == 5.0
        assert config.formats == ("json", "svg")

    def test_malformed_line_raises(self, tmp_path: Path):
        path = tmp_path / "bad.cfg"
        path.write_text("dim 4\n", encoding="utf-8")
        with pytest.raises(ValueError, match="bad.cfg:1"):
            load_config_file(path)

    def test_missing_key_raises(self, tmp_path: Path):
        path = tmp_path / "bad.cfg"
        path.write_text("= 4\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_config_file(path)


class TestRunConfig:
    """Test RunConfig validation and merging."""

    def test_defaults(self):
        config = RunConfig()
        assert config.dim == 3
        assert config.r_max == 100.0
        assert config.tol == 1e-10
        assert config.switch_radius == 1e-3
        assert config.formats == ("csv", "json")

    def test_out_defaults_from_environment(self):
        with patch.dict(os.environ, {OUT_ENV_VAR: "/tmp/lab-out"}):
            assert RunConfig().out == Path("/tmp/lab-out")

    def test_flags_override_file_values(self):
        config = RunConfig.merged({"dim": "5", "r_max": "20"}, dim=4, r_max=None)
        assert config.dim == 4
        assert config.r_max == 20.0

    def test_file_values_override_defaults(self):
        config = RunConfig.merged({"tol": "1e-8", "samples": "32"})
        assert config.tol == 1e-8
        assert config.samples == 32

    def test_formats_accept_comma_string(self):
        config = RunConfig.merged({"formats": "csv, svg"})
        assert config.formats == ("csv", "svg")

    def test_unknown_format_lists_allowed_values(self):
        with pytest.raises(ValidationError, match="Unknown output format .pdf."):
            RunConfig.merged({"formats": "csv, pdf"})

    def test_duplicate_formats_are_collapsed(self):
        assert RunConfig(formats=["json", "json", "csv"]).formats == ("json", "csv")

    @pytest.mark.parametrize(
        "field, value",
        [
            ("tol", 1e-2),
            ("tol", 1e-16),
            ("dim", 1),
            ("r_max", 0.0),
            ("switch_radius", 0.5),
            ("samples", 4),
            ("formats", ["pdf"]),
        ],
    )
    def test_out_of_range_values_rejected(self, field, value):
        with pytest.raises(ValidationError):
            RunConfig(**{field: value})

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig.merged({"radius": "3"})

    def test_config_is_frozen(self):
        config = RunConfig()
        with pytest.raises(ValidationError):
            config.dim = 4
