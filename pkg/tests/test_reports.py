"""
Tests for the CSV / JSON / SVG writers and the profile reader.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from src.soliton_lab.errors import ProfileFormatError
from src.soliton_lab.exact_solitons import flat_soliton_frame
from src.soliton_lab.identity_lab import summarize
from src.soliton_lab.reports import (
    PROFILE_COLUMNS,
    format_float,
    read_profile_csv,
    write_frames_csv,
    write_json,
    write_profile_csv,
    write_svg,
    write_table_csv,
)


class TestWriters:
    """Deterministic, atomic output files."""

    def test_format_float(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(None) == ""
        assert float(format_float(math.pi)) == math.pi

    def test_frames_without_warping_leave_cells_empty(self, tmp_path: Path):
        path = write_frames_csv(tmp_path / "flat.csv", [flat_soliton_frame(3, linear=True, r=1.0)])
        header, row = path.read_text().splitlines()
        assert header.split(",") == list(PROFILE_COLUMNS)
        assert row.split(",")[1:3] == ["", ""]

    def test_table_columns_must_align(self, tmp_path: Path):
        with pytest.raises(ValueError):
            write_table_csv(tmp_path / "t.csv", {"r": [1.0, 2.0], "v": [1.0]})

    def test_json_non_finite_as_null(self, tmp_path: Path):
        path = write_json(
            tmp_path / "out.json", {"a": math.nan, "b": np.float64(2.5), "c": np.arange(2)}
        )
        assert json.loads(path.read_text()) == {"a": None, "b": 2.5, "c": [0, 1]}

    def test_json_accepts_models(self, tmp_path: Path):
        summary = summarize([], source="empty", n=3)
        path = write_json(tmp_path / "summary.json", summary)
        assert json.loads(path.read_text())["source"] == "empty"

    def test_no_temporary_files_left(self, tmp_path: Path):
        write_table_csv(tmp_path / "t.csv", {"r": [1.0, 2.0], "v": [3.0, 4.0]})
        assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]

    def test_svg_is_deterministic(self, tmp_path: Path):
        x = np.geomspace(1.0, 1e3, 20)
        first = write_svg(tmp_path / "a.svg", x, {"R": 1.0 / x})
        second = write_svg(tmp_path / "b.svg", x, {"R": 1.0 / x})
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text().lstrip().startswith("<?xml")


class TestReadProfile:
    """Profile CSV parsing."""

    def test_round_trip_through_csv(self, tmp_path: Path, bryant3):
        path = write_profile_csv(tmp_path / "bryant_n3.csv", bryant3)
        write_json(tmp_path / "bryant_n3.json", bryant3.metadata)
        profile = read_profile_csv(path)
        assert profile.n == 3
        np.testing.assert_array_equal(profile.grid, bryant3.grid)
        np.testing.assert_array_equal(profile.w, bryant3.w)
        np.testing.assert_array_equal(profile.wp, bryant3.wp)
        np.testing.assert_array_equal(profile.fp, bryant3.fp)
        assert profile.frame_at(7.0).R == bryant3.frame_at(7.0).R

    def test_profile_columns_written_from_solver_arrays(self, tmp_path: Path, bryant3):
        path = write_profile_csv(tmp_path / "bryant_n3.csv", bryant3)
        rows = path.read_text().splitlines()[1:]
        assert len(rows) == bryant3.grid.size
        last = rows[-1].split(",")
        assert float(last[0]) == bryant3.grid[-1]
        assert float(last[3]) == bryant3.fp[-1]

    def test_profile_frames_must_match_grid(self, tmp_path: Path, bryant3):
        with pytest.raises(ValueError, match="one frame per grid node"):
            write_profile_csv(tmp_path / "p.csv", bryant3, [bryant3.frame_at(1.0)])

    def test_dimension_needed_without_metadata(self, tmp_path: Path):
        path = tmp_path / "p.csv"
        path.write_text("r,w,wp,fp\n0.001,0.001,1,0.0003\n0.002,0.002,1,0.0006\n")
        with pytest.raises(ProfileFormatError, match="dimension unknown"):
            read_profile_csv(path)

    def test_empty_cell(self, tmp_path: Path):
        path = tmp_path / "p.csv"
        path.write_text("r,w,wp,fp\n0.001,,1,0.0003\n")
        with pytest.raises(ProfileFormatError, match="p.csv:2"):
            read_profile_csv(path, n=3)

    def test_no_rows(self, tmp_path: Path):
        path = tmp_path / "p.csv"
        path.write_text("r,w,wp,fp\n")
        with pytest.raises(ProfileFormatError, match="no data rows"):
            read_profile_csv(path, n=3)

    def test_invalid_metadata(self, tmp_path: Path):
        path = tmp_path / "p.csv"
        path.write_text("r,w,wp,fp\n0.001,0.001,1,0.0003\n")
        path.with_suffix(".json").write_text("[1, 2]")
        with pytest.raises(ProfileFormatError, match="JSON object"):
            read_profile_csv(path)
