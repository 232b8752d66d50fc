"""
End-to-end tests for the soliton-lab command line.
"""

import csv
import json
import shutil
from pathlib import Path

import pytest

from src.soliton_lab import __version__
from src.soliton_lab.cli import main
from src.soliton_lab.spec import SourceKind, validate_format, validate_source


def _run(tmp_path: Path, *argv: str) -> int:
    return main([*argv, "--out", str(tmp_path), "--quiet"])


def _negate_fp(source: Path, target: Path) -> None:
    with source.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    col = header.index("fp")
    for row in body:
        row[col] = repr(-float(row[col]))
    with target.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
    shutil.copyfile(source.with_suffix(".json"), target.with_suffix(".json"))


class TestNameValidation:
    """Source and format names shared by the CLI and config files."""

    def test_source_names(self):
        assert validate_source("flat-linear") is SourceKind.FLAT_LINEAR
        with pytest.raises(ValueError, match="Unknown source .sphere."):
            validate_source("sphere")

    def test_format_names(self):
        assert validate_format("svg").value == "svg"
        with pytest.raises(ValueError, match="Allowed"):
            validate_format("png")


class TestBryantCommand:
    """bryant subcommand."""

    def test_writes_profile_and_metadata(self, tmp_path: Path):
        assert _run(tmp_path, "bryant", "--dim", "3", "--rmax", "100", "--tol", "1e-10") == 0
        meta = json.loads((tmp_path / "bryant_n3.json").read_text())
        assert meta["version"] == __version__
        assert meta["n"] == 3
        assert meta["r_max"] == 100.0
        assert meta["c0_drift"] <= 1e-8
        header = (tmp_path / "bryant_n3.csv").read_text().splitlines()[0]
        assert header == "r,w,wp,fp,R,Rp,lapR,ric_rad,ric_tan,rm_norm"

    def test_dimension_two_points_to_cigar(self, tmp_path: Path, capsys):
        assert _run(tmp_path, "bryant", "--dim", "2") == 2
        assert "cigar" in capsys.readouterr().err

    def test_tolerance_out_of_range(self, tmp_path: Path, capsys):
        assert _run(tmp_path, "bryant", "--tol", "1e-2") == 2
        assert "tol" in capsys.readouterr().err

    def test_config_file_values(self, tmp_path: Path):
        config = tmp_path / "lab.cfg"
        config.write_text("dim = 4\nrmax = 5\nformat = json\n", encoding="utf-8")
        assert _run(tmp_path, "bryant", "--config", str(config)) == 0
        assert json.loads((tmp_path / "bryant_n4.json").read_text())["r_max"] == 5.0
        assert not (tmp_path / "bryant_n4.csv").exists()

    def test_config_file_unknown_key(self, tmp_path: Path, capsys):
        config = tmp_path / "lab.cfg"
        config.write_text("dim = 4\nradius = 5\n", encoding="utf-8")
        assert _run(tmp_path, "bryant", "--config", str(config)) == 2
        assert "radius" in capsys.readouterr().err

    def test_identical_runs_are_byte_identical(self, tmp_path: Path):
        first, second = tmp_path / "a", tmp_path / "b"
        args = ("bryant", "--rmax", "10", "--format", "csv", "--format", "json", "--format", "svg")
        assert _run(first, *args) == 0
        assert _run(second, *args) == 0
        for name in ("bryant_n3.csv", "bryant_n3.json", "bryant_n3.svg"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_only_requested_formats_written(self, tmp_path: Path):
        assert _run(tmp_path, "bryant", "--rmax", "5", "--format", "json") == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == ["bryant_n3.json"]


class TestCigarCommand:
    def test_exports_frames(self, tmp_path: Path):
        assert _run(tmp_path, "cigar", "--k-extra", "1", "--rmax", "20", "--samples", "16") == 0
        rows = (tmp_path / "cigar_k1.csv").read_text().splitlines()
        assert len(rows) == 1 + 17
        meta = json.loads((tmp_path / "cigar_k1.json").read_text())
        assert meta["n"] == 3 and meta["c0"] == 4.0


class TestVerifyCommand:
    """verify subcommand exit codes."""

    @pytest.mark.slow
    def test_fresh_profile_passes(self, tmp_path: Path):
        assert _run(tmp_path, "bryant", "--rmax", "100") == 0
        assert _run(tmp_path, "verify", "--profile", str(tmp_path / "bryant_n3.csv")) == 0
        summary = json.loads((tmp_path / "verify.json").read_text())
        assert summary["passed"] is True
        assert summary["n"] == 3
        assert [row["identity"] for row in summary["identities"]][:3] == [
            "first_integral",
            "gradR_ric",
            "bianchi_traced",
        ]

    @pytest.mark.parametrize("source", ["flat", "flat-linear"])
    def test_flat_solitons_pass(self, tmp_path: Path, source):
        assert _run(tmp_path, "verify", "--source", source, "--samples", "16") == 0
        summary = json.loads((tmp_path / "verify.json").read_text())
        assert all(row["max_abs"] == 0.0 for row in summary["identities"])

    def test_cigar_product_fails_only_on_d_tensor(self, tmp_path: Path, capsys):
        argv = ("verify", "--source", "cigar", "--k-extra", "1", "--scale", "4", "--samples", "16")
        assert _run(tmp_path, *argv) == 1
        summary = json.loads((tmp_path / "verify.json").read_text())
        failed = [row["identity"] for row in summary["identities"] if not row["passed"]]
        assert failed == ["d_tensor_norm"]
        assert "FAIL d_tensor_norm" in capsys.readouterr().err

    def test_negated_potential_fails(self, tmp_path: Path, capsys):
        assert _run(tmp_path, "bryant", "--rmax", "20") == 0
        corrupted = tmp_path / "corrupted.csv"
        _negate_fp(tmp_path / "bryant_n3.csv", corrupted)
        assert _run(tmp_path, "verify", "--profile", str(corrupted), "--samples", "16") == 1
        err = capsys.readouterr().err
        assert "FAIL first_integral" in err
        assert json.loads((tmp_path / "verify.json").read_text())["passed"] is False

    def test_malformed_profile(self, tmp_path: Path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
        assert _run(tmp_path, "verify", "--profile", str(bad), "--dim", "3") == 2
        assert "header" in capsys.readouterr().err

    def test_missing_profile(self, tmp_path: Path):
        assert _run(tmp_path, "verify", "--profile", str(tmp_path / "absent.csv")) == 2


class TestProbeCommand:
    """probe subcommands."""

    def test_sigma_prints_seventeen_digits(self, tmp_path: Path, capsys):
        assert _run(tmp_path, "probe", "sigma", "--dim", "3") == 0
        assert capsys.readouterr().out.strip() == f"{8 / 7:.17g}"
        payload = json.loads((tmp_path / "probe_sigma_n3.json").read_text())
        assert payload["sigma"] == 8 / 7

    def test_decay_on_cigar_is_exponential(self, tmp_path: Path):
        assert _run(tmp_path, "probe", "decay", "--source", "cigar") == 0
        payload = json.loads((tmp_path / "probe_decay.json").read_text())
        assert payload["classification"] == "exponential"
        assert payload["quantity"] == "R"
        assert abs(payload["rate"] + 2.0) <= 0.05

    def test_pinch_on_cigar(self, tmp_path: Path):
        argv = ("probe", "pinch", "--source", "cigar", "--scale", "4", "--rmax", "30")
        assert _run(tmp_path, *argv) == 0
        payload = json.loads((tmp_path / "probe_pinch.json").read_text())
        assert payload["min_margin"]["sigma_margin"] == 0.0
        assert payload["sigma"] == 1.0
        assert (tmp_path / "probe_pinch.csv").exists()

    def test_flux_on_linear_flat_soliton(self, tmp_path: Path):
        argv = ("probe", "flux", "--source", "flat-linear", "--integrand", "gradR_plus_RgradF")
        assert _run(tmp_path, *argv) == 0
        payload = json.loads((tmp_path / "probe_flux_gradR_plus_RgradF.json").read_text())
        assert payload["vanishing"] is True
        assert payload["fitted_exponent"] is None

    @pytest.mark.slow
    def test_psi_table(self, tmp_path: Path):
        assert _run(tmp_path, "probe", "psi", "--dim", "3") == 0
        payload = json.loads((tmp_path / "probe_psi_n3.json").read_text())
        assert payload["x_residual"] <= 1e-6
        assert payload["brendle_flux_rel_max"] <= 1e-6
        assert payload["brendle_flux_vanishing"] is True
        header = (tmp_path / "probe_psi_n3.csv").read_text().splitlines()[0]
        assert header == "s,psi,u"

    def test_psi_needs_bryant_profile(self, tmp_path: Path):
        assert _run(tmp_path, "probe", "psi", "--source", "cigar") == 2

    def test_unknown_subcommand_exits_with_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["probe", "curvature"])
        assert exc.value.code == 2
