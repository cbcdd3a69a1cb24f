"""End-to-end runs of the command line in process."""
import json

import pytest

from entrypoint import LcfLabRunner, main
from src.cli import parse_config


def read(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestClassify:
    def test_dimension_four(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["classify", "--dim", "4", "--out", str(out)]) == 0

        data = read(out)
        assert data["command"] == "classify"
        assert data["seed"] == 0
        assert data["config"]["dim"] == 4
        assert "fd_step" in data["tolerances"]
        assert [item["m"] for item in data["report"]["admitted"]] == [[4], [3, 1], [2, 2]]
        assert data["report"]["undecided"] == []
        assert "Report written to" in capsys.readouterr().out

    def test_stdout_report(self, capsys):
        assert main(["classify", "--dim", "5"]) == 0
        assert json.loads(capsys.readouterr().out)["report"]["n"] == 5

    def test_identical_runs_identical_bytes(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["classify", "--dim", "7", "--out", str(first)]) == 0
        assert main(["classify", "--dim", "7", "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_undecided_beyond_decided_range_is_not_a_failure(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["classify", "--dim", "9", "--l-max", "4", "--out", str(out)]) == 0
        assert read(out)["report"]["undecided"]


class TestScans:
    def test_check_metric(self, opposite_spec_file, tmp_path):
        out = tmp_path / "check.json"
        assert main(["check-metric", "--spec", str(opposite_spec_file), "--points", "2", "--out", str(out)]) == 0
        report = read(out)["report"]
        assert report["weyl_max"] < 1e-7
        assert report["codazzi_max"] < 1e-4
        for spectrum in report["spectra"]:
            assert spectrum == pytest.approx([-1, -1, 1, 1], abs=1e-4)

    def test_cspace_seed_recorded(self, opposite_spec_file, tmp_path):
        out = tmp_path / "scan.json"
        argv = ["cspace-scan", "--spec", str(opposite_spec_file), "--seed", "42", "--geodesics", "2", "--steps", "10"]
        assert main(argv + ["--out", str(out)]) == 0
        data = read(out)
        assert data["seed"] == 42
        assert data["report"]["seed"] == 42
        assert data["report"]["kind"] == "cspace"
        assert len(data["report"]["samples"]) == 2

    def test_ricci_scan(self, write_json, tmp_path):
        spec = write_json("sphere.json", {"kind": "space_form", "dim": 4, "params": {"curvature": 1}})
        out = tmp_path / "ricci.json"
        assert main(["ricci-scan", "--spec", str(spec), "--points", "3", "--out", str(out)]) == 0
        assert read(out)["report"]["verdict"] == "constant"

    @pytest.mark.parametrize(
        "command, options",
        [
            ("check-metric", ["--points", "2"]),
            ("cspace-scan", ["--geodesics", "3", "--steps", "10", "--threads", "2"]),
            ("ricci-scan", ["--points", "4"]),
        ],
    )
    def test_identical_runs_identical_bytes(self, opposite_spec_file, tmp_path, command, options):
        argv = [command, "--spec", str(opposite_spec_file), "--seed", "7"] + options
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(argv + ["--out", str(first)]) == 0
        assert main(argv + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_guard_exit_is_reported(self, write_json, tmp_path):
        spec = write_json("small.json", {"kind": "flat", "dim": 4, "params": {"radius": 0.1}})
        out = tmp_path / "ricci.json"
        assert main(["ricci-scan", "--spec", str(spec), "--radius", "1.0", "--out", str(out)]) == 1
        assert read(out)["report"]["error_type"] == "DomainGuardError"


class TestUsageErrors:
    def test_bad_spec_names_the_key(self, write_json, caplog):
        spec = write_json("bad.json", {"kind": "space_form", "dim": 4, "params": {"curvature": 1, "bogus": 2}})
        assert main(["check-metric", "--spec", str(spec)]) == 2
        assert "bogus" in caplog.text

    def test_missing_argument(self):
        assert main(["classify"]) == 2

    def test_unknown_flag(self):
        assert main(["classify", "--dim", "4", "--bogus"]) == 2


def test_calibrate(tmp_path, capsys):
    out = tmp_path / "calibration.json"
    assert main(["calibrate", "--out", str(out)]) == 0
    report = read(out)["report"]
    assert report["passed"] is True
    assert all(row["passed"] for row in report["rows"])
    assert "sphere_sectional" in capsys.readouterr().out


def test_runner_summary():
    runner = LcfLabRunner(parse_config(["classify", "--dim", "6", "--out", "unused.json"]))
    report, exit_code = runner._classify()
    assert exit_code == 0
    assert runner.summary == ["classify n=6: 4 admitted, 7 rejected, 0 undecided"]
    assert report.enumerated == 11
