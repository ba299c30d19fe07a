import json
import subprocess
import sys

import numpy as np
import pytest
from click.testing import CliRunner

from sdbf.cli import main
from sdbf.datasets import cd45_count_differences
from sdbf.report import validate_report_dict


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def data_csv(tmp_path):
    path = tmp_path / "data.csv"
    np.savetxt(path, cd45_count_differences(), delimiter=",", fmt="%.1f")
    return path


def run_mvt(runner, data_csv, tmp_path, *extra):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        ["mvt", "--data", str(data_csv), "--seed", "3", "--draws", "1500", "--out", str(out)]
        + list(extra),
    )
    return result, out


class TestMvtCommand:
    def test_writes_valid_report(self, runner, data_csv, tmp_path):
        result, out = run_mvt(runner, data_csv, tmp_path)
        assert result.exit_code == 0, result.output
        document = json.loads(out.read_text())
        validate_report_dict(document)
        assert document["analysis"] == "mvt"
        assert document["bayes_factor"]["value"] > 0
        assert "bf_cu" in result.output

    def test_reports_byte_identical_for_same_seed(self, runner, data_csv, tmp_path):
        _, out1 = run_mvt(runner, data_csv, tmp_path)
        first = out1.read_bytes()
        _, out2 = run_mvt(runner, data_csv, tmp_path)
        assert out2.read_bytes() == first

    def test_density_grid_schema(self, runner, data_csv, tmp_path):
        result, out = run_mvt(runner, data_csv, tmp_path, "--emit-density-grid")
        assert result.exit_code == 0, result.output
        grid_path = out.with_suffix(out.suffix + ".density.csv")
        assert grid_path.exists()
        header = grid_path.read_text().splitlines()[0].split(",")
        assert header[0] == "theta"
        table = np.loadtxt(grid_path, delimiter=",", skiprows=1)
        assert np.all(np.diff(table[:, 0]) > 0)
        assert np.all(table[:, 1:] >= 0.0)

    def test_missing_file_exits_2_naming_path(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["mvt", "--data", str(tmp_path / "nope.csv"), "--seed", "1", "--out", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 2
        assert "nope.csv" in result.output

    def test_malformed_csv_reports_line_number(self, runner, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,4.0\nfive,6.0\n")
        result = runner.invoke(
            main, ["mvt", "--data", str(path), "--seed", "1", "--out", str(tmp_path / "r.json")]
        )
        assert result.exit_code == 2
        assert "line 3" in result.output

    def test_ragged_csv_reports_line_number(self, runner, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        result = runner.invoke(
            main, ["mvt", "--data", str(path), "--seed", "1", "--out", str(tmp_path / "r.json")]
        )
        assert result.exit_code == 2
        assert "line 2" in result.output

    def test_degenerate_data_is_usage_error(self, runner, tmp_path):
        path = tmp_path / "flat.csv"
        path.write_text("\n".join("1.0,1.0" for _ in range(20)) + "\n")
        result = runner.invoke(
            main, ["mvt", "--data", str(path), "--seed", "1", "--out", str(tmp_path / "r.json")]
        )
        assert result.exit_code == 2


class TestMultinomialCommand:
    def test_writes_valid_report(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            [
                "multinomial",
                "--counts",
                "315,101,108,32",
                "--seed",
                "9",
                "--draws",
                "100000",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        document = json.loads(out.read_text())
        validate_report_dict(document)
        assert document["bayes_factor"]["value"] == pytest.approx(109.0572, rel=0.15)

    @pytest.mark.parametrize("counts", ["0,0,0,0", "1,2,3", "1,-2,3,4", "a,b,c,d"])
    def test_invalid_counts_exit_2(self, runner, tmp_path, counts):
        result = runner.invoke(
            main,
            ["multinomial", "--counts", counts, "--seed", "1", "--out", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 2


class TestValidateCommand:
    def test_fast_run_passes(self, runner):
        result = runner.invoke(main, ["validate", "--fast"])
        assert result.exit_code == 0, result.output
        lines = [l for l in result.output.splitlines() if l.startswith(("PASS", "FAIL"))]
        assert len(lines) >= 10
        assert all(l.startswith("PASS") for l in lines)
        assert all("target=" in l for l in lines)

    def test_injected_fault_fails(self, runner):
        result = runner.invoke(
            main, ["validate", "--fast", "--inject-fault", "kde-zero-bandwidth"]
        )
        assert result.exit_code == 1
        assert any(
            line.startswith("FAIL") and "kde_convergence" in line
            for line in result.output.splitlines()
        )


class TestInstalledEntryPoint:
    def test_help_runs(self):
        result = subprocess.run(
            [sys.executable, "-m", "sdbf.cli", "--help"], capture_output=True, text=True
        )
        assert result.returncode == 0
        assert "mvt" in result.stdout
        assert "multinomial" in result.stdout
        assert "validate" in result.stdout
