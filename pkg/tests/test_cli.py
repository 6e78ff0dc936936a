import csv
import io
import json
from importlib import resources

import pytest
from click.testing import CliRunner

from rnscope.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def _write_trace(tmp_path):
    ref = resources.files("rnscope").joinpath("data/traces/keyswitch_l48.json")
    path = tmp_path / "trace.json"
    path.write_text(ref.read_text())
    return str(path)


class TestPrimes:
    def test_text_output(self, runner):
        result = runner.invoke(main, ["primes", "--n", "16", "--bitwidth", "8",
                                      "--count", "2"])
        assert result.exit_code == 0
        assert "193" in result.output and "97" in result.output

    def test_csv_output(self, runner):
        result = runner.invoke(main, ["primes", "--n", "16", "--bitwidth", "8",
                                      "--count", "2", "--format", "csv"])
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert [r["q"] for r in rows] == ["193", "97"]

    def test_structured_output(self, runner):
        result = runner.invoke(main, ["primes", "--n", "16", "--bitwidth", "8",
                                      "--count", "1", "--format", "structured"])
        data = json.loads(result.output)
        assert data["moduli"][0]["q"] == 193
        assert data["schema_version"] == 1

    def test_exhaustion_exits_2(self, runner):
        result = runner.invoke(main, ["primes", "--n", "16", "--bitwidth", "6",
                                      "--count", "1"])
        assert result.exit_code == 2
        assert "insufficient primes" in result.output


class TestVerify:
    def test_quick_pass_exit_0(self, runner):
        result = runner.invoke(main, ["verify", "--trials", "1",
                                      "--bconv-degree", "256", "--seed", "3"])
        assert result.exit_code == 0, result.output
        assert "all suites passed" in result.output
        assert result.output.count("[PASS]") == 3

    def test_fault_injection_exit_1(self, runner):
        result = runner.invoke(main, ["verify", "--trials", "1",
                                      "--bconv-degree", "256", "--fault", "twiddle"])
        assert result.exit_code == 1
        assert "[FAIL] ntt-convolution" in result.output

    def test_missing_params_file_exit_2(self, runner):
        result = runner.invoke(main, ["verify", "--params", "/no/such/file.json"])
        assert result.exit_code == 2

    def test_byte_identical_reports_for_same_seed(self, runner, tmp_path):
        args = ["verify", "--trials", "1", "--bconv-degree", "256", "--seed", "9",
                "--format", "structured"]
        first = runner.invoke(main, args + ["--out", str(tmp_path / "a.json")])
        second = runner.invoke(main, args + ["--out", str(tmp_path / "b.json")])
        assert first.exit_code == second.exit_code == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


class TestPlan:
    def test_builtin_params_by_name(self, runner):
        result = runner.invoke(main, ["plan", "--params", "ks12",
                                      "--machine", "rtx5090", "--b-max", "8"])
        assert result.exit_code == 0
        assert "B* = 7" in result.output

    def test_params_from_file(self, runner, tmp_path):
        config = resources.files("rnscope").joinpath("data/params/ks48.json").read_text()
        path = tmp_path / "params.json"
        path.write_text(config)
        result = runner.invoke(main, ["plan", "--params", str(path),
                                      "--sequence", "ks_stage1"])
        assert result.exit_code == 0
        assert "B* = 1" in result.output

    def test_csv_curve(self, runner):
        result = runner.invoke(main, ["plan", "--params", "ks12", "--b-max", "3",
                                      "--format", "csv"])
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert len(rows) == 3 and rows[0]["b"] == "1"


class TestRoofline:
    def test_paper_numbers(self, runner):
        result = runner.invoke(main, ["roofline", "--read-gb", "53"])
        assert result.exit_code == 0
        assert "8.833 ms" in result.output
        result = runner.invoke(main, ["roofline", "--read-gb", "44"])
        assert "7.333 ms" in result.output

    def test_requires_input(self, runner):
        result = runner.invoke(main, ["roofline"])
        assert result.exit_code == 2

    def test_plot_data_csv(self, runner):
        result = runner.invoke(main, ["roofline", "--read-gb", "1", "--plot-data",
                                      "--format", "csv"])
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert {"series", "x_ops_per_byte", "y_ops_per_s"} <= set(rows[0])


class TestAnalyze:
    def test_eager_vs_static(self, runner, tmp_path):
        trace = _write_trace(tmp_path)
        eager = runner.invoke(main, ["analyze", "--trace", trace,
                                     "--format", "structured"])
        static = runner.invoke(main, ["analyze", "--trace", trace,
                                      "--mode", "static_graph",
                                      "--format", "structured"])
        assert eager.exit_code == static.exit_code == 0
        d_eager = json.loads(eager.output)
        d_static = json.loads(static.output)
        assert d_eager["latency"] - d_static["latency"] == pytest.approx(
            11 * 3e-6, abs=1e-12
        )

    def test_out_file(self, runner, tmp_path):
        trace = _write_trace(tmp_path)
        out = tmp_path / "kernels.csv"
        result = runner.invoke(main, ["analyze", "--trace", trace,
                                      "--format", "csv", "--out", str(out)])
        assert result.exit_code == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 11

    def test_missing_trace_exit_2(self, runner):
        result = runner.invoke(main, ["analyze", "--trace", "/no/file.json"])
        assert result.exit_code == 2
