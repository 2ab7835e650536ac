"""Tests for the command-line client (in-process service transport)."""

import pytest
from click.testing import CliRunner

from mmsop.cli import main

SMALL_ARGS = ["--set", "k=2", "--set", "nt=3", "--set", "ns=4", "--set", "ne=2",
              "--set", "trials=2", "--set", "i_g=100", "--set", "iter_max=3"]


@pytest.fixture()
def runner(tmp_path, monkeypatch):
    monkeypatch.setenv("MMSOP_OUTPUT_DIR", str(tmp_path))
    return CliRunner()


class TestHappyPaths:
    def test_validate_sop_writes_outputs(self, runner, tmp_path):
        result = runner.invoke(main, ["validate-sop", *SMALL_ARGS,
                                      "--samples", "20000"])
        assert result.exit_code == 0, result.output
        assert "all_pass = True" in result.output
        assert (tmp_path / "validate-sop.csv").exists()
        assert (tmp_path / "validate-sop.meta").exists()

    def test_optimize_custom_output_name(self, runner, tmp_path):
        result = runner.invoke(main, ["optimize", *SMALL_ARGS,
                                      "--output", "trace.csv"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "trace.csv").read_text().startswith("scheme,iteration,")
        assert (tmp_path / "trace.meta").exists()

    def test_sweep_rerun_byte_identical(self, runner, tmp_path):
        args = ["sweep", *SMALL_ARGS, "--axis", "ne", "--values", "1,2"]
        assert runner.invoke(main, [*args, "--output", "a.csv"]).exit_code == 0
        assert runner.invoke(main, [*args, "--output", "b.csv"]).exit_code == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_compare_runs(self, runner, tmp_path):
        result = runner.invoke(main, ["compare", *SMALL_ARGS])
        assert result.exit_code == 0, result.output
        assert "pairs = 2" in result.output
        assert (tmp_path / "compare.csv").exists()

    def test_config_file_and_precedence(self, runner, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("# test config\nk = 2\nnt = 3\nns = 4\nne = 2\n"
                       "trials = 5\ni_g = 100\niter_max = 2\n")
        # --set overrides the file; the typed flag overrides --set
        result = runner.invoke(main, ["sweep", "--config", str(cfg),
                                      "--set", "trials=3", "--trials", "1"])
        assert result.exit_code == 0, result.output
        meta = (tmp_path / "sweep.meta").read_text()
        assert "trials = 1" in meta
        assert "k = 2" in meta

    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0


class TestErrorCategories:
    def test_config_error_unknown_key(self, runner):
        result = runner.invoke(main, ["optimize", "--set", "bogus=1"])
        assert result.exit_code == 1
        assert "error: config: unknown config key" in result.output

    def test_config_error_bad_set_syntax(self, runner):
        result = runner.invoke(main, ["optimize", "--set", "novalue"])
        assert result.exit_code == 1
        assert "error: config:" in result.output

    def test_io_error_missing_config(self, runner):
        result = runner.invoke(main, ["optimize", "--config", "/no/such/file.cfg"])
        assert result.exit_code == 1
        assert "error: io: cannot read config file" in result.output

    def test_validation_error_samples(self, runner):
        result = runner.invoke(main, ["validate-sop", *SMALL_ARGS,
                                      "--samples", "100"])
        assert result.exit_code == 1
        assert "error: validation:" in result.output

    def test_server_error_unreachable(self, runner):
        result = runner.invoke(main, ["optimize", *SMALL_ARGS,
                                      "--server", "http://127.0.0.1:9"])
        assert result.exit_code == 1
        assert "error: server: request failed" in result.output

    def test_config_error_before_any_run(self, runner, tmp_path):
        # fail-fast validation happens before the service is invoked
        result = runner.invoke(main, ["sweep", "--axis", "ns"])
        assert result.exit_code == 1
        assert "error: config:" in result.output
        assert not (tmp_path / "sweep.csv").exists()
