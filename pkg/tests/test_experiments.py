"""Tests for the experiment harness (configs, CSV emission, runners)."""

import csv
import io

import numpy as np
import pytest

from mmsop import experiments
from mmsop.channel import sample_channels, trial_rng
from mmsop.experiments import (ConfigError, ExperimentSpec, meta_text,
                               monte_carlo_sop, parse_config_text,
                               resolve_output_path, run_compare, run_optimize,
                               run_sweep, spec_from_mapping, validate_sop,
                               write_outputs)

SMALL = dict(k=2, nt=3, ns=4, ne=2, trials=2, i_g=100, iter_max=3)


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestParseConfigText:
    def test_comments_and_blank_lines(self):
        text = "# header\nk = 3\n\nsnr_db = 5.0  # inline\nschemes = mm-sop, mm-sinr\n"
        out = parse_config_text(text)
        assert out == {"k": "3", "snr_db": "5.0", "schemes": "mm-sop, mm-sinr"}

    def test_bad_line_reports_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("k = 3\nnonsense\n")


class TestSpecFromMapping:
    def test_coercions(self):
        spec = spec_from_mapping({"k": "3", "snr_db": "5", "values": "8,16",
                                  "schemes": "mm-sop,mm-sinr", "axis": "ns"})
        assert spec.k == 3 and spec.snr_db == 5.0
        assert spec.values == (8, 16)
        assert spec.schemes == ("mm-sop", "mm-sinr")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            spec_from_mapping({"bogus": "1"})

    @pytest.mark.parametrize("mapping", [
        {"axis": "frequency"},
        {"schemes": "zero-forcing"},
        {"trials": "0"},
        {"axis": "ns"},               # axis without values
        {"axis": "ns", "values": "0"},
    ])
    def test_validation_errors(self, mapping):
        with pytest.raises(ConfigError):
            spec_from_mapping(mapping)

    def test_desk_scale_warning(self):
        spec = ExperimentSpec(ns=80)
        with pytest.warns(UserWarning, match="desk-scale"):
            spec.system_config()


class TestOutputPlumbing:
    def test_resolve_output_path_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MMSOP_OUTPUT_DIR", str(tmp_path / "out"))
        path = resolve_output_path("a.csv")
        assert path == str(tmp_path / "out" / "a.csv")
        assert (tmp_path / "out").is_dir()

    def test_explicit_dir_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MMSOP_OUTPUT_DIR", str(tmp_path / "env"))
        path = resolve_output_path("a.csv", out_dir=str(tmp_path / "arg"))
        assert path == str(tmp_path / "arg" / "a.csv")

    def test_write_outputs_pair(self, tmp_path):
        spec = ExperimentSpec(**SMALL)
        path = str(tmp_path / "run.csv")
        csv_path, meta_path = write_outputs(path, "h\n1\n", meta_text(spec, "sweep"))
        assert open(csv_path).read() == "h\n1\n"
        meta = open(meta_path).read()
        assert "command = sweep" in meta
        assert "k = 2" in meta and "mmsop_version" in meta


class TestValidateSop:
    def test_runs_and_passes(self):
        spec = ExperimentSpec(**{**SMALL, "samples": 20_000})
        text, summary = validate_sop(spec)
        rows = parse_csv(text)
        assert rows[0][0] == "user"
        assert len(rows) == 1 + spec.k
        assert isinstance(summary["all_pass"], bool)
        for row in rows[1:]:
            assert row[-1] in ("pass", "fail")
            assert 0.0 <= float(row[1]) <= 1.0

    def test_monte_carlo_matches_closed_form(self):
        spec = ExperimentSpec(**{**SMALL, "samples": 50_000})
        text, summary = validate_sop(spec)
        assert summary["all_pass"] is True

    def test_monte_carlo_sop_bounds(self):
        spec = ExperimentSpec(**SMALL)
        cfg = spec.system_config()
        rng = trial_rng(0, 0)
        chs = sample_channels(cfg, rng)
        W = rng.standard_normal((cfg.K, cfg.Nt)) + 1j * rng.standard_normal((cfg.K, cfg.Nt))
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        est = monte_carlo_sop(cfg, chs, np.zeros(cfg.Ns), W, 5_000, rng)
        assert est.shape == (cfg.K,)
        assert np.all((est >= 0) & (est <= 1))


class TestRunOptimize:
    def test_iteration_rows(self):
        spec = ExperimentSpec(**SMALL, schemes=("mm-sop", "mm-sinr"))
        text, summary = run_optimize(spec)
        rows = parse_csv(text)
        header, body = rows[0], rows[1:]
        assert header[:3] == ["scheme", "iteration", "p_out_max"]
        schemes = {r[0] for r in body}
        assert schemes == {"mm-sop", "mm-sinr"}
        for r in body:
            assert 0.0 <= float(r[3]) <= float(r[2]) <= 1.0
        assert "duration_s_mm-sop" in summary


class TestRunSweep:
    def test_grid_and_aggregates(self):
        spec = ExperimentSpec(**SMALL, axis="ns", values=(2, 4))
        text, summary = run_sweep(spec)
        rows = parse_csv(text)
        trial_rows = [r for r in rows[1:] if r[0] == "trial"]
        agg_rows = [r for r in rows[1:] if r[0] == "aggregate"]
        assert len(trial_rows) == 2 * spec.trials  # 2 values x 1 scheme
        assert len(agg_rows) == 2
        assert summary["failures"] == 0
        for r in agg_rows:
            count = int(r[6])
            assert count == spec.trials
        # aggregate mean equals the mean of its trial rows
        for value in ("2", "4"):
            sops = [float(r[7]) for r in trial_rows if r[3] == value]
            agg = next(r for r in agg_rows if r[3] == value)
            assert float(agg[7]) == pytest.approx(np.mean(sops), rel=1e-9)

    def test_csv_byte_determinism(self):
        spec = ExperimentSpec(**SMALL, axis="ne", values=(1, 2))
        a, _ = run_sweep(spec)
        b, _ = run_sweep(spec)
        assert a == b

    def test_failure_rows_keep_sweep_alive(self, monkeypatch):
        def boom(*args, **kwargs):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(experiments, "run_ao", boom)
        spec = ExperimentSpec(**SMALL)
        text, summary = run_sweep(spec)
        rows = parse_csv(text)
        failures = [r for r in rows[1:] if r[0] == "failure"]
        assert len(failures) == spec.trials
        assert summary["failures"] == spec.trials
        assert "RuntimeError: synthetic failure" in failures[0][-1]


class TestRunCompare:
    def test_paired_diff_column(self):
        spec = ExperimentSpec(**SMALL)
        text, summary = run_compare(spec)
        rows = parse_csv(text)
        assert rows[0][-1] == "paired_diff"
        trial_rows = [r for r in rows[1:] if r[0] == "trial"]
        assert {r[1] for r in trial_rows} == {"mm-sop", "mm-sinr"}
        by = {(r[1], r[4]): r for r in trial_rows}
        for t in range(spec.trials):
            a = by[("mm-sinr", str(t))]
            b = by[("mm-sop", str(t))]
            diff = float(a[7]) - float(b[7])
            assert float(a[-1]) == pytest.approx(diff, abs=1e-12)
            assert a[-1] == b[-1]
        assert summary["pairs"] == spec.trials
        assert 0 <= summary["wins"] <= spec.trials
