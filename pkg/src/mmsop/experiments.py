"""Experiment harness: Monte Carlo outage validation, optimization traces,
parameter sweeps, and scheme comparison, emitted as CSV plus a .meta file.

All randomness derives from (seed, trial) via the channel module's stream
splitting, and CSV text is a pure function of the resolved experiment
spec, so a rerun with identical inputs reproduces the byte stream
exactly. Wall-clock timings therefore go to the .meta file, never into
the CSV. Trials are embarrassingly parallel; rows are ordered by their
deterministic sort key (sweep value, scheme, trial) regardless of
scheduling.
"""

from __future__ import annotations

import csv
import io
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .ao import AOConfig, run_ao, run_baseline_mmsinr
from .channel import (SystemConfig, sample_channels, sample_eve_channels,
                      trial_rng)
from .metrics import main_capacity, secrecy_outage_probability, sinr, user_metrics

SCHEMES = ("mm-sop", "mm-sinr")
SWEEP_AXES = ("none", "ns", "nt", "ne")
DESK_SCALE_LIMIT = 65  # largest lifted dimension the solver budget is tuned for


class ConfigError(ValueError):
    """Malformed experiment configuration (unknown key, bad value)."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Resolved configuration of one harness invocation."""

    k: int = 4
    nt: int = 10
    ns: int = 32
    ne: int = 2
    snr_db: float = 1.0
    rate: float = 2.0
    seed: int = 0
    trials: int = 20
    samples: int = 100_000       # Monte Carlo eavesdropper draws
    axis: str = "none"           # sweep axis: none | ns | nt | ne
    values: tuple = ()           # sweep values along the axis
    schemes: tuple = ("mm-sop",)
    xi: float = 1e-4
    iter_max: int = 20
    tau: float = 1e-5
    i_g: int = 1000
    workers: int = 0             # 0 = number of available execution units

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; use one of {SWEEP_AXES}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; use one of {SCHEMES}")
        if not self.schemes:
            raise ConfigError("at least one scheme required")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.axis != "none" and not self.values:
            raise ConfigError("sweep axis given without values")
        if any(int(v) < 1 for v in self.values):
            raise ConfigError("sweep values must be positive integers")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))

    def system_config(self, axis_value=None) -> SystemConfig:
        dims = {"k": self.k, "nt": self.nt, "ns": self.ns, "ne": self.ne}
        if axis_value is not None and self.axis != "none":
            dims[self.axis] = int(axis_value)
        if dims["ns"] + 1 > DESK_SCALE_LIMIT:
            warnings.warn(
                f"Ns = {dims['ns']} exceeds the desk-scale tuning limit "
                f"(Ns + 1 > {DESK_SCALE_LIMIT}); solver budgets may be insufficient",
                stacklevel=2,
            )
        return SystemConfig.from_snr_db(
            K=dims["k"], Nt=dims["nt"], Ns=dims["ns"], Ne=dims["ne"],
            snr_db=self.snr_db, rate=self.rate, seed=self.seed,
        )

    def ao_config(self, scheme="mm-sop") -> AOConfig:
        return AOConfig(xi=self.xi, iter_max=self.iter_max, tau=self.tau,
                        i_g=self.i_g, objective=scheme)


_BOOLEANS = {"true": True, "false": False, "yes": True, "no": False}
_LIST_KEYS = ("values", "schemes")
_FLOAT_KEYS = ("snr_db", "rate", "xi", "tau")
_STR_KEYS = ("axis",)


def parse_config_text(text) -> dict:
    """Parse flat ``key = value`` UTF-8 config text into a mapping.

    Blank lines and ``#`` comments are ignored; list-valued keys take
    comma-separated entries.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lower()] = value
    return out


def spec_from_mapping(mapping) -> ExperimentSpec:
    """Build a spec from string-valued keys (config file and/or CLI flags)."""
    kwargs = {}
    valid = set(ExperimentSpec.__dataclass_fields__)
    for key, value in mapping.items():
        key = key.lower()
        if key not in valid:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, str):
            if key in _LIST_KEYS:
                value = tuple(part.strip() for part in value.split(",") if part.strip())
            elif key in _FLOAT_KEYS:
                value = float(value)
            elif key not in _STR_KEYS:
                value = int(value)
        kwargs[key] = value
    try:
        return ExperimentSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(value):
    if isinstance(value, float) or isinstance(value, np.floating):
        return f"{float(value):.12g}"
    return str(value)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")  # RFC-4180 quoting rules
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def meta_text(spec: ExperimentSpec, command, extra=None) -> str:
    """Resolved config and library version for the adjacent .meta file."""
    lines = [f"mmsop_version = {__version__}", f"command = {command}"]
    for key, value in asdict(spec).items():
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {_fmt(value)}")
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def resolve_output_path(filename, out_dir=None):
    """Join against the output dir (arg, else $MMSOP_OUTPUT_DIR, else cwd)."""
    base = out_dir or os.environ.get("MMSOP_OUTPUT_DIR") or "."
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, filename)


def write_outputs(path, csv_text, meta):
    """Write the CSV and its adjacent .meta file; returns both paths."""
    meta_path = os.path.splitext(path)[0] + ".meta"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text)
    with open(meta_path, "w", encoding="utf-8") as fh:
        fh.write(meta)
    return path, meta_path


def monte_carlo_sop(cfg: SystemConfig, chs, theta, W, samples, rng, chunk=20_000):
    """Empirical per-user outage over random eavesdropper channels.

    Draws ``samples`` i.i.d. eavesdropper realizations, computes the
    wiretap capacity C_w = log2(1 + (rho_k / sigma_e^2) ||h_e,k + G_e Phi
    f_k||^2) per user and counts C_w >= C_m - R events.
    """
    phi_vec = np.exp(1j * np.asarray(theta))
    caps = np.array([main_capacity(sinr(chs, theta, W, cfg, k)) for k in range(cfg.K)])
    margins = caps - cfg.rate
    hits = np.zeros(cfg.K)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        h_e = (rng.standard_normal((n, cfg.Ne, cfg.K))
               + 1j * rng.standard_normal((n, cfg.Ne, cfg.K))) / np.sqrt(2.0)
        g_e = (rng.standard_normal((n, cfg.Ne, cfg.Ns))
               + 1j * rng.standard_normal((n, cfg.Ne, cfg.Ns))) / np.sqrt(2.0)
        for k in range(cfg.K):
            v = h_e[:, :, k] + g_e @ (phi_vec * chs.F[:, k])
            c_w = np.log2(1.0 + (cfg.rho[k] / cfg.sigma2_e)
                          * np.sum(np.abs(v) ** 2, axis=1))
            hits[k] += np.count_nonzero(c_w >= margins[k])
        done += n
    return hits / samples


def validate_sop(spec: ExperimentSpec):
    """Closed-form vs Monte Carlo outage check at a random (Phi, W) pair.

    Returns (csv_text, summary). A user passes when the absolute gap is
    within three binomial standard errors plus 0.005.
    """
    cfg = spec.system_config()
    rng = trial_rng(spec.seed, 0)
    chs = sample_channels(cfg, rng)
    theta = rng.uniform(0.0, 2.0 * np.pi, cfg.Ns)
    W = rng.standard_normal((cfg.K, cfg.Nt)) + 1j * rng.standard_normal((cfg.K, cfg.Nt))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    empirical = monte_carlo_sop(cfg, chs, theta, W, spec.samples, rng)
    rows = []
    all_pass = True
    for k in range(cfg.K):
        cap = main_capacity(sinr(chs, theta, W, cfg, k))
        closed = secrecy_outage_probability(cap, cfg, chs.f(k), k)
        gap = abs(closed - empirical[k])
        se = np.sqrt(max(closed * (1.0 - closed), 1e-12) / spec.samples)
        ok = bool(gap <= 3.0 * se + 0.005)
        all_pass = all_pass and ok
        rows.append([k, closed, empirical[k], gap, 3.0 * se + 0.005,
                     "pass" if ok else "fail"])
    text = _csv_text(
        ["user", "sop_closed_form", "sop_empirical", "abs_gap", "tolerance", "result"],
        rows,
    )
    return text, {"all_pass": all_pass, "samples": spec.samples}


def _final_metrics(chs, cfg, phi, W):
    ms = [user_metrics(chs, phi.theta, W, cfg, k) for k in range(cfg.K)]
    sops = np.array([m.sop for m in ms])
    sinrs = np.array([m.sinr for m in ms])
    return sops, sinrs


def run_optimize(spec: ExperimentSpec):
    """One AO run per selected scheme on a single channel draw (trial 0).

    Emits per-iteration rows: the max/min per-user outage, the relaxed
    SDR bound, and the inner Dinkelbach iteration count and final lambda.
    """
    rows = []
    durations = {}
    for scheme in spec.schemes:
        cfg = spec.system_config()
        rng = trial_rng(spec.seed, 0)
        chs = sample_channels(cfg, rng)
        runner = run_ao if scheme == "mm-sop" else run_baseline_mmsinr
        started = time.perf_counter()
        _, _, trace = runner(chs, cfg, spec.ao_config(scheme), rng)
        durations[f"duration_s_{scheme}"] = round(time.perf_counter() - started, 3)
        for rec in trace.iterations:
            lam = rec.dinkelbach[-1][0] if rec.dinkelbach else ""
            rows.append([scheme, rec.index, rec.p_out, rec.p_min, rec.sdr_bound,
                         len(rec.dinkelbach), lam, trace.status])
    text = _csv_text(
        ["scheme", "iteration", "p_out_max", "p_out_min", "sdr_bound",
         "dinkelbach_iters", "lambda", "status"],
        rows,
    )
    return text, durations


def _trial_key(row):
    return (row["value"], row["scheme"], row["trial"])


def _run_one_trial(payload):
    """Run one (sweep value, scheme, trial) cell; top-level for pickling."""
    spec_kwargs, value, scheme, trial = payload
    spec = ExperimentSpec(**spec_kwargs)
    cfg = spec.system_config(axis_value=value)
    rng = trial_rng(spec.seed, trial)
    chs = sample_channels(cfg, rng)
    runner = run_ao if scheme == "mm-sop" else run_baseline_mmsinr
    started = time.perf_counter()
    try:
        phi, W, trace = runner(chs, cfg, spec.ao_config(scheme), rng)
    except Exception as exc:  # noqa: BLE001 - failure rows keep the sweep alive
        return {"value": value, "scheme": scheme, "trial": trial,
                "error": f"{type(exc).__name__}: {exc}", "duration_s": 0.0}
    sops, sinrs = _final_metrics(chs, cfg, phi, W)
    bound = trace.iterations[-1].sdr_bound if trace.iterations else ""
    return {
        "value": value, "scheme": scheme, "trial": trial, "error": None,
        "seed": spec.seed, "iterations": len(trace.iterations),
        "max_sop": float(sops.max()), "min_sop": float(sops.min()),
        "sinrs": ";".join(_fmt(v) for v in sinrs), "sdr_bound": bound,
        "status": trace.status, "duration_s": time.perf_counter() - started,
    }


def _run_cells(spec: ExperimentSpec, cells):
    payloads = [(asdict(spec), value, scheme, trial) for value, scheme, trial in cells]
    workers = spec.workers or os.cpu_count() or 1
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one_trial, payloads))
    else:
        results = [_run_one_trial(p) for p in payloads]
    return sorted(results, key=_trial_key)


def _result_rows(results, axis):
    rows = []
    for r in results:
        if r["error"] is not None:
            rows.append(["failure", r["scheme"], axis, r["value"], r["trial"],
                         "", "", "", "", "", "", r["error"]])
        else:
            rows.append(["trial", r["scheme"], axis, r["value"], r["trial"],
                         r["seed"], r["iterations"], r["max_sop"], r["min_sop"],
                         r["sinrs"], r["sdr_bound"], r["status"]])
    return rows


def _aggregate_rows(results, axis):
    rows = []
    groups = sorted({(r["value"], r["scheme"]) for r in results})
    for value, scheme in groups:
        sops = [r["max_sop"] for r in results
                if r["error"] is None and (r["value"], r["scheme"]) == (value, scheme)]
        if not sops:
            continue
        rows.append(["aggregate", scheme, axis, value, "", "", len(sops),
                     float(np.mean(sops)), float(np.std(sops)), "", "", ""])
    return rows


_SWEEP_HEADER = ["row_type", "scheme", "axis", "value", "trial", "seed",
                 "iterations", "max_sop", "min_sop", "sinrs", "sdr_bound", "status"]


def run_sweep(spec: ExperimentSpec):
    """Sweep value x scheme x trial grid; per-value aggregates appended.

    Aggregate rows reuse the header: iterations carries the trial count
    and max_sop/min_sop carry the mean and standard deviation of max_sop.
    """
    values = spec.values if spec.axis != "none" else (0,)
    cells = [(v, s, t) for v in values for s in spec.schemes for t in range(spec.trials)]
    started = time.perf_counter()
    results = _run_cells(spec, cells)
    rows = _result_rows(results, spec.axis) + _aggregate_rows(results, spec.axis)
    text = _csv_text(_SWEEP_HEADER, rows)
    failures = sum(r["error"] is not None for r in results)
    return text, {"cells": len(cells), "failures": failures,
                  "duration_s": round(time.perf_counter() - started, 3)}


def run_compare(spec: ExperimentSpec):
    """Paired-scheme sweep with a per-trial outage difference column.

    Both schemes run on identical channel draws; paired_diff is
    max_sop(mm-sinr) - max_sop(mm-sop), so positive values favour the
    outage-fair scheme.
    """
    spec = ExperimentSpec(**{**asdict(spec), "schemes": SCHEMES})
    values = spec.values if spec.axis != "none" else (0,)
    cells = [(v, s, t) for v in values for s in SCHEMES for t in range(spec.trials)]
    started = time.perf_counter()
    results = _run_cells(spec, cells)
    by_cell = {(r["value"], r["scheme"], r["trial"]): r for r in results}
    rows = _result_rows(results, spec.axis)
    for row in rows:
        if row[0] != "trial":
            row.append("")
            continue
        value, scheme, trial = row[3], row[1], row[4]
        a = by_cell.get((value, "mm-sinr", trial))
        b = by_cell.get((value, "mm-sop", trial))
        if a and b and a["error"] is None and b["error"] is None:
            row.append(a["max_sop"] - b["max_sop"])
        else:
            row.append("")
    agg = _aggregate_rows(results, spec.axis)
    wins = mean_diff = 0
    diffs = []
    for value in values:
        for trial in range(spec.trials):
            a = by_cell.get((value, "mm-sinr", trial))
            b = by_cell.get((value, "mm-sop", trial))
            if a and b and a["error"] is None and b["error"] is None:
                diffs.append(a["max_sop"] - b["max_sop"])
    if diffs:
        wins = int(sum(d >= 0 for d in diffs))
        mean_diff = float(np.mean(diffs))
    for row in agg:
        row.append("")
    text = _csv_text(_SWEEP_HEADER + ["paired_diff"], rows + agg)
    return text, {"pairs": len(diffs), "wins": wins, "mean_paired_diff": mean_diff,
                  "duration_s": round(time.perf_counter() - started, 3)}
