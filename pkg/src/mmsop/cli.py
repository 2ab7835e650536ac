"""Command-line client for the experiment service.

Thin by design: every subcommand assembles an experiment spec from an
optional flat ``key = value`` config file plus flag overrides, posts it
to the service (in-process by default, or a remote ``--server`` URL),
and writes the returned CSV and .meta files.

Exit codes: 0 on success, nonzero otherwise with a one-line
machine-parsable ``error: <category>: <message>`` on stderr, where
category is one of config, validation, io, server, internal.
"""

from __future__ import annotations

import sys

import click
import httpx

from . import __version__
from .experiments import (ConfigError, parse_config_text, resolve_output_path,
                          spec_from_mapping, write_outputs)

DEFAULT_TIMEOUT = 3600.0


class CliError(click.ClickException):
    """Carries a machine-parsable error category to the exit path."""

    def __init__(self, category, message):
        super().__init__(message)
        self.category = category

    def show(self, file=None):
        click.echo(f"error: {self.category}: {self.message}", err=True)


def _client(server):
    if server:
        return httpx.Client(base_url=server, timeout=DEFAULT_TIMEOUT)
    from fastapi.testclient import TestClient  # sync in-process ASGI client

    from .service import app  # imported lazily so --server runs stay light

    return TestClient(app)


def _load_mapping(config_path, sets, flag_values):
    mapping = {}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                mapping.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise CliError("io", f"cannot read config file: {exc}")
        except ConfigError as exc:
            raise CliError("config", str(exc))
    for item in sets:
        if "=" not in item:
            raise CliError("config", f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        mapping[key] = value
    for key, value in flag_values.items():
        if value is not None:
            mapping[key] = str(value)
    return mapping


def _run_command(command, config_path, sets, flag_values, server, output, out_dir):
    mapping = _load_mapping(config_path, sets, flag_values)
    try:
        spec = spec_from_mapping(mapping)  # fail fast, before any network call
    except ConfigError as exc:
        raise CliError("config", str(exc))
    try:
        with _client(server) as client:
            resp = client.post(f"/{command}", json=mapping_to_payload(spec))
    except httpx.HTTPError as exc:
        raise CliError("server", f"request failed: {exc}")
    if resp.status_code == 422:
        detail = resp.json().get("detail", resp.text)
        raise CliError("validation", str(detail))
    if resp.status_code != 200:
        raise CliError("server", f"HTTP {resp.status_code}: {resp.text[:200]}")
    body = resp.json()
    path = resolve_output_path(output or f"{command}.csv", out_dir)
    try:
        csv_path, meta_path = write_outputs(path, body["csv"], body["meta"])
    except OSError as exc:
        raise CliError("io", f"cannot write {path}: {exc}")
    click.echo(f"wrote {csv_path} and {meta_path}")
    for key, value in body["summary"].items():
        click.echo(f"{key} = {value}")
    if body["summary"].get("all_pass") is False:
        raise CliError("validation", "closed-form vs Monte Carlo outage mismatch")


def mapping_to_payload(spec):
    from dataclasses import asdict

    return asdict(spec)


def _common_options(fn):
    decorators = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="Flat key = value config file."),
        click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
                     help="Override a config key (repeatable)."),
        click.option("--seed", type=int, default=None, help="Base RNG seed."),
        click.option("--trials", type=int, default=None, help="Independent channel draws."),
        click.option("--workers", type=int, default=None,
                     help="Parallel trial processes (0 = all cores)."),
        click.option("--server", default=None, metavar="URL",
                     help="Remote service URL (default: run in-process)."),
        click.option("--output", default=None, metavar="FILE.csv",
                     help="Output CSV filename (default: <command>.csv)."),
        click.option("--output-dir", "out_dir", default=None,
                     envvar="MMSOP_OUTPUT_DIR", show_envvar=True,
                     help="Directory for outputs."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


@click.group()
@click.version_option(version=__version__)
def main():
    """Min-max secrecy-outage optimization experiments."""


@main.command("validate-sop")
@_common_options
@click.option("--samples", type=int, default=None, help="Monte Carlo eavesdropper draws.")
def validate_sop_cmd(config_path, sets, seed, trials, workers, server, output,
                     out_dir, samples):
    """Check the closed-form outage against a Monte Carlo oracle."""
    flags = {"seed": seed, "trials": trials, "workers": workers, "samples": samples}
    _run_command("validate-sop", config_path, sets, flags, server, output, out_dir)


@main.command("optimize")
@_common_options
@click.option("--schemes", default=None, help="Comma-separated: mm-sop,mm-sinr.")
@click.option("--iter-max", type=int, default=None, help="AO iteration cap.")
def optimize_cmd(config_path, sets, seed, trials, workers, server, output,
                 out_dir, schemes, iter_max):
    """Run one alternating-optimization convergence trace per scheme."""
    flags = {"seed": seed, "trials": trials, "workers": workers,
             "schemes": schemes, "iter_max": iter_max}
    _run_command("optimize", config_path, sets, flags, server, output, out_dir)


@main.command("sweep")
@_common_options
@click.option("--axis", default=None, type=click.Choice(["none", "ns", "nt", "ne"]),
              help="Sweep axis.")
@click.option("--values", default=None, help="Comma-separated sweep values.")
@click.option("--schemes", default=None, help="Comma-separated: mm-sop,mm-sinr.")
def sweep_cmd(config_path, sets, seed, trials, workers, server, output,
              out_dir, axis, values, schemes):
    """Sweep a dimension over seeds and emit per-trial and aggregate rows."""
    flags = {"seed": seed, "trials": trials, "workers": workers,
             "axis": axis, "values": values, "schemes": schemes}
    _run_command("sweep", config_path, sets, flags, server, output, out_dir)


@main.command("compare")
@_common_options
@click.option("--axis", default=None, type=click.Choice(["none", "ns", "nt", "ne"]),
              help="Sweep axis.")
@click.option("--values", default=None, help="Comma-separated sweep values.")
def compare_cmd(config_path, sets, seed, trials, workers, server, output,
                out_dir, axis, values):
    """Run both schemes on paired channel draws with difference columns."""
    flags = {"seed": seed, "trials": trials, "workers": workers,
             "axis": axis, "values": values}
    _run_command("compare", config_path, sets, flags, server, output, out_dir)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
