"""HTTP service exposing the experiment harness.

Each endpoint accepts the experiment spec as JSON, runs the
corresponding harness command, and returns the CSV text, the .meta text,
and a small summary dict. The CLI drives this app in-process by default
(ASGI transport), so the service is also the single code path for local
runs; file writing stays client-side.
"""

from __future__ import annotations

from typing import Tuple

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, experiments
from .experiments import ConfigError, ExperimentSpec


class SpecModel(BaseModel):
    """Wire form of :class:`mmsop.experiments.ExperimentSpec`."""

    k: int = 4
    nt: int = 10
    ns: int = 32
    ne: int = 2
    snr_db: float = 1.0
    rate: float = 2.0
    seed: int = 0
    trials: int = Field(default=20, ge=1)
    samples: int = 100_000
    axis: str = "none"
    values: Tuple[int, ...] = ()
    schemes: Tuple[str, ...] = ("mm-sop",)
    xi: float = 1e-4
    iter_max: int = 20
    tau: float = 1e-5
    i_g: int = 1000
    workers: int = 0

    def to_spec(self) -> ExperimentSpec:
        try:
            return ExperimentSpec(**self.model_dump())
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc


class RunResponse(BaseModel):
    command: str
    csv: str
    meta: str
    summary: dict


class HealthResponse(BaseModel):
    status: str
    version: str


app = FastAPI(title="mmsop", version=__version__,
              description="Min-max secrecy-outage optimization experiments "
                          "for an IRS-assisted multi-user uplink.")


def _respond(command, runner, model: SpecModel) -> RunResponse:
    spec = model.to_spec()
    try:
        csv_text, summary = runner(spec)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    meta = experiments.meta_text(spec, command, extra=summary)
    return RunResponse(command=command, csv=csv_text, meta=meta, summary=summary)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/validate-sop", response_model=RunResponse)
def validate_sop(model: SpecModel) -> RunResponse:
    if model.samples < 10_000:
        raise HTTPException(status_code=422, detail="samples must be >= 10000")
    return _respond("validate-sop", experiments.validate_sop, model)


@app.post("/optimize", response_model=RunResponse)
def optimize(model: SpecModel) -> RunResponse:
    return _respond("optimize", experiments.run_optimize, model)


@app.post("/sweep", response_model=RunResponse)
def sweep(model: SpecModel) -> RunResponse:
    return _respond("sweep", experiments.run_sweep, model)


@app.post("/compare", response_model=RunResponse)
def compare(model: SpecModel) -> RunResponse:
    return _respond("compare", experiments.run_compare, model)
