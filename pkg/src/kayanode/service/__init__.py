"""HTTP service exposing forecasts and scenario exploration.

Read endpoints are pure functions of immutable model snapshots; fine-tunes
run as queued jobs that publish new snapshot versions.
"""
from __future__ import annotations

import queue
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional, Union

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..artifacts import ModelBundle, load_bundle
from ..errors import KayaNodeError
from ..pipeline import scenario_forecast
from ..scenario import ScenarioSpec
from ..training import TrainConfig
from ..variables import VARIABLE_KEYS
from .schemas import (ErrorResponse, FinetuneRequest, ForecastRequest,
                      ForecastResponse, JobResponse, JobResult, ModelInfo,
                      PanelResponse, ScenarioRequest, SubmittedJob)
from .store import ModelStore, UnknownModelError

__all__ = ["create_app", "load_bundles", "ModelStore"]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def load_bundles(data_dir: Path) -> dict[str, ModelBundle]:
    bundles = {}
    for path in sorted(Path(data_dir).glob("*.json")):
        bundle = load_bundle(path)
        bundles[bundle.country] = bundle
    if not bundles:
        raise KayaNodeError(f"no model bundles (*.json) found in {data_dir}")
    return bundles


def create_app(source: Union[Path, str, dict, ModelStore]) -> FastAPI:
    """Build the service around a data directory, bundle dict, or store."""
    if isinstance(source, ModelStore):
        store = source
    elif isinstance(source, dict):
        store = ModelStore(source)
    else:
        store = ModelStore(load_bundles(Path(source)))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        store.start()
        yield
        store.stop()

    app = FastAPI(title="kayanode", version="0.1.0", lifespan=lifespan)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc.errors()))

    @app.exception_handler(UnknownModelError)
    async def on_unknown(request: Request, exc: UnknownModelError):
        return _error(404, "not_found", str(exc.args[0] if exc.args else exc))

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return _error(400, "invalid_request", str(exc))

    @app.exception_handler(KayaNodeError)
    async def on_domain_error(request: Request, exc: KayaNodeError):
        return _error(400, "domain_error", str(exc))

    @app.get("/api/countries", response_model=list[str])
    def countries():
        return store.countries()

    @app.get("/api/panel/{country}", response_model=PanelResponse,
             responses={404: {"model": ErrorResponse}})
    def panel(country: str):
        snap = store.snapshot(country)
        p = snap.bundle.panel
        values = {}
        for i, key in enumerate(VARIABLE_KEYS):
            column = []
            for row in range(len(p.years)):
                column.append(float(p.values[row, i]) if p.mask[row, i] else None)
            values[key] = column
        emissions = []
        for row in range(len(p.years)):
            if p.mask[row, :4].all():
                emissions.append(float(np.prod(p.values[row, :4])))
            else:
                emissions.append(None)
        return PanelResponse(country=country,
                             years=[int(y) for y in p.years],
                             values=values,
                             emissions=emissions,
                             train_end=snap.bundle.train_end)

    @app.get("/api/models", response_model=list[ModelInfo])
    def models():
        out = []
        for country in store.countries():
            versions = store.versions(country)
            snap = store.snapshot(country)
            kinds = ["node"] + (["var"] if snap.bundle.var is not None else [])
            out.append(ModelInfo(country=country, versions=versions,
                                 latest_version=versions[-1],
                                 train_end=snap.bundle.train_end,
                                 kinds=kinds))
        return out

    @app.post("/api/forecast", response_model=ForecastResponse,
              responses={400: {"model": ErrorResponse}, 404: {"model": ErrorResponse}})
    def forecast(req: ForecastRequest):
        snap = store.snapshot(req.country, req.version)
        result = snap.bundle.forecast(req.model, req.horizon, version=snap.version)
        return ForecastResponse(**result.to_dict())

    @app.post("/api/scenario", response_model=ForecastResponse,
              responses={400: {"model": ErrorResponse}, 404: {"model": ErrorResponse}})
    def scenario(req: ScenarioRequest):
        snap = store.snapshot(req.country, req.version)
        spec = ScenarioSpec.from_dict(req.spec.to_spec_dict())
        result = scenario_forecast(snap.bundle, spec, req.horizon)
        result.metadata["version"] = snap.version
        return ForecastResponse(**result.to_dict())

    @app.post("/api/finetune", response_model=SubmittedJob, status_code=202,
              responses={400: {"model": ErrorResponse}, 404: {"model": ErrorResponse},
                         429: {"model": ErrorResponse}})
    def finetune(req: FinetuneRequest):
        spec = ScenarioSpec.from_dict(req.spec.to_spec_dict())
        cfg = TrainConfig.from_dict(req.config) if req.config else None
        try:
            job = store.submit_finetune(req.country, spec, cfg, req.version)
        except queue.Full:
            return _error(429, "queue_full", "fine-tune queue is full; retry later")
        return SubmittedJob(job_id=job.job_id)

    @app.get("/api/jobs/{job_id}", response_model=JobResponse,
             responses={404: {"model": ErrorResponse}})
    def job_status(job_id: str):
        job = store.job(job_id)
        result = JobResult(**job.result) if job.result else None
        return JobResponse(job_id=job.job_id, country=job.country,
                           status=job.status, error=job.error, result=result)

    return app
