"""HTTP service exposing detection runs, statistics and geometry.

One dataset per server instance, loaded at startup; runs vary parameters
only. A single background worker drains a FIFO queue, so reads always come
from immutable snapshots (or answer 202 while a run is still moving) and a
run's artifacts are a pure function of (dataset, params).
"""

from __future__ import annotations

import itertools
import queue
import threading
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import pipeline
from .ingest import CallIndex
from .model import Params, TimeGrid, validate_params
from .pipeline import Dataset


class ParamOverrides(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epsilon_n: Optional[int] = None
    epsilon_lt: Optional[int] = None
    epsilon_ci: Optional[int] = None
    epsilon_p: Optional[float] = None
    epsilon_si: Optional[float] = None
    min_locations: Optional[int] = None
    window_minutes: Optional[int] = None

    def apply(self, base: Params) -> Params:
        return Params(
            scale=self.epsilon_n if self.epsilon_n is not None else base.scale,
            lifetime=self.epsilon_lt if self.epsilon_lt is not None else base.lifetime,
            commitment=self.epsilon_ci if self.epsilon_ci is not None else base.commitment,
            commitment_probability=(self.epsilon_p if self.epsilon_p is not None
                                    else base.commitment_probability),
            similarity=self.epsilon_si if self.epsilon_si is not None else base.similarity,
            min_locations=(self.min_locations if self.min_locations is not None
                           else base.min_locations),
            half_window=(self.window_minutes * 60 if self.window_minutes is not None
                         else base.half_window),
        )


def params_to_dict(p: Params) -> dict:
    return {
        "epsilon_n": p.scale,
        "epsilon_lt": p.lifetime,
        "epsilon_ci": p.commitment,
        "epsilon_p": p.commitment_probability,
        "epsilon_si": p.similarity,
        "min_locations": p.min_locations,
        "window_minutes": p.half_window // 60,
    }


class RunCreated(BaseModel):
    run_id: str
    status: str


class RunInfo(BaseModel):
    run_id: str
    status: str
    params: dict
    error: Optional[str] = None


@dataclass
class _Run:
    run_id: str
    params: Params
    status: str = "queued"            # queued | running | done | failed
    artifacts: dict[str, bytes] = field(default_factory=dict)
    error: Optional[str] = None


class RunRegistry:
    def __init__(self, dataset: Optional[Dataset]):
        self.dataset = dataset
        self._runs: dict[str, _Run] = {}
        self._order: list[str] = []
        self._lock = threading.Lock()
        self._queue: "queue.Queue[str]" = queue.Queue()
        self._counter = itertools.count(1)
        self._worker = threading.Thread(target=self._drain, daemon=True)
        self._worker.start()

    def submit(self, params: Params) -> _Run:
        run = _Run(run_id=f"run-{next(self._counter):04d}", params=params)
        with self._lock:
            self._runs[run.run_id] = run
            self._order.append(run.run_id)
        self._queue.put(run.run_id)
        return run

    def get(self, run_id: str) -> Optional[_Run]:
        with self._lock:
            return self._runs.get(run_id)

    def list(self) -> list[_Run]:
        with self._lock:
            return [self._runs[r] for r in self._order]

    def _drain(self) -> None:
        while True:
            run_id = self._queue.get()
            run = self.get(run_id)
            if run is None:
                continue
            with self._lock:
                run.status = "running"
            try:
                artifacts = self._execute(run.params)
            except Exception as exc:   # surface, don't kill the worker
                with self._lock:
                    run.status = "failed"
                    run.error = str(exc)
                continue
            with self._lock:
                run.artifacts = artifacts
                run.status = "done"

    def _execute(self, params: Params) -> dict[str, bytes]:
        dataset = self.dataset
        if dataset is None:
            raise RuntimeError("no dataset loaded")
        if params.half_window != dataset.grid.half_window:
            dataset = reindex_dataset(dataset, params.half_window)
        run = pipeline.run_detection(dataset, params)
        return {
            "events": pipeline.render_json(pipeline.events_payload(run, dataset)),
            "timeseries": pipeline.render_json(pipeline.timeseries_payload(run)),
            "analyst": pipeline.render_json({
                "params": params_to_dict(params),
                **run.stats.to_dict(),
            }),
        }


def reindex_dataset(dataset: Dataset, half_window: int) -> Dataset:
    """Same calls under a different cluster window."""
    min_at = min(c.at for c in dataset.calls)
    max_at = max(c.at for c in dataset.calls)
    grid = TimeGrid.spanning(min_at, max_at, step=dataset.grid.step,
                             half_window=half_window)
    index = CallIndex.empty(grid)
    from .model import grid_index_of
    for call in dataset.calls:
        for t in grid_index_of(call.at, grid):
            index.add(t, call.antenna_id, call.user_id, call.at)
    return Dataset(registry=dataset.registry, calls=dataset.calls, index=index,
                   grid=grid, report=dataset.report, profiles=dataset.profiles,
                   pois=dataset.pois)


def create_app(dataset: Optional[Dataset] = None,
               default_params: Optional[Params] = None,
               ui_assets: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="crowdlens", docs_url="/docs")
    registry = RunRegistry(dataset)
    base_params = default_params or Params()
    app.state.registry = registry

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"error": _error_name(exc.status_code),
                                     "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"error": "invalid_params",
                                     "detail": jsonable_encoder(exc.errors())})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/antennas")
    def antennas():
        if registry.dataset is None:
            return {"antennas": []}
        return {"antennas": [
            {"antenna_id": a.antenna_id, "lon": a.lon, "lat": a.lat}
            for a in registry.dataset.registry.antennas.values()
        ]}

    @app.get("/params")
    def default_parameters():
        return {"params": params_to_dict(base_params)}

    @app.post("/runs", response_model=RunCreated, status_code=202)
    def create_run(overrides: Optional[ParamOverrides] = None):
        if registry.dataset is None:
            raise StarletteHTTPException(409, "no dataset loaded")
        params = (overrides or ParamOverrides()).apply(base_params)
        problems = validate_params(params)
        if problems:
            raise StarletteHTTPException(422, problems)
        run = registry.submit(params)
        return RunCreated(run_id=run.run_id, status=run.status)

    @app.get("/runs")
    def list_runs():
        return {"runs": [RunInfo(run_id=r.run_id, status=r.status,
                                 params=params_to_dict(r.params),
                                 error=r.error).model_dump()
                         for r in registry.list()]}

    @app.get("/runs/{run_id}", response_model=RunInfo)
    def run_info(run_id: str):
        run = registry.get(run_id)
        if run is None:
            raise StarletteHTTPException(404, f"unknown run: {run_id}")
        return RunInfo(run_id=run.run_id, status=run.status,
                       params=params_to_dict(run.params), error=run.error)

    def _artifact(run_id: str, name: str) -> Response:
        run = registry.get(run_id)
        if run is None:
            raise StarletteHTTPException(404, f"unknown run: {run_id}")
        if run.status in ("queued", "running"):
            return JSONResponse(status_code=202,
                                content={"run_id": run.run_id, "status": run.status})
        if run.status == "failed":
            raise StarletteHTTPException(500, run.error or "run failed")
        return Response(content=run.artifacts[name], media_type="application/json")

    @app.get("/runs/{run_id}/timeseries")
    def run_timeseries(run_id: str):
        return _artifact(run_id, "timeseries")

    @app.get("/runs/{run_id}/events")
    def run_events(run_id: str):
        return _artifact(run_id, "events")

    @app.get("/runs/{run_id}/stats/analyst")
    def run_analyst(run_id: str):
        return _artifact(run_id, "analyst")

    if ui_assets:
        from pathlib import Path

        from fastapi.staticfiles import StaticFiles
        if Path(ui_assets).is_dir():
            app.mount("/ui", StaticFiles(directory=ui_assets, html=True), name="ui")

    return app


def _error_name(status_code: int) -> str:
    return {
        404: "not_found",
        409: "conflict",
        422: "invalid_params",
        500: "internal_error",
    }.get(status_code, "error")
