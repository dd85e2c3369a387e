"""HTTP service exposing one dataset's surfaces, bands, Tukey regions and
band-mass queries for the explorer UI and scripted clients.

Observer moves are served through the transfer identity on a per-level base
surface cached at the origin; only a level change touches the projection
cache. Dataset reloads swap the whole session state atomically; readers see
the old or the new state, never a mix.
"""

from __future__ import annotations

import tempfile
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import DomainError, QsurfError
from .geometry import DirectionGrid, make_direction_grid
from .inference import confidence_band
from .quantiles import (
    DeltaRange,
    psi_hat,
    quantile_surface,
    transfer_surface,
    tukey_region_2d,
)
from .samples import Dataset, ProjectionCache, build_projection_cache, load_dataset

BASE_SURFACE_CACHE = 64  # distinct levels kept for transfer-served observers


class SessionState:
    """One dataset, one cache; exclusive writer, lock-free readers."""

    def __init__(self, dataset: Dataset, directions: int = 360):
        self.directions = directions
        self.lock = threading.Lock()  # held by reloads and long-running jobs
        self._install(dataset)

    def _install(self, dataset: Dataset):
        grid = make_direction_grid(dataset.dims, self.directions)
        cache = build_projection_cache(dataset, grid)
        # swap everything behind a single attribute so readers stay consistent
        self.snapshot = (dataset, grid, cache, {})

    def reload(self, dataset: Dataset) -> bool:
        """Rebuild for a new dataset; False when a job holds the session."""
        if not self.lock.acquire(blocking=False):
            return False
        try:
            self._install(dataset)
            return True
        finally:
            self.lock.release()

    def parts(self) -> tuple[Dataset, DirectionGrid, ProjectionCache, dict]:
        return self.snapshot

    def base_surface(self, alpha: float):
        dataset, grid, cache, bases = self.parts()
        surf = bases.get(alpha)
        if surf is None:
            surf = quantile_surface(cache, np.zeros(grid.dims), alpha)
            if len(bases) < BASE_SURFACE_CACHE:
                bases[alpha] = surf
        return surf


def _parse_point(raw: str, dims: int) -> np.ndarray:
    try:
        vals = [float(x) for x in raw.split(",")]
    except ValueError:
        raise DomainError(f"cannot parse observer {raw!r} as comma-separated reals")
    if len(vals) != dims:
        raise DomainError(f"observer has {len(vals)} coordinates, data has {dims}")
    return np.array(vals)


def create_app(state: SessionState) -> FastAPI:
    app = FastAPI(title="qsurf", docs_url=None, redoc_url=None)

    @app.exception_handler(QsurfError)
    async def _domain_error(_req: Request, exc: QsurfError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/meta")
    def meta():
        dataset, grid, cache, _ = state.parts()
        return {
            "n": dataset.n,
            "d": dataset.dims,
            "scheme": grid.scheme,
            "directions": grid.k,
            "label": dataset.label,
        }

    @app.get("/surface")
    def surface(o: str, alpha: float):
        _dataset, grid, _cache, _ = state.parts()
        O = _parse_point(o, grid.dims)
        return transfer_surface(state.base_surface(alpha), O).to_document()

    @app.get("/band")
    def band(
        o: str,
        alpha: float,
        level: float = 0.95,
        draws: int = 500,
        seed: int = 0,
        bandwidth: float | None = None,
    ):
        _dataset, grid, cache, _ = state.parts()
        O = _parse_point(o, grid.dims)
        return confidence_band(cache, O, alpha, level, draws, seed, bandwidth).to_document()

    @app.get("/tukey")
    def tukey(alpha: float):
        _dataset, _grid, cache, _ = state.parts()
        region = tukey_region_2d(cache, alpha)
        return {
            "alpha": region.alpha,
            "empty": region.is_empty,
            "vertices": region.vertices.tolist(),
        }

    @app.get("/psi")
    def psi(eps: float, alphaMinus: float = 0.6, alphaPlus: float = 0.9):
        _dataset, grid, cache, _ = state.parts()
        delta = DeltaRange(alphaMinus, alphaPlus)
        value = psi_hat(cache, np.zeros(grid.dims), eps, delta)
        return {"eps": eps, "alphaMinus": alphaMinus, "alphaPlus": alphaPlus, "psi": value}

    @app.post("/dataset")
    async def upload(request: Request):
        body = (await request.body()).decode("utf-8")
        with tempfile.NamedTemporaryFile("w", suffix=".csv", delete=False) as fh:
            fh.write(body)
            tmp = fh.name
        try:
            dataset = load_dataset(tmp, format="csv", label="uploaded")
        finally:
            Path(tmp).unlink(missing_ok=True)
        if not state.reload(dataset):
            return JSONResponse(
                status_code=409,
                content={"error": "session is held by a running job; retry later"},
            )
        return {"n": dataset.n, "d": dataset.dims}

    return app


def serve(port: int, data_path, directions: int = 360, host: str = "127.0.0.1"):
    """Blocking entry point: load the dataset, build the cache, serve."""
    import uvicorn

    dataset = load_dataset(data_path)
    state = SessionState(dataset, directions)
    app = create_app(state)
    uvicorn.run(app, host=host, port=port, log_level="warning")
