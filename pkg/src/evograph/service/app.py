"""FastAPI service wrapping the core package.

Run with:  uvicorn evograph.service.app:app
(or `evograph serve`).  Every endpoint mirrors a CLI subcommand and uses
the same handler; parameter validation errors become 422 (pydantic) or
400 (semantic), and analytically invalid regimes are reported in-band via
``valid_regime``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import handlers, models

app = FastAPI(
    title="evograph",
    description=(
        "Birth-death dynamics on superstar graphs: closed-form fixation "
        "bounds, exact absorbing-chain oracles, and Monte Carlo estimators."
    ),
    version="0.1.0",
)


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=400, content={"error": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/trainlen", response_model=models.TrainLenResponse)
def trainlen(req: models.TrainLenRequest):
    return handlers.handle_trainlen(req)


@app.post("/bounds", response_model=models.BoundsResponse)
def bounds(req: models.BoundsRequest):
    return handlers.handle_bounds(req)


@app.post("/exact", response_model=models.ExactResponse)
def exact(req: models.ExactRequest):
    return handlers.handle_exact(req)


@app.post("/simulate", response_model=models.SimulateResponse)
def simulate(req: models.SimulateRequest):
    return handlers.handle_simulate(req)


@app.post("/one-to-two", response_model=models.OneToTwoResponse)
def one_to_two(req: models.OneToTwoRequest):
    return handlers.handle_one_to_two(req)


@app.post("/sweep", response_model=models.SweepResponse)
def sweep(req: models.SweepRequest):
    return handlers.handle_sweep(req)


@app.post("/graph", response_model=models.GraphExportResponse)
def graph(spec: models.GraphSpec):
    return handlers.handle_graph_export(spec)
