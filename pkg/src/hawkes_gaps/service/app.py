"""HTTP surface: one POST endpoint per operation, JSON errors with a kind tag."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..core import InvalidArgumentError, NumericalError
from . import ops, schemas

app = FastAPI(title="hawkes-gaps", version="0.1.0")


@app.exception_handler(InvalidArgumentError)
async def _usage_error(request: Request, exc: InvalidArgumentError):
    return JSONResponse(status_code=400,
                        content={"kind": "usage", "message": str(exc)})


@app.exception_handler(NumericalError)
async def _numerical_error(request: Request, exc: NumericalError):
    return JSONResponse(status_code=500,
                        content={"kind": "numerical", "message": str(exc)})


@app.get("/healthz", response_model=schemas.HealthResponse)
async def healthz():
    return schemas.HealthResponse()


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate_endpoint(req: schemas.SimulateRequest):
    return ops.do_simulate(req)


@app.post("/windows", response_model=schemas.WindowsResponse)
def windows_endpoint(req: schemas.WindowsRequest):
    return ops.do_windows(req)


@app.post("/fit", response_model=schemas.FitResponse)
def fit_endpoint(req: schemas.FitRequest):
    return ops.do_fit(req)


@app.post("/histogram", response_model=schemas.HistogramResponse)
def histogram_endpoint(req: schemas.HistogramRequest):
    return ops.do_histogram(req)


@app.post("/experiment", response_model=schemas.ExperimentResponse)
def experiment_endpoint(req: schemas.ExperimentRequest):
    return ops.do_experiment(req)


def run_server(host="127.0.0.1", port=8000):
    import uvicorn

    uvicorn.run(app, host=host, port=port)
