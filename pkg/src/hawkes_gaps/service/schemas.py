"""Pydantic request/response models: the wire contract for service and CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ParamsModel(BaseModel):
    u: list[float] = Field(description="background rates, events per unit time")
    a: list[list[float]] = Field(description="branching weights, row-major N x N")
    b: list[float] = Field(description="decay rates, 1 per unit time")


class EventsModel(BaseModel):
    horizon: float = Field(description="observation horizon T, time units")
    times: list[list[float]] = Field(description="per-entity sorted timestamps in (0, T]")


class WindowsModel(BaseModel):
    horizon: float
    intervals: list[list[tuple[float, float]]] = Field(
        description="per-entity disjoint half-open (c, d] intervals"
    )


class SimulateRequest(BaseModel):
    params: ParamsModel
    horizon: float = Field(gt=0, description="simulation horizon T, time units")
    seed: int = Field(ge=0, description="64-bit master seed")


class SimulateResponse(BaseModel):
    events: EventsModel
    spectral_radius: float


class WindowsRequest(BaseModel):
    p: float = Field(gt=0, lt=1, description="nominal observation fraction")
    tau1: float = Field(gt=0, description="minimum window length, time units")
    tau2: float = Field(gt=0, description="maximum window length, time units")
    horizon: float = Field(gt=0, description="horizon T, time units")
    entities: int = Field(ge=1, description="number of entities N")
    per_entity: bool = Field(default=False, description="independent draws per entity")
    seed: int = Field(ge=0)


class WindowsResponse(BaseModel):
    windows: WindowsModel
    observed_fraction: list[float]


class FitRequest(BaseModel):
    events: EventsModel
    windows: Optional[WindowsModel] = None
    method: Literal["mhp", "mhpg-fixed", "mhpg-box"] = "mhpg-box"
    box_scale: float = Field(default=20.0, ge=1, description="boundary cap C in [u, C u]")
    mu: Optional[float] = Field(default=None, ge=0, description="LASSO weight")
    tol: float = Field(default=1e-6, gt=0)
    max_iter: int = Field(default=500, ge=1)
    init: Optional[ParamsModel] = None


class FitResponse(BaseModel):
    params: ParamsModel
    lambda_bar: list[list[float]]
    objective_trace: list[float]
    iterations: int
    converged: bool
    n_objective_increases: int
    n_decay_stalls: int
    n_intensity_floor_hits: int
    events_in: list[int]
    events_kept: list[int]
    events_dropped: list[int]


class HistogramRequest(BaseModel):
    params: ParamsModel
    interval: float = Field(gt=0, description="count interval (0, T'], time units")
    reps: int = Field(ge=1)
    seed: int = Field(ge=0)


class HistogramResponse(BaseModel):
    counts: list[list[int]]


class ExperimentRequest(BaseModel):
    config: dict
    jobs: Optional[int] = Field(default=None, ge=1)


class ExperimentResponse(BaseModel):
    files: dict[str, str]
    n_fits: int
    n_failures: int
    failed: bool


class ErrorBody(BaseModel):
    kind: Literal["usage", "numerical"]
    message: str


class HealthResponse(BaseModel):
    status: str = "ok"
