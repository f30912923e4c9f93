"""Service operations: pydantic request in, pydantic response out.

The FastAPI routes and the CLI both call these, so the wire contract is
exercised identically whether the package runs as a server or a local tool.
"""

from __future__ import annotations

import numpy as np

from ..core import BoundaryIntensities, EventData, InvalidArgumentError, ModelParams, WindowSet
from ..estimate import BoundaryMode, FitConfig, fit, fit_mhp
from ..experiment import ExperimentConfig, run_experiment
from ..simulate import SimConfig, count_histogram, simulate
from ..windows import (
    GapConfig,
    independent_windows,
    observed_fraction,
    restrict_events,
    shared_windows,
)
from . import schemas


def params_from_model(model: schemas.ParamsModel) -> ModelParams:
    return ModelParams(u=model.u, a=model.a, b=model.b)


def params_to_model(params: ModelParams) -> schemas.ParamsModel:
    return schemas.ParamsModel(u=[float(x) for x in params.u],
                               a=[[float(x) for x in row] for row in params.a],
                               b=[float(x) for x in params.b])


def events_from_model(model: schemas.EventsModel) -> EventData:
    return EventData(times=tuple(np.array(t, dtype=float) for t in model.times),
                     horizon=model.horizon)


def events_to_model(events: EventData) -> schemas.EventsModel:
    return schemas.EventsModel(horizon=events.horizon,
                               times=[[float(x) for x in t] for t in events.times])


def windows_from_model(model: schemas.WindowsModel) -> WindowSet:
    return WindowSet(intervals=tuple(np.array(w, dtype=float).reshape(-1, 2)
                                     for w in model.intervals),
                     horizon=model.horizon)


def windows_to_model(windows: WindowSet) -> schemas.WindowsModel:
    return schemas.WindowsModel(
        horizon=windows.horizon,
        intervals=[[(float(c), float(d)) for c, d in windows.intervals[m]]
                   for m in range(windows.n_entities)],
    )


def do_simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    params = params_from_model(req.params)
    events = simulate(SimConfig(params=params, horizon=req.horizon, seed=req.seed))
    return schemas.SimulateResponse(events=events_to_model(events),
                                    spectral_radius=params.spectral_radius())


def do_windows(req: schemas.WindowsRequest) -> schemas.WindowsResponse:
    gap = GapConfig(p=req.p, tau1=req.tau1, tau2=req.tau2,
                    horizon=req.horizon, seed=req.seed)
    if req.per_entity:
        ws = independent_windows(gap, req.entities)
    else:
        ws = shared_windows(gap, req.entities)
    return schemas.WindowsResponse(windows=windows_to_model(ws),
                                   observed_fraction=[float(f) for f in observed_fraction(ws)])


def do_fit(req: schemas.FitRequest) -> schemas.FitResponse:
    events = events_from_model(req.events)
    if req.windows is None and req.method != "mhp":
        raise InvalidArgumentError(
            f"method '{req.method}' accounts for observation gaps and needs a "
            "window set; supply windows or use method 'mhp'"
        )
    events_in = [t.size for t in events.times]
    if req.windows is not None:
        windows = windows_from_model(req.windows)
        observed = restrict_events(events, windows)
    else:
        windows = WindowSet.full(events.n_entities, events.horizon)
        observed = events
    kept = [t.size for t in observed.times]

    init = params_from_model(req.init) if req.init is not None else None
    mode = BoundaryMode.BOX if req.method == "mhpg-box" else BoundaryMode.FIXED_AT_U
    config = FitConfig(mu=req.mu, boundary_mode=mode, box_scale=req.box_scale,
                       tol=req.tol, max_iter=req.max_iter, init=init)
    if req.method == "mhp":
        result = fit_mhp(observed, windows.horizon, config)
    else:
        result = fit(observed, windows, config)
    return schemas.FitResponse(
        params=params_to_model(result.params),
        lambda_bar=[[float(x) for x in v] for v in result.bounds.values],
        objective_trace=[float(x) for x in result.objective_trace],
        iterations=result.iterations,
        converged=result.converged,
        n_objective_increases=result.n_objective_increases,
        n_decay_stalls=result.n_decay_stalls,
        n_intensity_floor_hits=result.n_intensity_floor_hits,
        events_in=events_in,
        events_kept=kept,
        events_dropped=[i - k for i, k in zip(events_in, kept)],
    )


def do_histogram(req: schemas.HistogramRequest) -> schemas.HistogramResponse:
    params = params_from_model(req.params)
    counts = count_histogram(SimConfig(params=params, horizon=req.interval, seed=req.seed),
                             req.reps, req.interval)
    return schemas.HistogramResponse(counts=[[int(c) for c in row] for row in counts])


def do_experiment(req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
    config = ExperimentConfig.from_dict(req.config)
    result = run_experiment(config, jobs=req.jobs)
    return schemas.ExperimentResponse(files=result.files, n_fits=result.n_fits,
                                      n_failures=result.n_failures, failed=result.failed)
