"""Replicated simulate -> gap -> restrict -> fit pipelines with CSV summaries.

One experiment runs n_param_reps independent replications, fits every
configured method on each, and summarizes the reconstructed parameters
(five-number boxplot rows and a medians table).  The median parameters of
each method then drive n_hist_reps count simulations over a short interval,
next to the ground-truth histogram.  Every output is a deterministic
function of the configuration and master seed.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import EventData, InvalidArgumentError, ModelParams, NumericalError, WindowSet
from .estimate import BoundaryMode, FitConfig, fit, fit_mhp
from .io import config_hash, provenance_line, _fmt
from .seeding import StreamTag, derive_seed
from .simulate import SimConfig, count_histogram, simulate
from .windows import (
    GapConfig,
    common_windows,
    independent_windows,
    observed_fraction,
    restrict_events,
    shared_windows,
)

METHODS = ("mhp", "mhpg-fixed", "mhpg-box")


@dataclass(frozen=True)
class MethodSpec:
    """One estimator to run per replication."""

    name: str
    box_scale: float = 20.0
    mu: float | None = None
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.name not in METHODS:
            raise InvalidArgumentError(f"unknown method '{self.name}', expected one of {METHODS}")

    def fit_config(self):
        mode = BoundaryMode.BOX if self.name == "mhpg-box" else BoundaryMode.FIXED_AT_U
        return FitConfig(mu=self.mu, boundary_mode=mode, box_scale=self.box_scale,
                         tol=self.tol, max_iter=self.max_iter)


@dataclass(frozen=True)
class ExperimentConfig:
    truth: ModelParams
    horizon: float
    p: float
    tau1: float
    tau2: float
    shared_windows: bool = True
    intersect: bool = False
    methods: tuple = (MethodSpec("mhp"), MethodSpec("mhpg-fixed"), MethodSpec("mhpg-box"))
    n_param_reps: int = 100
    n_hist_reps: int = 500
    hist_interval: float = 20.0
    master_seed: int = 0

    def __post_init__(self):
        if self.n_param_reps < 1 or self.n_hist_reps < 1:
            raise InvalidArgumentError("replication counts must be positive")
        if not 0 < self.hist_interval:
            raise InvalidArgumentError("histogram interval must be positive")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise InvalidArgumentError("duplicate method names in experiment config")

    def to_dict(self):
        return {
            "truth": {"u": list(map(float, self.truth.u)),
                      "a": [list(map(float, row)) for row in self.truth.a],
                      "b": list(map(float, self.truth.b))},
            "horizon": self.horizon,
            "p": self.p, "tau1": self.tau1, "tau2": self.tau2,
            "shared_windows": self.shared_windows,
            "intersect": self.intersect,
            "methods": [{"name": m.name, "box_scale": m.box_scale, "mu": m.mu,
                         "tol": m.tol, "max_iter": m.max_iter} for m in self.methods],
            "n_param_reps": self.n_param_reps,
            "n_hist_reps": self.n_hist_reps,
            "hist_interval": self.hist_interval,
            "master_seed": self.master_seed,
        }

    @staticmethod
    def from_dict(payload):
        truth = ModelParams(u=payload["truth"]["u"], a=payload["truth"]["a"],
                            b=payload["truth"]["b"])
        methods = tuple(
            MethodSpec(name=m["name"], box_scale=m.get("box_scale", 20.0),
                       mu=m.get("mu"), tol=m.get("tol", 1e-6),
                       max_iter=m.get("max_iter", 500))
            for m in payload.get("methods", [{"name": n} for n in METHODS])
        )
        return ExperimentConfig(
            truth=truth, horizon=payload["horizon"], p=payload["p"],
            tau1=payload["tau1"], tau2=payload["tau2"],
            shared_windows=payload.get("shared_windows", True),
            intersect=payload.get("intersect", False),
            methods=methods,
            n_param_reps=payload.get("n_param_reps", 100),
            n_hist_reps=payload.get("n_hist_reps", 500),
            hist_interval=payload.get("hist_interval", 20.0),
            master_seed=payload.get("master_seed", 0),
        )


@dataclass
class ExperimentResult:
    files: dict
    n_fits: int
    n_failures: int

    @property
    def failed(self):
        # more than 10% failed replication fits marks the whole run failed
        return self.n_failures > 0.1 * self.n_fits


def _param_names(n):
    names = [f"u_{m}" for m in range(n)]
    names += [f"a_{m}_{s}" for m in range(n) for s in range(n)]
    names += [f"b_{m}" for m in range(n)]
    return names


def _param_values(params: ModelParams):
    return np.concatenate([params.u, params.a.ravel(), params.b])


def _replication_windows(config: ExperimentConfig, rep):
    n = config.truth.n_entities
    gap = GapConfig(p=config.p, tau1=config.tau1, tau2=config.tau2,
                    horizon=config.horizon,
                    seed=derive_seed(config.master_seed, StreamTag.WINDOWS, rep))
    if config.shared_windows:
        return shared_windows(gap, n)
    return independent_windows(gap, n)


def run_replication(config: ExperimentConfig, rep):
    """One simulate -> gap -> restrict -> fit-all-methods pipeline.

    Returns a record dict; fit failures are captured per method so one bad
    method does not invalidate the replication.
    """
    sim_seed = derive_seed(config.master_seed, StreamTag.SIMULATE, rep)
    events = simulate(SimConfig(params=config.truth, horizon=config.horizon, seed=sim_seed))
    windows = _replication_windows(config, rep)
    prior_windows = windows
    if config.intersect:
        windows = common_windows(windows)
    observed = restrict_events(events, windows)
    record = {
        "rep": rep,
        "simulated": [int(t.size) for t in events.times],
        "kept": [int(t.size) for t in observed.times],
        "prior_lengths": [prior_windows.lengths(m) for m in range(prior_windows.n_entities)],
        "post_lengths": [windows.lengths(m) for m in range(windows.n_entities)],
        "prior_fraction": observed_fraction(prior_windows),
        "post_fraction": observed_fraction(windows),
        "fits": {},
        "errors": {},
    }
    for method in config.methods:
        try:
            if method.name == "mhp":
                result = fit_mhp(observed, config.horizon, method.fit_config())
            else:
                result = fit(observed, windows, method.fit_config())
            record["fits"][method.name] = {
                "values": _param_values(result.params),
                "converged": bool(result.converged),
                "iterations": int(result.iterations),
            }
        except (NumericalError, InvalidArgumentError) as exc:
            record["errors"][method.name] = str(exc)
    return record


def _worker(args):
    config_dict, rep = args
    return run_replication(ExperimentConfig.from_dict(config_dict), rep)


def _csv(provenance, header, rows):
    lines = [provenance, header]
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def run_experiment(config: ExperimentConfig, jobs=None) -> ExperimentResult:
    """Run the full harness; returns the output files as name -> CSV text."""
    if jobs is None:
        jobs = int(os.environ.get("HAWKES_GAPS_JOBS", "1"))
    reps = range(config.n_param_reps)
    if jobs > 1:
        payload = config.to_dict()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_worker, [(payload, r) for r in reps]))
    else:
        records = [run_replication(config, r) for r in reps]

    n = config.truth.n_entities
    names = _param_names(n)
    truth_values = _param_values(config.truth)
    head = provenance_line(config.master_seed, config.to_dict())

    rep_rows, fail_rows, drop_rows, len_rows, frac_rows = [], [], [], [], []
    per_method = {m.name: [] for m in config.methods}
    per_method_conv = {m.name: 0 for m in config.methods}
    n_failures = 0
    for rec in records:
        r = rec["rep"]
        for m in range(n):
            drop_rows.append(
                f"{r},{m},{rec['simulated'][m]},{rec['kept'][m]},"
                f"{rec['simulated'][m] - rec['kept'][m]}"
            )
            for stage, lengths in (("prior", rec["prior_lengths"][m]),
                                   ("posterior", rec["post_lengths"][m])):
                for length in lengths:
                    len_rows.append(f"{r},{stage},{m},{_fmt(length)}")
            frac_rows.append(f"{r},prior,{m},{_fmt(rec['prior_fraction'][m])}")
            frac_rows.append(f"{r},posterior,{m},{_fmt(rec['post_fraction'][m])}")
        for method in config.methods:
            if method.name in rec["errors"]:
                n_failures += 1
                msg = rec["errors"][method.name].replace(",", ";").replace("\n", " ")
                fail_rows.append(f"{r},{method.name},{msg}")
                continue
            entry = rec["fits"][method.name]
            per_method[method.name].append(entry["values"])
            per_method_conv[method.name] += int(entry["converged"])
            values = ",".join(_fmt(v) for v in entry["values"])
            rep_rows.append(f"{r},{method.name},{int(entry['converged'])},"
                            f"{entry['iterations']},{values}")

    box_rows, median_rows = [], []
    medians = {}
    for method in config.methods:
        stack = per_method[method.name]
        if not stack:
            continue
        mat = np.vstack(stack)
        med = np.percentile(mat, 50, axis=0)
        medians[method.name] = med
        q1 = np.percentile(mat, 25, axis=0)
        q3 = np.percentile(mat, 75, axis=0)
        lo = mat.min(axis=0)
        hi = mat.max(axis=0)
        for i, name in enumerate(names):
            box_rows.append(f"{method.name},{name},{_fmt(lo[i])},{_fmt(q1[i])},"
                            f"{_fmt(med[i])},{_fmt(q3[i])},{_fmt(hi[i])}")
            median_rows.append(f"{method.name},{name},{_fmt(truth_values[i])},"
                               f"{_fmt(med[i])},{mat.shape[0]},{per_method_conv[method.name]}")

    count_rows = []
    sources = [("truth", config.truth)]
    for idx, method in enumerate(config.methods):
        if method.name not in medians:
            continue
        med = medians[method.name]
        params = ModelParams(u=med[:n], a=med[n:n + n * n].reshape(n, n),
                             b=med[n + n * n:])
        sources.append((method.name, params))
    for idx, (label, params) in enumerate(sources):
        seed = derive_seed(config.master_seed, StreamTag.HISTOGRAM, idx)
        counts = count_histogram(SimConfig(params=params, horizon=config.hist_interval,
                                           seed=seed),
                                 config.n_hist_reps, config.hist_interval)
        for m in range(n):
            for r in range(config.n_hist_reps):
                count_rows.append(f"{label},{m},{r},{counts[m, r]}")

    files = {
        "replications.csv": _csv(head, "rep,method,converged,iterations," + ",".join(names),
                                 rep_rows),
        "boxplots.csv": _csv(head, "method,parameter,min,q1,median,q3,max", box_rows),
        "medians.csv": _csv(head, "method,parameter,truth,median,n_used,n_converged",
                            median_rows),
        "counts.csv": _csv(head, "source,entity,rep,count", count_rows),
        "window_lengths.csv": _csv(head, "rep,stage,entity,length", len_rows),
        "observed_fractions.csv": _csv(head, "rep,stage,entity,fraction", frac_rows),
        "dropped_events.csv": _csv(head, "rep,entity,simulated,kept,dropped", drop_rows),
        "failures.csv": _csv(head, "rep,method,message", fail_rows),
    }
    n_fits = config.n_param_reps * len(config.methods)
    return ExperimentResult(files=files, n_fits=n_fits, n_failures=n_failures)
