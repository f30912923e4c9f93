"""Gap-aware penalized likelihood estimation by blockwise fixed-point updates.

The objective, for observed events restricted to windows (c, d] and one
boundary intensity lbar[m, k] per window, is

    J(u, a, b, lbar) = mu * sum |a[m, n]|
        + sum_{m, k} [ integral of lam_m over window k
                       - sum_{events i in window k} log lam_m(t_i) ]

Each outer iteration updates u, a, b, lbar in turn, every step using the
freshest values of the others; the decay-rate change invalidates the cached
kernel sums, which are rebuilt before the boundary step.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    BoundaryIntensities,
    EvaluationError,
    EventData,
    InvalidArgumentError,
    ModelParams,
    NumericalError,
    WindowSet,
)

logger = logging.getLogger(__name__)

INTENSITY_FLOOR = 1e-12
DECAY_MIN = 1e-6
DECAY_MAX = 1e6


class BoundaryMode(enum.Enum):
    """How the per-window boundary intensities are constrained."""

    FIXED_AT_U = "fixed"   # lbar[m, k] = u[m]
    BOX = "box"            # u[m] <= lbar[m, k] <= C * u[m]


@dataclass(frozen=True)
class FitConfig:
    """Estimator settings.

    mu=None selects the default penalty 0.01 * (total observed events) / N^2.
    Initial values default to u=1, a=0.5/N, b=1000, lbar=u.
    """

    mu: float | None = None
    boundary_mode: BoundaryMode = BoundaryMode.FIXED_AT_U
    box_scale: float = 20.0
    tol: float = 1e-6
    max_iter: int = 500
    init: ModelParams | None = None

    def __post_init__(self):
        if self.mu is not None and self.mu < 0:
            raise InvalidArgumentError(f"mu must be >= 0, got {self.mu}")
        if self.box_scale < 1:
            raise InvalidArgumentError(f"box scale C must be >= 1, got {self.box_scale}")
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be positive, got {self.max_iter}")


def default_mu(observed: EventData):
    """Default LASSO weight: 0.001 * total observed event count / N^2.

    The per-iteration shrink is mu divided by a kernel-mass sum that grows
    like the source entity's event count, so this keeps the shrink near
    1e-3 per step: strong enough to zero dead links, too weak to starve
    live ones while the decay rates relax from their far-off start.
    """
    n = observed.n_entities
    return 0.001 * float(sum(t.size for t in observed.times)) / (n * n)


@dataclass(frozen=True)
class _EntityIndex:
    """Per-entity event/window layout, independent of any parameter value."""

    times: np.ndarray        # (n_m,) observed events
    window: np.ndarray       # (n_m,) index of the window holding each event
    offsets: np.ndarray      # (n_m,) event time minus its window start
    starts: np.ndarray       # (K_m,)
    ends: np.ndarray         # (K_m,)
    lengths: np.ndarray      # (K_m,)


def _index_entity(t, w, m):
    if w.shape[0] == 0:
        if t.size:
            raise InvalidArgumentError(
                f"entity {m}: {t.size} events but no observation windows"
            )
        return _EntityIndex(t, np.empty(0, np.int64), np.empty(0),
                            np.empty(0), np.empty(0), np.empty(0))
    idx = np.searchsorted(w[:, 1], t, side="left")
    bad = (idx >= w.shape[0]) | (t <= w[np.minimum(idx, w.shape[0] - 1), 0])
    if np.any(bad):
        raise InvalidArgumentError(
            f"entity {m}: event at t={t[bad][0]} lies outside all observation windows; "
            "restrict events to windows first"
        )
    return _EntityIndex(times=t, window=idx.astype(np.int64),
                        offsets=t - w[idx, 0], starts=w[:, 0].copy(),
                        ends=w[:, 1].copy(), lengths=w[:, 1] - w[:, 0])


def _build_index(observed: EventData, windows: WindowSet):
    if observed.n_entities != windows.n_entities:
        raise InvalidArgumentError("events and windows must have the same entity count")
    if observed.horizon != windows.horizon:
        raise InvalidArgumentError("events and windows must share the horizon")
    return tuple(
        _index_entity(observed.times[m], windows.intervals[m], m)
        for m in range(observed.n_entities)
    )


@dataclass(frozen=True)
class SufficientStats:
    """Kernel sums caching the likelihood structure for one decay vector b.

    Per target entity m (arrays indexed [source n, ...]):
      excite[m][n, i]     sum_{c < s_j < t_i} b_m exp(-b_m (t_i - s_j))
      excite_raw[m][n, i] the same sum without the b_m factor
      excite_lag[m][n, i] the same sum weighted by the lag (t_i - s_j)
      tail[m][n, k]       sum_{c < s_j <= d} (1 - exp(-b_m (d - s_j)))
      tail_lag[m][n, k]   sum_{c < s_j <= d} (d - s_j) exp(-b_m (d - s_j))
    """

    decay: np.ndarray
    excite: tuple
    excite_raw: tuple
    excite_lag: tuple
    tail: tuple
    tail_lag: tuple


def _stats_from_index(index, times_by_entity, b):
    n = len(index)
    excite, excite_raw, excite_lag, tail, tail_lag = [], [], [], [], []
    for m in range(n):
        ix = index[m]
        n_m, k_m = ix.times.size, ix.starts.size
        raw = np.zeros((n, n_m))
        lag = np.zeros((n, n_m))
        tl = np.zeros((n, k_m))
        tll = np.zeros((n, k_m))
        for src in range(n):
            raw[src], lag[src], tl[src], tll[src] = _kernels.pair_stats(
                ix.times, ix.window, ix.starts, ix.ends, times_by_entity[src], float(b[m])
            )
        excite.append(b[m] * raw)
        excite_raw.append(raw)
        excite_lag.append(lag)
        tail.append(tl)
        tail_lag.append(tll)
    return SufficientStats(decay=np.array(b, dtype=float), excite=tuple(excite),
                           excite_raw=tuple(excite_raw), excite_lag=tuple(excite_lag),
                           tail=tuple(tail), tail_lag=tuple(tail_lag))


def precompute_stats(observed: EventData, windows: WindowSet, b) -> SufficientStats:
    """Kernel sums for all (target, source) pairs at decay rates b.

    Events must already be restricted to their entity's windows.  Linear in
    the number of events via the forward recursion inside each window.
    """
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0) or not np.all(np.isfinite(b)):
        raise InvalidArgumentError("decay rates b must be finite and > 0")
    index = _build_index(observed, windows)
    return _stats_from_index(index, [ix.times for ix in index], b)


@dataclass
class FitState:
    """Mutable iteration state shared by the update steps."""

    index: tuple
    u: np.ndarray
    a: np.ndarray
    b: np.ndarray
    lbar: list
    stats: SufficientStats
    floor_hits: int = 0

    @property
    def n_entities(self):
        return self.u.shape[0]

    @staticmethod
    def create(observed, windows, u, a, b, lbar):
        index = _build_index(observed, windows)
        stats = _stats_from_index(index, [ix.times for ix in index], np.asarray(b, float))
        return FitState(index=index, u=np.array(u, float), a=np.array(a, float),
                        b=np.array(b, float), lbar=[np.array(v, float) for v in lbar],
                        stats=stats)

    def refresh_stats(self):
        self.stats = _stats_from_index(
            self.index, [ix.times for ix in self.index], self.b
        )


def _event_intensities(state: FitState, m, floor=INTENSITY_FLOOR):
    """Intensity at each of entity m's observed events under the current state."""
    ix = state.index[m]
    u_m, b_m = state.u[m], state.b[m]
    lam = u_m + (state.lbar[m][ix.window] - u_m) * np.exp(-b_m * ix.offsets)
    lam += state.a[m] @ state.stats.excite[m]
    if floor is not None:
        low = lam < floor
        if np.any(low):
            state.floor_hits += int(np.sum(low))
            lam = np.where(low, floor, lam)
    return lam


def _window_integrals(state: FitState, m):
    """Closed-form integral of the intensity over each window of entity m."""
    ix = state.index[m]
    u_m, b_m = state.u[m], state.b[m]
    vals = u_m * ix.lengths
    vals += (state.lbar[m] - u_m) / b_m * (1.0 - np.exp(-b_m * ix.lengths))
    vals += state.a[m] @ state.stats.tail[m]
    return vals


def objective(params: ModelParams, bounds: BoundaryIntensities, observed: EventData,
              windows: WindowSet, stats: SufficientStats, mu) -> float:
    """Penalized negative log-likelihood J at the given point.

    Raises EvaluationError identifying the first (entity, window, event)
    whose intensity is nonpositive.
    """
    if not np.array_equal(stats.decay, params.b):
        raise InvalidArgumentError("stats were computed for a different decay vector b")
    index = _build_index(observed, windows)
    state = FitState(index=index, u=params.u.copy(), a=params.a.copy(),
                     b=params.b.copy(), lbar=[v.copy() for v in bounds.values],
                     stats=stats)
    total = mu * float(np.sum(np.abs(params.a)))
    for m in range(params.n_entities):
        lam = _event_intensities(state, m, floor=None)
        if np.any(lam <= 0):
            i = int(np.argmax(lam <= 0))
            k = int(index[m].window[i])
            i_in_window = i - int(np.searchsorted(index[m].window, k, side="left"))
            raise EvaluationError(m, k, i_in_window)
        total += float(np.sum(_window_integrals(state, m)))
        total -= float(np.sum(np.log(lam)))
    return total


def _objective_inplace(state: FitState, mu):
    total = mu * float(np.sum(np.abs(state.a)))
    for m in range(state.n_entities):
        lam = _event_intensities(state, m)
        total += float(np.sum(_window_integrals(state, m)))
        total -= float(np.sum(np.log(lam)))
    return total


def _du_integral(state: FitState, m):
    # d/du of the window integral: (d-c) - (1 - exp(-b(d-c)))/b, summed over windows
    b_m = state.b[m]
    lengths = state.index[m].lengths
    return float(np.sum(lengths - (1.0 - np.exp(-b_m * lengths)) / b_m))


def update_u(state: FitState):
    """Multiplicative fixed-point step for the background rates."""
    new = np.empty_like(state.u)
    for m in range(state.n_entities):
        den = _du_integral(state, m)
        if den <= 0:
            raise NumericalError(f"entity {m}: degenerate observation windows (zero measure)")
        ix = state.index[m]
        if ix.times.size == 0:
            new[m] = 0.0
            continue
        lam = _event_intensities(state, m)
        num = state.u[m] * float(np.sum((1.0 - np.exp(-state.b[m] * ix.offsets)) / lam))
        new[m] = num / den
    return new


def update_a(state: FitState, mu):
    """Multiplicative step followed by a soft threshold on each branching weight.

    The subgradient weight mu is divided by the same kernel-mass curvature
    sum_k tail[n, k] that scales the multiplicative step, so the update
    reduces to the plain ratio step at mu = 0.
    """
    n = state.n_entities
    new = np.zeros_like(state.a)
    for m in range(n):
        ix = state.index[m]
        tail_sum = state.stats.tail[m].sum(axis=1)
        if ix.times.size:
            lam = _event_intensities(state, m)
            resp = state.stats.excite[m] @ (1.0 / lam)
        else:
            resp = np.zeros(n)
        for src in range(n):
            if tail_sum[src] <= 0.0:
                new[m, src] = 0.0
                continue
            ratio = state.a[m, src] * resp[src] / tail_sum[src]
            new[m, src] = max(ratio - mu / tail_sum[src], 0.0)
    return new


def _decay_terms(state: FitState, m):
    """The three pieces of dJ/db_m: integral part, event part, lag curvature.

    dJ/db_m = integral_part - event_part + b_m * lag_part, with lag_part >= 0.
    """
    ix = state.index[m]
    u_m, b_m = state.u[m], state.b[m]
    x = b_m * ix.lengths
    boundary = state.lbar[m] - u_m
    integral_part = float(np.sum(boundary * (
        -(1.0 - np.exp(-x)) / b_m**2 + ix.lengths / b_m * np.exp(-x)
    )))
    integral_part += float(state.a[m] @ state.stats.tail_lag[m].sum(axis=1))
    if ix.times.size == 0:
        return integral_part, 0.0, 0.0
    lam = _event_intensities(state, m)
    boundary_evt = boundary[ix.window] * ix.offsets * np.exp(-b_m * ix.offsets)
    event_part = float(np.sum((state.a[m] @ state.stats.excite_raw[m] - boundary_evt) / lam))
    lag_part = float((state.a[m] @ state.stats.excite_lag[m]) @ (1.0 / lam))
    return integral_part, event_part, lag_part


def update_b(state: FitState):
    """Fixed-point step for the decay rates, clamped to [1e-6, 1e6].

    Solving dJ/db_m = 0 for the b that multiplies the lag-curvature term
    gives b = (event_part - integral_part) / lag_part.  When the curvature
    vanishes (no excitation pairs, or a == 0) the objective does not depend
    on b through that term and the previous value is kept, flagged as a
    stall; likewise for nonfinite or nonpositive candidates.
    """
    new = state.b.copy()
    stalled = np.zeros(state.n_entities, dtype=bool)
    for m in range(state.n_entities):
        integral_part, event_part, lag_part = _decay_terms(state, m)
        if lag_part <= 0.0 or not np.isfinite(lag_part):
            stalled[m] = True
            continue
        candidate = (event_part - integral_part) / lag_part
        if not np.isfinite(candidate) or candidate <= 0.0:
            stalled[m] = True
            continue
        new[m] = min(max(candidate, DECAY_MIN), DECAY_MAX)
    return new, stalled


def update_lambda(state: FitState, mode: BoundaryMode, box_scale=20.0):
    """One Picard step on each boundary intensity, then the mode's constraint.

    FIXED_AT_U pins lbar[m, k] = u[m]; BOX applies the fixed-point ratio and
    clamps to [u[m], C * u[m]].  Windows without events fall to the floor.
    """
    new = []
    for m in range(state.n_entities):
        ix = state.index[m]
        u_m, b_m = state.u[m], state.b[m]
        if mode is BoundaryMode.FIXED_AT_U:
            new.append(np.full(ix.starts.size, u_m))
            continue
        weights = np.zeros(ix.starts.size)
        if ix.times.size:
            lam = _event_intensities(state, m)
            weights = np.bincount(ix.window, weights=np.exp(-b_m * ix.offsets) / lam,
                                  minlength=ix.starts.size)
        vals = b_m * state.lbar[m] * weights / (1.0 - np.exp(-b_m * ix.lengths))
        new.append(np.clip(vals, u_m, box_scale * u_m))
    return new


def grad_u(state: FitState):
    """Analytic block partials dJ/du_m (boundary intensities held fixed)."""
    out = np.empty(state.n_entities)
    for m in range(state.n_entities):
        val = _du_integral(state, m)
        ix = state.index[m]
        if ix.times.size:
            lam = _event_intensities(state, m)
            val -= float(np.sum((1.0 - np.exp(-state.b[m] * ix.offsets)) / lam))
        out[m] = val
    return out


def grad_b(state: FitState):
    """Analytic block partials dJ/db_m = integral - event + b * lag."""
    out = np.empty(state.n_entities)
    for m in range(state.n_entities):
        integral_part, event_part, lag_part = _decay_terms(state, m)
        out[m] = integral_part - event_part + state.b[m] * lag_part
    return out


@dataclass(frozen=True)
class FitResult:
    """Estimates plus the iteration record."""

    params: ModelParams
    bounds: BoundaryIntensities
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    n_objective_increases: int = 0
    n_decay_stalls: int = 0
    n_intensity_floor_hits: int = 0


def _initial_state(observed, windows, config):
    n = observed.n_entities
    if config.init is not None:
        u0 = config.init.u.copy()
        a0 = config.init.a.copy()
        b0 = config.init.b.copy()
    else:
        u0 = np.ones(n)
        a0 = np.full((n, n), 0.5 / n)
        b0 = np.full(n, 1000.0)
    lbar0 = [np.full(windows.intervals[m].shape[0], u0[m]) for m in range(n)]
    return FitState.create(observed, windows, u0, a0, b0, lbar0)


def _relative_change(old, new):
    return np.max(np.abs(new - old) / (1.0 + np.abs(old))) if old.size else 0.0


def fit(observed: EventData, windows: WindowSet, config: FitConfig = FitConfig()) -> FitResult:
    """Minimize the gap-aware penalized objective by cyclic fixed-point updates.

    Stops when the largest relative parameter change drops below config.tol
    or after config.max_iter iterations.  Raises NumericalError if the
    objective turns nonfinite.
    """
    state = _initial_state(observed, windows, config)
    mu = default_mu(observed) if config.mu is None else float(config.mu)
    trace = []
    n_increase = 0
    n_stall = 0
    converged = False
    iterations = 0
    for it in range(config.max_iter):
        iterations = it + 1
        u_old, a_old, b_old = state.u.copy(), state.a.copy(), state.b.copy()
        lbar_old = [v.copy() for v in state.lbar]

        state.u = update_u(state)
        state.a = update_a(state, mu)
        new_b, stalled = update_b(state)
        n_stall += int(np.sum(stalled))
        if not np.array_equal(new_b, state.b):
            state.b = new_b
            state.refresh_stats()
        state.lbar = update_lambda(state, config.boundary_mode, config.box_scale)

        value = _objective_inplace(state, mu)
        if not np.isfinite(value):
            raise NumericalError(
                f"objective became nonfinite at iteration {iterations}: "
                f"u={state.u}, a={state.a}, b={state.b}"
            )
        if trace and value > trace[-1] + 1e-8 * (1.0 + abs(trace[-1])):
            n_increase += 1
            logger.debug("objective increased at iteration %d: %.12g -> %.12g",
                         iterations, trace[-1], value)
        trace.append(value)

        delta = max(
            _relative_change(u_old, state.u),
            _relative_change(a_old.ravel(), state.a.ravel()),
            _relative_change(b_old, state.b),
            max((_relative_change(o, v) for o, v in zip(lbar_old, state.lbar)), default=0.0),
        )
        if delta < config.tol:
            converged = True
            break

    if n_increase:
        logger.warning("objective rose above the per-step tolerance on %d of %d "
                       "iterations (fixed-point scheme, not guaranteed descent)",
                       n_increase, iterations)
    params = ModelParams(u=state.u, a=state.a, b=state.b)
    bounds = BoundaryIntensities(values=tuple(state.lbar))
    return FitResult(params=params, bounds=bounds,
                     objective_trace=np.array(trace), iterations=iterations,
                     converged=converged, n_objective_increases=n_increase,
                     n_decay_stalls=n_stall, n_intensity_floor_hits=state.floor_hits)


def fit_mhp(events: EventData, horizon, config: FitConfig = FitConfig()) -> FitResult:
    """Gap-blind baseline: treat the events as the complete record on (0, T].

    Identical to ``fit`` with one full-horizon window per entity and the
    boundary intensities pinned at the background rates.
    """
    windows = WindowSet.full(events.n_entities, horizon)
    blind = FitConfig(mu=config.mu, boundary_mode=BoundaryMode.FIXED_AT_U,
                      box_scale=config.box_scale, tol=config.tol,
                      max_iter=config.max_iter, init=config.init)
    return fit(events, windows, blind)
