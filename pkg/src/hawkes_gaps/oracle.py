"""Independent reference implementations used to validate the fast paths.

Nothing here shares code with the operations under test: kernel sums are
evaluated as literal double sums, integrals by composite midpoint
quadrature, and gradients by central differences.  All routines are desk
scale only and guard against inputs that would make the quadratic cost
explode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BoundaryIntensities,
    EventData,
    InvalidArgumentError,
    ModelParams,
    WindowSet,
)
from .estimate import SufficientStats

_MAX_PAIRS = 10_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite-midpoint settings; dt must resolve the smallest window."""

    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")

    def validate_for(self, windows: WindowSet):
        min_len = min(
            (float(windows.lengths(m).min()) for m in range(windows.n_entities)
             if windows.intervals[m].size),
            default=np.inf,
        )
        if self.dt > min_len / 100.0:
            raise InvalidArgumentError(
                f"dt={self.dt} too coarse for minimum window length {min_len}"
            )


def quad_integrated_cif(params: ModelParams, observed: EventData, windows: WindowSet,
                        bounds: BoundaryIntensities, m, k, spec: QuadratureSpec) -> float:
    """Composite-midpoint integral of the gapped intensity over window k.

    The window is split at interior event times so every piece is smooth;
    the intensity at each midpoint is evaluated as a literal masked sum over
    source events (no recursion, no shared state with the closed form).
    """
    spec.validate_for(windows)
    w = windows.intervals[m]
    if not 0 <= k < w.shape[0]:
        raise InvalidArgumentError(f"entity {m} has no window index {k}")
    c, d = w[k]
    u_m, b_m, lbar = params.u[m], params.b[m], bounds.values[m][k]
    sources = []
    weights = []
    for n in range(params.n_entities):
        tn = observed.times[n]
        src = tn[(tn > c) & (tn < d)]
        sources.append(src)
        weights.append(np.full(src.size, params.a[m, n] * b_m))
    src_all = np.concatenate(sources) if sources else np.empty(0)
    wts_all = np.concatenate(weights) if weights else np.empty(0)
    edges = np.unique(np.concatenate([[c], src_all, [d]]))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        n_cells = max(1, math.ceil((hi - lo) / spec.dt))
        h = (hi - lo) / n_cells
        mids = lo + (np.arange(n_cells) + 0.5) * h
        for chunk in np.array_split(mids, max(1, mids.size // 4096)):
            lam = u_m + (lbar - u_m) * np.exp(-b_m * (chunk - c))
            if src_all.size:
                diff = chunk[:, None] - src_all[None, :]
                mask = diff > 0
                lam = lam + np.sum(np.where(mask, np.exp(-b_m * np.where(mask, diff, 0.0)), 0.0)
                                   * wts_all[None, :], axis=1)
            total += h * float(np.sum(lam))
    return total


def brute_force_stats(observed: EventData, windows: WindowSet, b) -> SufficientStats:
    """Every kernel sum evaluated from its definition as an explicit double sum."""
    b = np.asarray(b, dtype=float)
    n = observed.n_entities
    sizes = np.array([t.size for t in observed.times])
    if float(sizes.sum()) ** 2 > _MAX_PAIRS:
        raise InvalidArgumentError("instance too large for the brute-force oracle")
    excite, excite_raw, excite_lag, tail, tail_lag = [], [], [], [], []
    for m in range(n):
        t_m = observed.times[m]
        w = windows.intervals[m]
        k_m = w.shape[0]
        ex = np.zeros((n, t_m.size))
        raw = np.zeros((n, t_m.size))
        lag = np.zeros((n, t_m.size))
        tl = np.zeros((n, k_m))
        tll = np.zeros((n, k_m))
        for src in range(n):
            t_n = observed.times[src]
            for k in range(k_m):
                c, d = w[k]
                in_window = t_n[(t_n > c) & (t_n <= d)]
                tl[src, k] = float(np.sum(1.0 - np.exp(-b[m] * (d - in_window))))
                tll[src, k] = float(np.sum((d - in_window) * np.exp(-b[m] * (d - in_window))))
            for i, ti in enumerate(t_m):
                k = windows.window_of(m, ti)
                if k < 0:
                    raise InvalidArgumentError(
                        f"entity {m}: event at t={ti} lies outside all windows"
                    )
                c = w[k, 0]
                past = t_n[(t_n > c) & (t_n < ti)]
                gaps = ti - past
                ex[src, i] = float(np.sum(b[m] * np.exp(-b[m] * gaps)))
                raw[src, i] = float(np.sum(np.exp(-b[m] * gaps)))
                lag[src, i] = float(np.sum(gaps * np.exp(-b[m] * gaps)))
        excite.append(ex)
        excite_raw.append(raw)
        excite_lag.append(lag)
        tail.append(tl)
        tail_lag.append(tll)
    return SufficientStats(decay=b.copy(), excite=tuple(excite),
                           excite_raw=tuple(excite_raw), excite_lag=tuple(excite_lag),
                           tail=tuple(tail), tail_lag=tuple(tail_lag))


def fd_gradient(func, point, coord, h) -> float:
    """Central difference (f(x + h e_c) - f(x - h e_c)) / 2h."""
    if not h > 0:
        raise InvalidArgumentError(f"h must be positive, got {h}")
    point = np.asarray(point, dtype=float)
    up = point.copy()
    down = point.copy()
    up[coord] += h
    down[coord] -= h
    f_up, f_down = func(up), func(down)
    if not (np.isfinite(f_up) and np.isfinite(f_down)):
        raise InvalidArgumentError("objective is not finite at the probe points")
    return (f_up - f_down) / (2.0 * h)


def poisson_mle(observed: EventData, windows: WindowSet):
    """Per-entity event count divided by total observed time."""
    out = np.empty(observed.n_entities)
    for m in range(observed.n_entities):
        length = float(windows.lengths(m).sum()) if windows.intervals[m].size else 0.0
        if length <= 0:
            raise InvalidArgumentError(f"entity {m}: zero observed time")
        out[m] = observed.times[m].size / length
    return out


def full_data_nll(params: ModelParams, events: EventData, mu) -> float:
    """Penalized negative log-likelihood for complete observation on (0, T].

    Direct evaluation: per-event intensities as literal history sums and the
    integral in closed form.  Independent of the windowed machinery.
    """
    sizes = np.array([t.size for t in events.times])
    if float(sizes.sum()) ** 2 > _MAX_PAIRS:
        raise InvalidArgumentError("instance too large for the brute-force oracle")
    horizon = events.horizon
    total = mu * float(np.sum(np.abs(params.a)))
    for m in range(params.n_entities):
        b_m = params.b[m]
        integral = params.u[m] * horizon
        for n in range(params.n_entities):
            integral += params.a[m, n] * float(
                np.sum(1.0 - np.exp(-b_m * (horizon - events.times[n])))
            )
        log_sum = 0.0
        for ti in events.times[m]:
            lam = params.u[m]
            for n in range(params.n_entities):
                past = events.times[n][events.times[n] < ti]
                lam += params.a[m, n] * b_m * float(np.sum(np.exp(-b_m * (ti - past))))
            log_sum += math.log(lam)
        total += integral - log_sum
    return total
