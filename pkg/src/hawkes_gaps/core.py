"""Core model types and conditional intensity evaluation.

A multivariate self-exciting process over entities m = 1..N has intensity

    lam_m(t) = u[m] + sum_n a[m, n] * sum_{t_nj < t} b[m] * exp(-b[m] * (t - t_nj))

with background rates u >= 0, branching weights a >= 0 and decay rates b > 0.
When entity m is only observed on disjoint half-open windows (c, d], the
history before each window start is summarized by one unknown boundary
intensity per window, and the in-window intensity becomes

    lam_m(t) = u[m] + (lbar[m, k] - u[m]) * exp(-b[m] * (t - c))
               + sum_n a[m, n] * sum_{c < t_nj < t} b[m] * exp(-b[m] * (t - t_nj))

for t in window k = (c, d] of entity m, summing only observed events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when an iteration or evaluation degenerates numerically."""


class EvaluationError(NumericalError):
    """Nonpositive intensity at an observed event.

    Carries the offending (entity, window, event-within-window) triple.
    """

    def __init__(self, entity, window, event):
        self.entity = entity
        self.window = window
        self.event = event
        super().__init__(
            f"nonpositive intensity at entity {entity}, window {window}, event {event}"
        )


def _readonly(x, dtype=float):
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Background rates u (events/time), branching matrix a, decay rates b (1/time)."""

    u: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _readonly(self.u))
        object.__setattr__(self, "a", _readonly(self.a))
        object.__setattr__(self, "b", _readonly(self.b))
        n = self.u.shape[0]
        if self.u.ndim != 1 or self.a.shape != (n, n) or self.b.shape != (n,):
            raise InvalidArgumentError(
                f"inconsistent shapes: u {self.u.shape}, a {self.a.shape}, b {self.b.shape}"
            )
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise InvalidArgumentError("parameters must be finite")
        if np.any(self.u < 0):
            raise InvalidArgumentError("background rates u must be nonnegative")
        if np.any(self.a < 0):
            raise InvalidArgumentError("branching weights a must be nonnegative")
        if np.any(self.b <= 0):
            raise InvalidArgumentError("decay rates b must be strictly positive")

    @property
    def n_entities(self):
        return self.u.shape[0]

    def spectral_radius(self):
        return spectral_radius(self.a)

    def is_stationary(self):
        """Stationary iff the spectral radius of the branching matrix is < 1."""
        return self.spectral_radius() < 1.0


@dataclass(frozen=True)
class EventData:
    """Per-entity strictly increasing event timestamps in (0, T]."""

    times: tuple
    horizon: float

    def __post_init__(self):
        if not self.horizon > 0:
            raise InvalidArgumentError(f"horizon must be positive, got {self.horizon}")
        times = tuple(_readonly(t) for t in self.times)
        object.__setattr__(self, "times", times)
        for m, t in enumerate(times):
            if t.ndim != 1:
                raise InvalidArgumentError(f"entity {m}: timestamps must be 1-d")
            if t.size and (t[0] <= 0 or t[-1] > self.horizon):
                raise InvalidArgumentError(f"entity {m}: timestamps must lie in (0, T]")
            if t.size > 1 and np.any(np.diff(t) <= 0):
                raise InvalidArgumentError(f"entity {m}: timestamps must be strictly increasing")

    @property
    def n_entities(self):
        return len(self.times)

    def counts(self):
        return np.array([t.size for t in self.times])


@dataclass(frozen=True)
class WindowSet:
    """Per-entity disjoint ordered half-open observation intervals (c, d] in (0, T].

    ``intervals[m]`` is a (K_m, 2) array of [c, d] rows.  Membership is
    half-open: an event at t == c is outside, t == d inside.
    """

    intervals: tuple
    horizon: float

    def __post_init__(self):
        if not self.horizon > 0:
            raise InvalidArgumentError(f"horizon must be positive, got {self.horizon}")
        ivs = []
        for m, w in enumerate(self.intervals):
            w = np.array(w, dtype=float).reshape(-1, 2)
            w.setflags(write=False)
            if w.size:
                c, d = w[:, 0], w[:, 1]
                if np.any(c < 0) or np.any(d > self.horizon):
                    raise InvalidArgumentError(f"entity {m}: windows must lie in [0, T]")
                if np.any(c >= d):
                    raise InvalidArgumentError(f"entity {m}: windows must have c < d")
                if np.any(d[:-1] > c[1:]):
                    raise InvalidArgumentError(f"entity {m}: windows must be disjoint and ordered")
            ivs.append(w)
        object.__setattr__(self, "intervals", tuple(ivs))

    @property
    def n_entities(self):
        return len(self.intervals)

    def n_windows(self):
        return np.array([w.shape[0] for w in self.intervals])

    def starts(self, m):
        return self.intervals[m][:, 0]

    def ends(self, m):
        return self.intervals[m][:, 1]

    def lengths(self, m):
        w = self.intervals[m]
        return w[:, 1] - w[:, 0]

    def window_of(self, m, t):
        """Index of the window of entity m containing t, or -1 if t is in a gap."""
        w = self.intervals[m]
        k = int(np.searchsorted(w[:, 1], t, side="left")) if w.size else 0
        if w.size and k < w.shape[0] and w[k, 0] < t <= w[k, 1]:
            return k
        return -1

    @staticmethod
    def full(n_entities, horizon):
        """One window (0, T] per entity: complete observation."""
        w = [np.array([[0.0, horizon]]) for _ in range(n_entities)]
        return WindowSet(intervals=tuple(w), horizon=horizon)


@dataclass(frozen=True)
class BoundaryIntensities:
    """One unknown intensity per (entity, window) pair, aligned to a WindowSet."""

    values: tuple

    def __post_init__(self):
        vals = tuple(_readonly(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        for m, v in enumerate(vals):
            if v.ndim != 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
                raise InvalidArgumentError(f"entity {m}: boundary intensities must be finite and >= 0")

    @property
    def n_entities(self):
        return len(self.values)

    @staticmethod
    def at_background(params: ModelParams, windows: WindowSet):
        """lbar[m, k] = u[m] for every window: the fixed-boundary convention."""
        vals = tuple(
            np.full(windows.intervals[m].shape[0], params.u[m]) for m in range(windows.n_entities)
        )
        return BoundaryIntensities(values=vals)

    def check_box(self, params: ModelParams, scale):
        """True iff u[m] <= lbar[m, k] <= scale * u[m] for all entries."""
        for m, v in enumerate(self.values):
            if np.any(v < params.u[m] - 1e-12) or np.any(v > scale * params.u[m] + 1e-12):
                return False
        return True


def spectral_radius(a):
    """Largest eigenvalue magnitude of a square matrix.

    For small matrices (N <= 16) a dense eigensolve is both robust and cheap;
    power iteration (tol 1e-10, 10k iteration cap) covers larger nonnegative
    inputs where the Perron root dominates, falling back to the dense solve
    if it fails to settle.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix entries must be finite")
    n = a.shape[0]
    if n <= 16:
        return float(np.max(np.abs(np.linalg.eigvals(a))))
    x = np.full(n, 1.0 / np.sqrt(n))
    rho = 0.0
    for _ in range(10_000):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x_new = y / norm
        if abs(norm - rho) <= 1e-10 * max(1.0, norm):
            return float(norm)
        rho, x = norm, x_new
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def cif_full(params: ModelParams, events: EventData, m, t):
    """Intensity of entity m at time t given the complete history before t."""
    if not 0 < t <= events.horizon:
        raise InvalidArgumentError(f"t must lie in (0, T], got {t}")
    bm = params.b[m]
    total = params.u[m]
    for n in range(params.n_entities):
        tn = events.times[n]
        past = tn[tn < t]
        if past.size:
            total += params.a[m, n] * bm * np.sum(np.exp(-bm * (t - past)))
    return float(total)


def cif_gapped(params: ModelParams, observed: EventData, windows: WindowSet,
               bounds: BoundaryIntensities, m, t):
    """Gap-aware intensity of entity m at t, valid inside one of m's windows.

    The pre-window history is collapsed into the window's boundary intensity,
    which relaxes toward u[m] at rate b[m]; observed events after the window
    start excite as usual.
    """
    k = windows.window_of(m, t)
    if k < 0:
        raise InvalidArgumentError(f"t={t} lies in no observation window of entity {m}")
    c = windows.intervals[m][k, 0]
    bm = params.b[m]
    total = params.u[m] + (bounds.values[m][k] - params.u[m]) * np.exp(-bm * (t - c))
    for n in range(params.n_entities):
        tn = observed.times[n]
        src = tn[(tn > c) & (tn < t)]
        if src.size:
            total += params.a[m, n] * bm * np.sum(np.exp(-bm * (t - src)))
    return float(total)


def integrated_cif_window(params: ModelParams, observed: EventData, windows: WindowSet,
                          bounds: BoundaryIntensities, m, k):
    """Closed-form integral of the gapped intensity over window k of entity m.

    integral = u*(d-c) + (lbar - u)/b * (1 - exp(-b(d-c)))
               + sum_n a[m,n] * sum_{c < t_nj <= d} (1 - exp(-b(d - t_nj)))
    """
    w = windows.intervals[m]
    if not 0 <= k < w.shape[0]:
        raise InvalidArgumentError(f"entity {m} has no window index {k}")
    c, d = w[k]
    bm = params.b[m]
    length = d - c
    total = params.u[m] * length
    total += (bounds.values[m][k] - params.u[m]) / bm * (1.0 - np.exp(-bm * length))
    for n in range(params.n_entities):
        tn = observed.times[n]
        src = tn[(tn > c) & (tn <= d)]
        if src.size:
            total += params.a[m, n] * np.sum(1.0 - np.exp(-bm * (d - src)))
    return float(total)
