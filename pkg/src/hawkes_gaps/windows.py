"""Observation-window generation, interval algebra and event restriction.

Windows alternate with gaps: lengths are uniform on (tau1, tau2), gaps
uniform on (tau1/2p, tau2/2p).  The long-run observed fraction is therefore
mean-window / (mean-window + mean-gap) = 2p / (1 + 2p), not the nominal p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import EventData, InvalidArgumentError, WindowSet
from .seeding import StreamTag, derive_seed


@dataclass(frozen=True)
class GapConfig:
    """Window-generation settings: target fraction p and length bounds tau1 < tau2."""

    p: float
    tau1: float
    tau2: float
    horizon: float
    seed: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise InvalidArgumentError(f"p must lie in (0, 1), got {self.p}")
        if not 0 < self.tau1 < self.tau2 <= self.horizon:
            raise InvalidArgumentError(
                f"need 0 < tau1 < tau2 <= T, got tau1={self.tau1}, tau2={self.tau2}, T={self.horizon}"
            )


def _uniform(state, lo, hi):
    # numba hands the uint64 state back as a python int; re-wrap it
    state, u = _kernels._next_uniform(np.uint64(state))
    return state, lo + (hi - lo) * u


def generate_windows(config: GapConfig) -> WindowSet:
    """Draw a single entity's observation windows.

    The first window starts at 0; the last window is clipped to end at T.
    A window whose start falls at or beyond T is dropped entirely.
    """
    state = np.uint64(config.seed)
    gap_lo = config.tau1 / (2.0 * config.p)
    gap_hi = config.tau2 / (2.0 * config.p)
    out = []
    c = 0.0
    state, length = _uniform(state, config.tau1, config.tau2)
    d = c + length
    while True:
        if c >= config.horizon:
            break
        if d >= config.horizon:
            out.append((c, config.horizon))
            break
        out.append((c, d))
        state, gap = _uniform(state, gap_lo, gap_hi)
        c = d + gap
        state, length = _uniform(state, config.tau1, config.tau2)
        d = c + length
    return WindowSet(intervals=(np.array(out).reshape(-1, 2),), horizon=config.horizon)


def shared_windows(config: GapConfig, n_entities) -> WindowSet:
    """One draw replicated across all entities (identical observed intervals)."""
    single = generate_windows(config)
    return WindowSet(intervals=tuple(single.intervals[0] for _ in range(n_entities)),
                     horizon=config.horizon)


def independent_windows(config: GapConfig, n_entities) -> WindowSet:
    """Independent draws per entity from streams (seed, WINDOWS, m)."""
    ivs = []
    for m in range(n_entities):
        cfg = GapConfig(p=config.p, tau1=config.tau1, tau2=config.tau2,
                        horizon=config.horizon,
                        seed=derive_seed(config.seed, StreamTag.WINDOWS, m))
        ivs.append(generate_windows(cfg).intervals[0])
    return WindowSet(intervals=tuple(ivs), horizon=config.horizon)


def _intersect_two(a, b):
    """Intersection of two disjoint ordered interval lists, merged canonical."""
    out = []
    i = j = 0
    while i < a.shape[0] and j < b.shape[0]:
        lo = max(a[i, 0], b[j, 0])
        hi = min(a[i, 1], b[j, 1])
        if lo < hi:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)  # merge abutting pieces
            else:
                out.append((lo, hi))
        if a[i, 1] <= b[j, 1]:
            i += 1
        else:
            j += 1
    return np.array(out, dtype=float).reshape(-1, 2)


def _merge_abutting(w):
    if w.shape[0] < 2:
        return w
    out = [(w[0, 0], w[0, 1])]
    for c, d in w[1:]:
        if out[-1][1] == c:
            out[-1] = (out[-1][0], d)
        else:
            out.append((c, d))
    return np.array(out).reshape(-1, 2)


def intersect_windows(ws_list) -> WindowSet:
    """Entity-wise intersection of several WindowSets sharing a horizon."""
    if not ws_list:
        raise InvalidArgumentError("intersect_windows needs at least one WindowSet")
    horizon = ws_list[0].horizon
    n = ws_list[0].n_entities
    for ws in ws_list[1:]:
        if ws.horizon != horizon or ws.n_entities != n:
            raise InvalidArgumentError("WindowSets must share horizon and entity count")
    ivs = []
    for m in range(n):
        acc = _merge_abutting(ws_list[0].intervals[m])
        for ws in ws_list[1:]:
            acc = _intersect_two(acc, _merge_abutting(ws.intervals[m]))
        ivs.append(acc)
    return WindowSet(intervals=tuple(ivs), horizon=horizon)


def common_windows(windows: WindowSet) -> WindowSet:
    """Intersection across entities, broadcast back to every entity.

    Used when per-entity windows differ and a shared observation set is
    wanted: keep only the intervals during which every entity is observed.
    """
    acc = _merge_abutting(windows.intervals[0])
    for m in range(1, windows.n_entities):
        acc = _intersect_two(acc, _merge_abutting(windows.intervals[m]))
    return WindowSet(intervals=tuple(acc for _ in range(windows.n_entities)),
                     horizon=windows.horizon)


def restrict_events(events: EventData, windows: WindowSet) -> EventData:
    """Keep only events lying in some window of their own entity."""
    if events.n_entities != windows.n_entities:
        raise InvalidArgumentError("events and windows must have the same entity count")
    if events.horizon != windows.horizon:
        raise InvalidArgumentError("events and windows must share the horizon")
    kept = []
    for m in range(events.n_entities):
        t = events.times[m]
        w = windows.intervals[m]
        if t.size == 0 or w.shape[0] == 0:
            kept.append(np.empty(0))
            continue
        # half-open membership: c < t <= d
        idx = np.searchsorted(w[:, 1], t, side="left")
        idx_c = np.minimum(idx, w.shape[0] - 1)
        inside = (idx < w.shape[0]) & (t > w[idx_c, 0]) & (t <= w[idx_c, 1])
        kept.append(t[inside])
    return EventData(times=tuple(kept), horizon=events.horizon)


def observed_fraction(windows: WindowSet):
    """Per-entity total window length divided by the horizon."""
    return np.array([
        windows.lengths(m).sum() / windows.horizon for m in range(windows.n_entities)
    ])
