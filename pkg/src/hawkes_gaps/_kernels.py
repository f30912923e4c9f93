"""Jitted hot loops: thinning simulation and per-pair kernel-sum recursions.

Everything here is deterministic: the random stream is an explicit
splitmix64 state threaded through the simulation loop, so results are
reproducible across runs, processes and platforms.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True)
def _sm64_next(state):
    """Advance a splitmix64 state; return (new_state, 64-bit output)."""
    state = state + _U64_GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _U64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U64_MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _next_uniform(state):
    """Uniform draw in the open interval (0, 1)."""
    u = 0.0
    while u <= 0.0:
        state, z = _sm64_next(state)
        u = (z >> np.uint64(11)) * _INV_2_53
    return state, u


@njit(cache=True)
def simulate_thinning(u, a, b, horizon, seed):
    """Exact multivariate draw on (0, T] by thinning, starting at lam_m(0) = u_m.

    Between events each intensity decays monotonically, so the current total
    intensity is a valid dominating constant until the next candidate point.
    Returns (times, entity_ids), jointly sorted, strictly increasing.
    """
    n = u.shape[0]
    state = seed
    excite = np.zeros(n)  # lam_m(t+) = u[m] + excite[m]
    cap = 1024
    times = np.empty(cap)
    ids = np.empty(cap, np.int64)
    count = 0
    t = 0.0
    while True:
        bound = 0.0
        for m in range(n):
            bound += u[m] + excite[m]
        if bound <= 0.0:
            break
        state, uval = _next_uniform(state)
        dt = -np.log(uval) / bound
        if t + dt > horizon:
            break
        if t + dt <= t:
            continue  # step below float resolution; keep timestamps strictly increasing
        t = t + dt
        total = 0.0
        for m in range(n):
            excite[m] *= np.exp(-b[m] * dt)
            total += u[m] + excite[m]
        state, vval = _next_uniform(state)
        if vval * bound > total:
            continue  # thinned out
        state, wval = _next_uniform(state)
        target = wval * total
        acc = 0.0
        src = n - 1
        for m in range(n):
            acc += u[m] + excite[m]
            if target < acc:
                src = m
                break
        if count == cap:
            cap *= 2
            grown_t = np.empty(cap)
            grown_i = np.empty(cap, np.int64)
            grown_t[:count] = times
            grown_i[:count] = ids
            times = grown_t
            ids = grown_i
        times[count] = t
        ids[count] = src
        count += 1
        for m in range(n):
            excite[m] += a[m, src] * b[m]  # jump a[m, src] * b[m] at lag 0+
    return times[:count], ids[:count]


@njit(cache=True)
def pair_stats(target_times, target_window, starts, ends, source_times, decay):
    """Kernel sums of one (target entity, source entity) pair at decay rate b.

    For every target event i inside its window (c, d] the recursion carries

        raw[i] = sum_{c < s_j < t_i} exp(-b (t_i - s_j))
        lag[i] = sum_{c < s_j < t_i} (t_i - s_j) exp(-b (t_i - s_j))

    forward: both decay by exp(-b dt) between consecutive targets (lag also
    absorbs dt * raw), then events in [t_{i-1}, t_i) are folded in.  Per
    window, tail and tail_lag accumulate over sources s_j in (c, d]:

        tail[k]     = sum (1 - exp(-b (d - s_j)))
        tail_lag[k] = sum (d - s_j) exp(-b (d - s_j))

    Cost is linear in events; matches the quadratic definition to roundoff.
    """
    n_targets = target_times.shape[0]
    n_windows = starts.shape[0]
    n_sources = source_times.shape[0]
    raw = np.zeros(n_targets)
    lag = np.zeros(n_targets)
    tail = np.zeros(n_windows)
    tail_lag = np.zeros(n_windows)
    i = 0
    j0 = 0
    for k in range(n_windows):
        c = starts[k]
        d = ends[k]
        while j0 < n_sources and source_times[j0] <= c:
            j0 += 1
        j_end = j0
        while j_end < n_sources and source_times[j_end] <= d:
            j_end += 1
        for j in range(j0, j_end):
            gap = d - source_times[j]
            e = np.exp(-decay * gap)
            tail[k] += 1.0 - e
            tail_lag[k] += gap * e
        while i < n_targets and target_window[i] < k:
            i += 1
        acc_raw = 0.0
        acc_lag = 0.0
        prev = c
        first = True
        j = j0
        while i < n_targets and target_window[i] == k:
            ti = target_times[i]
            if not first:
                dt = ti - prev
                w = np.exp(-decay * dt)
                acc_lag = w * (acc_lag + dt * acc_raw)
                acc_raw = w * acc_raw
            while j < j_end and source_times[j] < ti:
                gap = ti - source_times[j]
                e = np.exp(-decay * gap)
                acc_raw += e
                acc_lag += gap * e
                j += 1
            raw[i] = acc_raw
            lag[i] = acc_lag
            prev = ti
            first = False
            i += 1
        j0 = j_end
    return raw, lag, tail, tail_lag


def warm_up():
    """Force compilation of the jitted kernels (cached on disk afterwards)."""
    u = np.array([1.0])
    a = np.array([[0.1]])
    b = np.array([1.0])
    simulate_thinning(u, a, b, 1.0, np.uint64(1))
    pair_stats(np.array([0.5]), np.array([0], np.int64),
               np.array([0.0]), np.array([1.0]), np.array([0.25]), 1.0)
