import numpy as np
import pytest

from hawkes_gaps import _kernels
from hawkes_gaps.core import BoundaryIntensities, EventData, ModelParams, WindowSet
from hawkes_gaps.windows import restrict_events


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or load cached) jitted kernels once so timed tests stay honest
    _kernels.warm_up()


@pytest.fixture
def example1_params():
    return ModelParams(u=[5.0, 5.0], a=[[0.5, 0.5], [0.0, 0.5]], b=[10.0, 10.0])


@pytest.fixture
def example2_params():
    return ModelParams(u=[1.0, 2.0], a=[[0.9, 0.75], [0.0, 0.9]], b=[10.0, 10.0])


def random_instance(rng, n_entities=2, max_events=50, n_windows=3, horizon=10.0,
                    b_low=0.5, b_high=8.0, interior_bounds=True):
    """Small random gapped instance: params, observed events, windows, bounds.

    Boundary values are drawn strictly inside (u, 20u) so box constraints are
    inactive, which the gradient identities assume.
    """
    times = tuple(
        np.sort(rng.uniform(1e-3, horizon, size=rng.integers(3, max_events + 1)))
        for _ in range(n_entities)
    )
    events = EventData(times=times, horizon=horizon)
    pts = np.sort(rng.uniform(0.0, horizon, size=2 * n_windows))
    while np.any(np.diff(pts) < 1e-3):
        pts = np.sort(rng.uniform(0.0, horizon, size=2 * n_windows))
    w = pts.reshape(n_windows, 2)
    windows = WindowSet(intervals=tuple(w for _ in range(n_entities)), horizon=horizon)
    observed = restrict_events(events, windows)
    params = ModelParams(u=rng.uniform(0.5, 3.0, n_entities),
                         a=rng.uniform(0.05, 0.6, (n_entities, n_entities)),
                         b=rng.uniform(b_low, b_high, n_entities))
    if interior_bounds:
        scale = rng.uniform(1.5, 5.0, (n_entities, n_windows))
    else:
        scale = np.ones((n_entities, n_windows))
    bounds = BoundaryIntensities(values=tuple(params.u[m] * scale[m] for m in range(n_entities)))
    return params, observed, windows, bounds
