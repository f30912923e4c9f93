import numpy as np
import pytest

from hawkes_gaps.core import (
    BoundaryIntensities,
    EventData,
    InvalidArgumentError,
    ModelParams,
    WindowSet,
    cif_full,
    cif_gapped,
    integrated_cif_window,
    spectral_radius,
)
from hawkes_gaps.oracle import QuadratureSpec, quad_integrated_cif
from hawkes_gaps.simulate import SimConfig, simulate
from hawkes_gaps.windows import restrict_events


class TestSpectralRadius:
    def test_triangular_example1(self):
        assert spectral_radius([[0.5, 0.5], [0.0, 0.5]]) == pytest.approx(0.5, abs=1e-12)

    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((2, 2))) == 0.0

    def test_triangular_example2(self):
        assert spectral_radius([[0.9, 0.75], [0.0, 0.9]]) == pytest.approx(0.9, abs=1e-12)

    def test_large_matrix_power_iteration(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(0.0, 1.0, (25, 25)) / 25.0
        dense = np.max(np.abs(np.linalg.eigvals(a)))
        assert spectral_radius(a) == pytest.approx(dense, rel=1e-8)

    def test_non_square_rejected(self):
        with pytest.raises(InvalidArgumentError):
            spectral_radius(np.ones((2, 3)))

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            spectral_radius([[np.nan, 0.0], [0.0, 0.1]])


class TestTypes:
    def test_params_invariants(self):
        with pytest.raises(InvalidArgumentError):
            ModelParams(u=[-1.0], a=[[0.1]], b=[1.0])
        with pytest.raises(InvalidArgumentError):
            ModelParams(u=[1.0], a=[[-0.1]], b=[1.0])
        with pytest.raises(InvalidArgumentError):
            ModelParams(u=[1.0], a=[[0.1]], b=[0.0])
        with pytest.raises(InvalidArgumentError):
            ModelParams(u=[1.0, 2.0], a=[[0.1]], b=[1.0])

    def test_stationarity_flag(self, example1_params):
        assert example1_params.is_stationary()
        hot = ModelParams(u=[1.0], a=[[1.1]], b=[1.0])
        assert not hot.is_stationary()

    def test_event_data_invariants(self):
        with pytest.raises(InvalidArgumentError):
            EventData(times=(np.array([2.0, 1.0]),), horizon=3.0)
        with pytest.raises(InvalidArgumentError):
            EventData(times=(np.array([1.0, 1.0]),), horizon=3.0)
        with pytest.raises(InvalidArgumentError):
            EventData(times=(np.array([0.5, 4.0]),), horizon=3.0)
        with pytest.raises(InvalidArgumentError):
            EventData(times=(np.array([0.0]),), horizon=3.0)
        ev = EventData(times=(np.array([0.5, 3.0]),), horizon=3.0)  # t == T allowed
        assert ev.counts().tolist() == [2]

    def test_window_set_invariants(self):
        with pytest.raises(InvalidArgumentError):
            WindowSet(intervals=(np.array([[1.0, 0.5]]),), horizon=2.0)
        with pytest.raises(InvalidArgumentError):
            WindowSet(intervals=(np.array([[0.0, 1.0], [0.5, 1.5]]),), horizon=2.0)
        with pytest.raises(InvalidArgumentError):
            WindowSet(intervals=(np.array([[0.0, 3.0]]),), horizon=2.0)
        ws = WindowSet(intervals=(np.array([[0.0, 1.0], [1.0, 2.0]]),), horizon=2.0)
        assert ws.n_windows().tolist() == [2]

    def test_window_membership_half_open(self):
        ws = WindowSet(intervals=(np.array([[1.0, 2.0]]),), horizon=3.0)
        assert ws.window_of(0, 1.0) == -1  # t == c excluded
        assert ws.window_of(0, 2.0) == 0   # t == d included
        assert ws.window_of(0, 1.5) == 0
        assert ws.window_of(0, 2.5) == -1

    def test_boundary_intensities(self, example1_params):
        ws = WindowSet(intervals=(np.array([[0.0, 1.0]]), np.array([[0.0, 1.0]])), horizon=1.0)
        bounds = BoundaryIntensities.at_background(example1_params, ws)
        assert bounds.values[0][0] == 5.0
        assert bounds.check_box(example1_params, 20.0)
        with pytest.raises(InvalidArgumentError):
            BoundaryIntensities(values=(np.array([-1.0]),))


class TestCifFull:
    def test_no_events_background(self):
        ev = EventData(times=(np.empty(0),), horizon=10.0)
        params = ModelParams(u=[1.7], a=[[0.3]], b=[2.0])
        assert cif_full(params, ev, 0, 5.0) == pytest.approx(1.7)

    def test_univariate_hand_value(self):
        # u + a*b*exp(-b*(t - t1)) = 1 + 0.5*2*exp(-2) at t=2, t1=1
        params = ModelParams(u=[1.0], a=[[0.5]], b=[2.0])
        ev = EventData(times=(np.array([1.0]),), horizon=3.0)
        expected = 1.0 + 0.5 * 2.0 * np.exp(-2.0)
        assert expected == pytest.approx(1.1353352832366127)
        assert cif_full(params, ev, 0, 2.0) == pytest.approx(expected, rel=1e-12)

    def test_jump_across_influential_event(self):
        # one-way influence setup: an entity-1 event lifts entity 0's
        # intensity by a[0,1] * b[0] = 7.5 at lag 0+
        params = ModelParams(u=[0.1, 0.1], a=[[0.25, 0.75], [0.0, 0.25]], b=[10.0, 1.0])
        ev = EventData(times=(np.empty(0), np.array([1.0])), horizon=3.0)
        eps = 1e-9
        jump = cif_full(params, ev, 0, 1.0 + eps) - cif_full(params, ev, 0, 1.0)
        assert jump == pytest.approx(0.75 * 10.0, rel=1e-6)
        # and nothing flows the other way: entity 1 ignores entity-0 events
        ev2 = EventData(times=(np.array([1.0]), np.empty(0)), horizon=3.0)
        assert cif_full(params, ev2, 1, 1.5) == pytest.approx(0.1)

    def test_domain_validation(self):
        params = ModelParams(u=[1.0], a=[[0.2]], b=[1.0])
        ev = EventData(times=(np.array([0.5]),), horizon=2.0)
        with pytest.raises(InvalidArgumentError):
            cif_full(params, ev, 0, 0.0)
        with pytest.raises(InvalidArgumentError):
            cif_full(params, ev, 0, 2.5)

    def test_lower_bound_and_relaxation(self):
        params = ModelParams(u=[0.8], a=[[0.6]], b=[3.0])
        ev = EventData(times=(np.array([0.3, 0.9]),), horizon=10.0)
        for t in np.linspace(0.05, 10.0, 37):
            assert cif_full(params, ev, 0, t) >= 0.8 - 1e-15
        # exponential relaxation between events: lam(t) - u = (lam(s) - u) e^{-b(t-s)}
        s, t = 2.0, 4.5
        ls = cif_full(params, ev, 0, s) - 0.8
        lt = cif_full(params, ev, 0, t) - 0.8
        assert lt == pytest.approx(ls * np.exp(-3.0 * (t - s)), rel=1e-12)


class TestCifGapped:
    def _setup(self):
        params = ModelParams(u=[1.0, 0.5], a=[[0.4, 0.3], [0.2, 0.5]], b=[2.0, 4.0])
        w = np.array([[1.0, 3.0], [5.0, 8.0]])
        windows = WindowSet(intervals=(w, w), horizon=10.0)
        ev = EventData(times=(np.array([1.5, 2.5, 6.0]), np.array([2.0, 5.5])), horizon=10.0)
        obs = restrict_events(ev, windows)
        bounds = BoundaryIntensities(values=(np.array([3.0, 2.0]), np.array([0.5, 1.0])))
        return params, obs, windows, bounds

    def test_background_only_window(self):
        params, obs, windows, _ = self._setup()
        quiet = BoundaryIntensities.at_background(params, windows)
        empty = EventData(times=(np.empty(0), np.empty(0)), horizon=10.0)
        assert cif_gapped(params, empty, windows, quiet, 0, 2.2) == pytest.approx(1.0)

    def test_left_limit_is_boundary_value(self):
        params, obs, windows, bounds = self._setup()
        val = cif_gapped(params, obs, windows, bounds, 0, 1.0 + 1e-12)
        assert val == pytest.approx(3.0, rel=1e-9)

    def test_gap_time_rejected(self):
        params, obs, windows, bounds = self._setup()
        with pytest.raises(InvalidArgumentError):
            cif_gapped(params, obs, windows, bounds, 0, 4.0)
        with pytest.raises(InvalidArgumentError):
            cif_gapped(params, obs, windows, bounds, 0, 1.0)  # t == c is outside

    def test_full_horizon_matches_cif_full(self, example1_params):
        events = simulate(SimConfig(params=example1_params, horizon=12.0, seed=5))
        windows = WindowSet.full(2, 12.0)
        bounds = BoundaryIntensities.at_background(example1_params, windows)
        rng = np.random.default_rng(0)
        for t in rng.uniform(0.01, 12.0, 40):
            full = cif_full(example1_params, events, 0, t)
            gapped = cif_gapped(example1_params, events, windows, bounds, 0, t)
            assert gapped == pytest.approx(full, rel=1e-13)

    def test_lower_bound(self):
        params, obs, windows, bounds = self._setup()
        for t in np.linspace(1.01, 2.99, 23):
            val = cif_gapped(params, obs, windows, bounds, 0, t)
            assert val >= min(params.u[0], bounds.values[0][0]) - 1e-12

    def test_relaxation_within_window(self):
        params, obs, windows, bounds = self._setup()
        # entity 1, window (5, 8]: no events of either entity in (6.5, 7.5]
        s, t = 6.5, 7.5
        ls = cif_gapped(params, obs, windows, bounds, 1, s) - params.u[1]
        lt = cif_gapped(params, obs, windows, bounds, 1, t) - params.u[1]
        assert lt == pytest.approx(ls * np.exp(-params.b[1] * (t - s)), rel=1e-12)


class TestIntegratedCif:
    def test_poisson_mass(self):
        params = ModelParams(u=[1.3], a=[[0.2]], b=[2.0])
        windows = WindowSet(intervals=(np.array([[1.0, 4.0]]),), horizon=5.0)
        empty = EventData(times=(np.empty(0),), horizon=5.0)
        bounds = BoundaryIntensities.at_background(params, windows)
        assert integrated_cif_window(params, empty, windows, bounds, 0, 0) == pytest.approx(1.3 * 3.0)

    def test_single_event_hand_formula(self):
        u, a, b = 1.0, 0.5, 2.0
        c, d, tj, lbar = 1.0, 3.0, 1.8, 2.5
        params = ModelParams(u=[u], a=[[a]], b=[b])
        windows = WindowSet(intervals=(np.array([[c, d]]),), horizon=4.0)
        obs = EventData(times=(np.array([tj]),), horizon=4.0)
        bounds = BoundaryIntensities(values=(np.array([lbar]),))
        expected = (u * (d - c)
                    + (lbar - u) / b * (1 - np.exp(-b * (d - c)))
                    + a * (1 - np.exp(-b * (d - tj))))
        got = integrated_cif_window(params, obs, windows, bounds, 0, 0)
        assert got == pytest.approx(expected, rel=1e-14)

    def test_invalid_window_index(self):
        params = ModelParams(u=[1.0], a=[[0.2]], b=[2.0])
        windows = WindowSet(intervals=(np.array([[0.0, 1.0]]),), horizon=2.0)
        empty = EventData(times=(np.empty(0),), horizon=2.0)
        bounds = BoundaryIntensities.at_background(params, windows)
        with pytest.raises(InvalidArgumentError):
            integrated_cif_window(params, empty, windows, bounds, 0, 1)

    def test_matches_quadrature(self):
        rng = np.random.default_rng(11)
        from tests.conftest import random_instance

        for _ in range(5):
            params, observed, windows, bounds = random_instance(rng)
            for k in range(windows.intervals[0].shape[0]):
                length = float(windows.lengths(0)[k])
                closed = integrated_cif_window(params, observed, windows, bounds, 0, k)
                quad = quad_integrated_cif(params, observed, windows, bounds, 0, k,
                                           QuadratureSpec(dt=1e-4 * length))
                assert quad == pytest.approx(closed, rel=1e-6)
