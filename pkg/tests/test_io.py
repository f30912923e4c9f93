import numpy as np
import pytest

from hawkes_gaps.core import BoundaryIntensities, EventData, InvalidArgumentError, ModelParams, WindowSet
from hawkes_gaps import io as formats


def test_events_round_trip():
    ev = EventData(times=(np.array([0.1234567890123456, 2.5]), np.array([1.0 / 3.0])),
                   horizon=5.0)
    text = formats.events_to_csv(ev, provenance="# seed=1")
    back = formats.events_from_csv(text, horizon=5.0)
    assert all(np.array_equal(a, b) for a, b in zip(ev.times, back.times))
    assert text.splitlines()[0] == "# seed=1"
    assert text.splitlines()[1] == "entity,time"


def test_events_zero_event_entity_needs_count():
    ev = EventData(times=(np.array([1.0]), np.empty(0)), horizon=5.0)
    text = formats.events_to_csv(ev)
    assert formats.events_from_csv(text).n_entities == 1
    assert formats.events_from_csv(text, n_entities=2).n_entities == 2


def test_windows_round_trip():
    ws = WindowSet(intervals=(np.array([[0.0, 1.5], [2.0, 5.0]]), np.array([[1.0, 4.0]])),
                   horizon=5.0)
    text = formats.windows_to_csv(ws)
    back = formats.windows_from_csv(text)
    assert back.horizon == 5.0
    for m in range(2):
        assert np.array_equal(ws.intervals[m], back.intervals[m])


def test_params_round_trip():
    params = ModelParams(u=[5.0, 1e-7], a=[[0.5, 0.25], [0.0, 0.9]], b=[10.0, 1000.0])
    back = formats.params_from_json(formats.params_to_json(params))
    assert np.array_equal(params.u, back.u)
    assert np.array_equal(params.a, back.a)
    assert np.array_equal(params.b, back.b)


def test_params_missing_field_named():
    with pytest.raises(InvalidArgumentError, match="'b'"):
        formats.params_from_json('{"u": [1.0], "a": [[0.1]]}')


def test_bad_header_rejected():
    with pytest.raises(InvalidArgumentError, match="entity,time"):
        formats.events_from_csv("time,entity\n0.5,0\n")
    with pytest.raises(InvalidArgumentError, match="missing header"):
        formats.windows_from_csv("# only a comment\n")


def test_result_json_shape():
    params = ModelParams(u=[1.0], a=[[0.2]], b=[3.0])
    bounds = BoundaryIntensities(values=(np.array([1.0, 1.5]),))
    text = formats.result_to_json(params, bounds, [3.0, 2.0], 2, True,
                                  extra={"method": "mhpg-box"})
    import json

    payload = json.loads(text)
    assert payload["u"] == [1.0]
    assert payload["lambda_bar"] == {"0": [1.0, 1.5]}
    assert payload["objective_trace"] == [3.0, 2.0]
    assert payload["converged"] is True
    assert payload["method"] == "mhpg-box"


def test_deterministic_bytes():
    ev = EventData(times=(np.array([0.1, 0.7]),), horizon=2.0)
    assert formats.events_to_csv(ev) == formats.events_to_csv(ev)
    payload = {"p": 0.3, "seed": 7}
    assert formats.config_hash(payload) == formats.config_hash({"seed": 7, "p": 0.3})
