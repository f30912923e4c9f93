"""File formats: events/windows as CSV, parameters/results as JSON.

Floats are written with 17 significant digits so files round-trip exactly
and repeated runs are byte-identical.  Lines starting with '#' are
provenance comments and are skipped on read.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .core import BoundaryIntensities, EventData, InvalidArgumentError, ModelParams, WindowSet


def _fmt(x):
    return format(float(x), ".17g")


def config_hash(payload) -> str:
    """Short stable hash of a JSON-serializable configuration."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def provenance_line(seed, payload=None) -> str:
    tag = f"# seed={seed}"
    if payload is not None:
        tag += f" config_hash={config_hash(payload)}"
    return tag


def events_to_csv(events: EventData, provenance=None) -> str:
    lines = []
    if provenance:
        lines.append(provenance)
    lines.append("entity,time")
    for m, times in enumerate(events.times):
        for t in times:
            lines.append(f"{m},{_fmt(t)}")
    return "\n".join(lines) + "\n"


def events_from_csv(text, horizon=None, n_entities=None) -> EventData:
    """Parse an events CSV.

    Entities with no events do not appear in the file, so pass n_entities
    (e.g. from the windows file) when zero-event entities are possible.
    Without an explicit horizon the latest timestamp is used.
    """
    rows = _read_rows(text, "entity,time")
    per_entity = {}
    for entity, time in rows:
        per_entity.setdefault(int(entity), []).append(float(time))
    n = max(per_entity, default=-1) + 1 if n_entities is None else n_entities
    times = tuple(np.array(sorted(per_entity.get(m, []))) for m in range(n))
    if horizon is None:
        horizon = max((t[-1] for t in times if t.size), default=1.0)
    return EventData(times=times, horizon=float(horizon))


def windows_to_csv(windows: WindowSet, provenance=None) -> str:
    lines = []
    if provenance:
        lines.append(provenance)
    lines.append("entity,c,d")
    for m in range(windows.n_entities):
        for c, d in windows.intervals[m]:
            lines.append(f"{m},{_fmt(c)},{_fmt(d)}")
    return "\n".join(lines) + "\n"


def windows_from_csv(text, horizon=None, n_entities=None) -> WindowSet:
    """Parse a windows CSV; the horizon defaults to the latest window end."""
    rows = _read_rows(text, "entity,c,d")
    per_entity = {}
    for entity, c, d in rows:
        per_entity.setdefault(int(entity), []).append((float(c), float(d)))
    n = max(per_entity, default=-1) + 1 if n_entities is None else n_entities
    intervals = tuple(
        np.array(sorted(per_entity.get(m, []))).reshape(-1, 2) for m in range(n)
    )
    if horizon is None:
        horizon = max((w[-1, 1] for w in intervals if w.size), default=1.0)
    return WindowSet(intervals=intervals, horizon=float(horizon))


def _read_rows(text, expected_header):
    rows = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != expected_header:
                raise InvalidArgumentError(
                    f"expected header '{expected_header}', got '{line}'"
                )
            header_seen = True
            continue
        rows.append(line.split(","))
    if not header_seen:
        raise InvalidArgumentError(f"missing header '{expected_header}'")
    return rows


def params_to_json(params: ModelParams) -> str:
    payload = {
        "u": [float(x) for x in params.u],
        "a": [[float(x) for x in row] for row in params.a],
        "b": [float(x) for x in params.b],
    }
    return json.dumps(payload, indent=2) + "\n"


def params_from_json(text) -> ModelParams:
    payload = json.loads(text)
    for key in ("u", "a", "b"):
        if key not in payload:
            raise InvalidArgumentError(f"params file is missing field '{key}'")
    return ModelParams(u=payload["u"], a=payload["a"], b=payload["b"])


def result_to_json(params: ModelParams, bounds: BoundaryIntensities, trace,
                   iterations, converged, extra=None) -> str:
    payload = {
        "u": [float(x) for x in params.u],
        "a": [[float(x) for x in row] for row in params.a],
        "b": [float(x) for x in params.b],
        "lambda_bar": {str(m): [float(x) for x in v] for m, v in enumerate(bounds.values)},
        "objective_trace": [float(x) for x in trace],
        "iterations": int(iterations),
        "converged": bool(converged),
    }
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2) + "\n"
