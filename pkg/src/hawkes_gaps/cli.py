"""Command-line client for the service operations.

Every subcommand builds a pydantic request, dispatches it (in process by
default, over HTTP with --server) and writes the response to files.  Exit
codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import json
import pathlib
import sys

import click
import pydantic

from .core import InvalidArgumentError, NumericalError
from . import io as formats
from .service import ops, schemas


class UsageFailure(Exception):
    exit_code = 1


class NumericalFailure(Exception):
    exit_code = 2


_HANDLERS = {
    "/simulate": (ops.do_simulate, schemas.SimulateResponse),
    "/windows": (ops.do_windows, schemas.WindowsResponse),
    "/fit": (ops.do_fit, schemas.FitResponse),
    "/histogram": (ops.do_histogram, schemas.HistogramResponse),
    "/experiment": (ops.do_experiment, schemas.ExperimentResponse),
}


def _call(server, path, request):
    """Dispatch a request model; returns the response model."""
    handler, response_cls = _HANDLERS[path]
    if server is None:
        try:
            return handler(request)
        except InvalidArgumentError as exc:
            raise UsageFailure(str(exc)) from exc
        except NumericalError as exc:
            raise NumericalFailure(str(exc)) from exc
    import httpx

    resp = httpx.post(server.rstrip("/") + path, content=request.model_dump_json(),
                      headers={"content-type": "application/json"}, timeout=None)
    if resp.status_code == 200:
        return response_cls.model_validate_json(resp.text)
    try:
        body = resp.json()
    except ValueError:
        body = {"message": resp.text}
    message = body.get("message", str(body))
    if body.get("kind") == "numerical":
        raise NumericalFailure(message)
    raise UsageFailure(message)


def _read_params(path):
    try:
        return formats.params_from_json(pathlib.Path(path).read_text())
    except (OSError, json.JSONDecodeError, InvalidArgumentError) as exc:
        raise UsageFailure(f"cannot read params file {path}: {exc}") from exc


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running hawkes-gaps service; default runs in process.")
@click.pass_context
def cli(ctx, server):
    """Simulate, window, restrict and fit gap-ridden self-exciting event data."""
    ctx.obj = server


@cli.command()
@click.option("--params", "params_path", required=True, type=click.Path(exists=True),
              help="JSON file with fields u, a, b.")
@click.option("--horizon", required=True, type=float, help="Horizon T (time units).")
@click.option("--seed", default=0, type=int, show_default=True, help="Master seed.")
@click.option("--out", required=True, type=click.Path(), help="Output events CSV.")
@click.pass_obj
def simulate(server, params_path, horizon, seed, out):
    """Draw one event set on (0, T] and write it as CSV."""
    params = _read_params(params_path)
    req = schemas.SimulateRequest(params=ops.params_to_model(params),
                                  horizon=horizon, seed=seed)
    resp = _call(server, "/simulate", req)
    events = ops.events_from_model(resp.events)
    head = formats.provenance_line(seed, req.model_dump(mode="json"))
    pathlib.Path(out).write_text(formats.events_to_csv(events, head))
    total = sum(len(t) for t in resp.events.times)
    click.echo(f"wrote {total} events for {len(resp.events.times)} entities to {out} "
               f"(spectral radius {resp.spectral_radius:.4g})")


@cli.command()
@click.option("--p", required=True, type=float, help="Nominal observation fraction in (0,1).")
@click.option("--tau1", required=True, type=float, help="Minimum window length (time units).")
@click.option("--tau2", required=True, type=float, help="Maximum window length (time units).")
@click.option("--horizon", required=True, type=float, help="Horizon T (time units).")
@click.option("--entities", default=1, type=int, show_default=True, help="Entity count N.")
@click.option("--per-entity", is_flag=True, help="Independent window draws per entity.")
@click.option("--seed", default=0, type=int, show_default=True, help="Master seed.")
@click.option("--out", required=True, type=click.Path(), help="Output windows CSV.")
@click.pass_obj
def windows(server, p, tau1, tau2, horizon, entities, per_entity, seed, out):
    """Draw observation windows and write them as CSV."""
    req = schemas.WindowsRequest(p=p, tau1=tau1, tau2=tau2, horizon=horizon,
                                 entities=entities, per_entity=per_entity, seed=seed)
    resp = _call(server, "/windows", req)
    ws = ops.windows_from_model(resp.windows)
    head = formats.provenance_line(seed, req.model_dump(mode="json"))
    pathlib.Path(out).write_text(formats.windows_to_csv(ws, head))
    fractions = ", ".join(f"{f:.4f}" for f in resp.observed_fraction)
    click.echo(f"wrote windows to {out} (observed fraction per entity: {fractions})")


@cli.command()
@click.option("--events", "events_path", required=True, type=click.Path(exists=True),
              help="Events CSV (entity,time).")
@click.option("--windows", "windows_path", default=None, type=click.Path(exists=True),
              help="Windows CSV (entity,c,d); required for gap-aware methods.")
@click.option("--method", type=click.Choice(["mhp", "mhpg-fixed", "mhpg-box"]),
              default="mhpg-box", show_default=True)
@click.option("--box-scale", "-C", default=20.0, type=float, show_default=True,
              help="Boundary cap C: u <= boundary <= C u (dimensionless).")
@click.option("--mu", default=None, type=float,
              help="LASSO weight; default 0.001 * events / N^2 (dimensionless).")
@click.option("--tol", default=1e-6, type=float, show_default=True,
              help="Relative parameter-change stopping threshold.")
@click.option("--max-iter", default=500, type=int, show_default=True)
@click.option("--horizon", default=None, type=float,
              help="Horizon T (time units); default from windows file or last event.")
@click.option("--out", required=True, type=click.Path(), help="Output result JSON.")
@click.pass_obj
def fit(server, events_path, windows_path, method, box_scale, mu, tol, max_iter,
        horizon, out):
    """Estimate parameters from (possibly gap-ridden) events; write JSON."""
    windows_model = None
    n_entities = None
    try:
        events_text = pathlib.Path(events_path).read_text()
        windows_text = (pathlib.Path(windows_path).read_text()
                        if windows_path is not None else None)
        if horizon is None:
            # unify: the last window may end short of T (dropped dangling
            # window), so take the later of last window end and last event
            horizon = formats.events_from_csv(events_text).horizon
            if windows_text is not None:
                horizon = max(horizon, formats.windows_from_csv(windows_text).horizon)
        if windows_text is not None:
            ws = formats.windows_from_csv(windows_text, horizon=horizon)
            windows_model = ops.windows_to_model(ws)
            n_entities = ws.n_entities
        events = formats.events_from_csv(events_text, horizon=horizon,
                                         n_entities=n_entities)
    except InvalidArgumentError as exc:
        raise UsageFailure(f"cannot read input files: {exc}") from exc
    req = schemas.FitRequest(events=ops.events_to_model(events), windows=windows_model,
                             method=method, box_scale=box_scale, mu=mu, tol=tol,
                             max_iter=max_iter)
    resp = _call(server, "/fit", req)
    params = ops.params_from_model(resp.params)
    from .core import BoundaryIntensities

    bounds = BoundaryIntensities(values=tuple(resp.lambda_bar))
    extra = {
        "method": method,
        "events_in": resp.events_in,
        "events_kept": resp.events_kept,
        "events_dropped": resp.events_dropped,
        "n_objective_increases": resp.n_objective_increases,
        "n_decay_stalls": resp.n_decay_stalls,
        "n_intensity_floor_hits": resp.n_intensity_floor_hits,
    }
    pathlib.Path(out).write_text(formats.result_to_json(
        params, bounds, resp.objective_trace, resp.iterations, resp.converged, extra))
    for m, (total, dropped) in enumerate(zip(resp.events_in, resp.events_dropped)):
        click.echo(f"entity {m}: {total} events in, {dropped} dropped by restriction")
    click.echo(f"{'converged' if resp.converged else 'stopped'} after "
               f"{resp.iterations} iterations; wrote {out}")


@cli.command()
@click.option("--params", "params_path", required=True, type=click.Path(exists=True),
              help="JSON file with fields u, a, b.")
@click.option("--interval", required=True, type=float,
              help="Count interval (0, T'] (time units).")
@click.option("--reps", default=500, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True, help="Master seed.")
@click.option("--out", required=True, type=click.Path(), help="Output counts CSV.")
@click.pass_obj
def histogram(server, params_path, interval, reps, seed, out):
    """Replicated event counts per entity over (0, interval]."""
    params = _read_params(params_path)
    req = schemas.HistogramRequest(params=ops.params_to_model(params),
                                   interval=interval, reps=reps, seed=seed)
    resp = _call(server, "/histogram", req)
    head = formats.provenance_line(seed, req.model_dump(mode="json"))
    lines = [head, "entity,rep,count"]
    for m, row in enumerate(resp.counts):
        for r, count in enumerate(row):
            lines.append(f"{m},{r},{count}")
    pathlib.Path(out).write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {reps} replicated counts per entity to {out}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="Experiment configuration JSON.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--jobs", default=None, type=int,
              help="Parallel replications; default env HAWKES_GAPS_JOBS or 1.")
@click.option("--seed", default=None, type=int, help="Override the config's master seed.")
@click.pass_obj
def experiment(server, config_path, out_dir, jobs, seed):
    """Run the replicated simulate/gap/fit harness; write summary CSVs."""
    try:
        config = json.loads(pathlib.Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageFailure(f"cannot read config file {config_path}: {exc}") from exc
    if seed is not None:
        config["master_seed"] = seed
    req = schemas.ExperimentRequest(config=config, jobs=jobs)
    resp = _call(server, "/experiment", req)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in resp.files.items():
        (out / name).write_text(text)
    click.echo(f"wrote {len(resp.files)} files to {out_dir} "
               f"({resp.n_failures}/{resp.n_fits} fits failed)")
    if resp.failed:
        raise NumericalFailure(
            f"{resp.n_failures} of {resp.n_fits} fits failed (more than 10%)"
        )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    from .service import run_server

    run_server(host=host, port=port)


def main():
    try:
        cli(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except pydantic.ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (UsageFailure, NumericalFailure) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    main()
