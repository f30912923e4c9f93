import numpy as np
import pytest

from hawkes_gaps.core import InvalidArgumentError, ModelParams
from hawkes_gaps.experiment import ExperimentConfig, MethodSpec, run_experiment


def tiny_config(**overrides):
    base = dict(
        truth=ModelParams(u=[2.0, 2.0], a=[[0.3, 0.2], [0.0, 0.3]], b=[5.0, 5.0]),
        horizon=80.0, p=0.3, tau1=0.5, tau2=3.0,
        shared_windows=True, intersect=False,
        methods=(MethodSpec("mhp", max_iter=60), MethodSpec("mhpg-box", max_iter=60)),
        n_param_reps=3, n_hist_reps=4, hist_interval=10.0, master_seed=11,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_round_trip_config():
    config = tiny_config()
    back = ExperimentConfig.from_dict(config.to_dict())
    assert back.to_dict() == config.to_dict()


def test_deterministic_outputs():
    config = tiny_config()
    a = run_experiment(config, jobs=1)
    b = run_experiment(config, jobs=1)
    assert a.files == b.files
    assert a.n_failures == 0


def test_parallel_matches_serial():
    config = tiny_config()
    serial = run_experiment(config, jobs=1)
    parallel = run_experiment(config, jobs=2)
    assert serial.files == parallel.files


def test_dropped_event_accounting():
    result = run_experiment(tiny_config(), jobs=1)
    rows = [l for l in result.files["dropped_events.csv"].splitlines()
            if not l.startswith(("#", "rep,"))]
    assert rows
    for row in rows:
        _, _, simulated, kept, dropped = row.split(",")
        assert int(simulated) == int(kept) + int(dropped)
        assert int(dropped) >= 0


def test_provenance_lines():
    result = run_experiment(tiny_config(), jobs=1)
    for name, text in result.files.items():
        first = text.splitlines()[0]
        assert first.startswith("# seed=11 config_hash="), name


def test_medians_table_contents():
    result = run_experiment(tiny_config(), jobs=1)
    lines = [l for l in result.files["medians.csv"].splitlines()
             if not l.startswith(("#", "method,"))]
    methods = {l.split(",")[0] for l in lines}
    assert methods == {"mhp", "mhpg-box"}
    params = {l.split(",")[1] for l in lines}
    assert params == {"u_0", "u_1", "a_0_0", "a_0_1", "a_1_0", "a_1_1", "b_0", "b_1"}
    for line in lines:
        n_used = int(line.split(",")[4])
        assert n_used == 3


def test_counts_include_truth_and_methods():
    result = run_experiment(tiny_config(), jobs=1)
    sources = {l.split(",")[0] for l in result.files["counts.csv"].splitlines()
               if not l.startswith(("#", "source,"))}
    assert sources == {"truth", "mhp", "mhpg-box"}


def test_intersect_flag_reports_posterior():
    config = tiny_config(shared_windows=False, intersect=True)
    result = run_experiment(config, jobs=1)
    stages = {l.split(",")[1] for l in result.files["observed_fractions.csv"].splitlines()
              if not l.startswith(("#", "rep,"))}
    assert stages == {"prior", "posterior"}
    fractions = {}
    for line in result.files["observed_fractions.csv"].splitlines():
        if line.startswith(("#", "rep,")):
            continue
        rep, stage, entity, frac = line.split(",")
        fractions.setdefault(stage, []).append(float(frac))
    assert np.mean(fractions["posterior"]) < np.mean(fractions["prior"])


def test_shipped_configs_are_stationary():
    import json
    import pathlib

    config_dir = pathlib.Path(__file__).resolve().parents[1] / "configs"
    paths = sorted(config_dir.glob("example*.json"))
    assert len(paths) == 5
    for path in paths:
        config = ExperimentConfig.from_dict(json.loads(path.read_text()))
        assert config.truth.spectral_radius() < 1.0, path.name


def test_duplicate_methods_rejected():
    with pytest.raises(InvalidArgumentError):
        tiny_config(methods=(MethodSpec("mhp"), MethodSpec("mhp")))


def test_unknown_method_rejected():
    with pytest.raises(InvalidArgumentError):
        MethodSpec("gradient-descent")
