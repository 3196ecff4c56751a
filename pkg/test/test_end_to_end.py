"""Full pipeline runs on a synthetic city; minutes of CPU each, so marked slow."""
import json
import math

import pandas as pd
import pytest
from click.testing import CliRunner

from signalcast import create_cli

pytestmark = pytest.mark.slow

RUN_CONFIG = {
    "days": 3,
    "scenario": {"grid_rows": 1, "grid_cols": 5, "lanes_per_intersection": 2, "missing_ratio": 0.3},
    "model": {"hidden_dim": 32, "time_dim": 16},
    "training": {"max_epochs": 30, "patience": 5, "history_len": 3600, "horizon": 3600, "stride": 1800},
    "evaluation": {
        "stride": 1800,
        "latency_step_sizes": [1, 12],
        "latency_hours": [1],
        "latency_repeats": 5,
        "latency_batch": 20,
    },
}


def invoke(*args):
    result = CliRunner().invoke(create_cli(), list(map(str, args)))
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("e2e") / "run.json"
    path.write_text(json.dumps(RUN_CONFIG))
    return path


def generated(root, config_path, seed):
    data = root / f"data-{seed}"
    if not data.exists():
        invoke("generate", "--config", config_path, "--out", data, "--seed", seed)
    return data


def best_val(run_dir):
    return pd.read_csv(run_dir / "history.csv")["val_total"].min()


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_trained_model_beats_baselines(config_path, seed):
    root = config_path.parent
    data = generated(root, config_path, seed)
    run = root / f"run-{seed}"
    invoke("train", "--config", config_path, "--data", data, "--out", run, "--seed", seed)
    invoke("evaluate", "--checkpoint", run / "model.pt", "--data", data, "--out", run)

    metrics = pd.read_csv(run / "metrics.csv").set_index("model")
    for column in ("c_mae", "f_mae"):
        assert metrics.loc["aseer", column] < metrics.loc["LAST", column], metrics
        assert metrics.loc["aseer", column] < metrics.loc["HA", column], metrics


def test_ablations_change_the_validation_loss(config_path):
    root = config_path.parent
    data = generated(root, config_path, 0)
    losses = {}
    for flag in (None, "--no-agdn", "--no-pte"):
        run = root / f"ablation-{flag or 'full'}"
        args = ["train", "--config", config_path, "--data", data, "--out", run, "--max-epochs", 2]
        invoke(*args, *([flag] if flag else []))
        losses[flag] = best_val(run)
    assert losses["--no-agdn"] != losses[None]
    assert losses["--no-pte"] != losses[None]


def test_larger_steps_halve_latency(config_path):
    root = config_path.parent
    data = generated(root, config_path, 0)
    out = root / "latency"
    invoke("latency", "--config", config_path, "--data", data, "--out", out)

    frame = pd.read_csv(out / "latency.csv").set_index("xi")
    slots = int(frame.loc[1, "slots"])
    for xi in (1, 12):
        assert frame.loc[xi, "invocations"] == math.ceil(slots / xi)
    assert frame.loc[12, "ms"] <= 0.5 * frame.loc[1, "ms"], frame
