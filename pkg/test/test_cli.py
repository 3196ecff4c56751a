import json
import math

import pandas as pd
import pytest
from click.testing import CliRunner

from signalcast import create_cli

RUN_CONFIG = {
    "days": 1,
    "scenario": {"grid_rows": 1, "grid_cols": 1, "lanes_per_intersection": 2, "seed": 5},
    "model": {"hidden_dim": 8, "time_dim": 4, "mlp_layers": 2, "step_size": 3},
    "training": {"max_epochs": 1, "history_len": 1800, "horizon": 1800, "stride": 3600},
    "evaluation": {
        "stride": 3600,
        "latency_step_sizes": [1, 3],
        "latency_hours": [0.5],
        "latency_repeats": 1,
        "latency_batch": 2,
    },
}


def invoke(*args):
    result = CliRunner().invoke(create_cli(), list(map(str, args)))
    return result


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "run.json"
    config.write_text(json.dumps(RUN_CONFIG))
    result = invoke("generate", "--config", config, "--out", root / "data")
    assert result.exit_code == 0, result.output
    return root, config


@pytest.fixture(scope="module")
def trained(workspace):
    root, config = workspace
    result = invoke("train", "--config", config, "--data", root / "data", "--out", root / "run")
    assert result.exit_code == 0, result.output
    return root / "run"


def test_generate_is_reproducible(workspace, tmp_path):
    root, config = workspace
    for name in ("cycles.csv", "nodes.csv", "reach.csv", "scenario.json"):
        assert (root / "data" / name).exists()
    assert invoke("generate", "--config", config, "--out", tmp_path / "again").exit_code == 0
    assert (tmp_path / "again" / "cycles.csv").read_bytes() == (root / "data" / "cycles.csv").read_bytes()
    assert invoke("generate", "--config", config, "--out", tmp_path / "other", "--seed", 6).exit_code == 0
    assert (tmp_path / "other" / "cycles.csv").read_bytes() != (root / "data" / "cycles.csv").read_bytes()


def test_invalid_config_exits_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"model": {"hidden_dim": 0}}))
    result = invoke("generate", "--config", bad, "--out", tmp_path / "data")
    assert result.exit_code == 1
    assert "Error: invalid config" in result.output
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"modle": {}}))
    assert invoke("train", "--config", unknown).exit_code == 1


@pytest.mark.parametrize(
    "args",
    [
        ("train", "--step-size", "abc"),
        ("latency", "--step-sizes", "1,x"),
        ("train", "--no-such-flag"),
        ("forecast",),
        ("--no-such-flag", "train"),
    ],
)
def test_usage_errors_exit_1(args):
    result = invoke(*args)
    assert result.exit_code == 1, result.output
    assert "Error" in result.output


def test_missing_data_exits_2(workspace, tmp_path):
    _, config = workspace
    result = invoke("train", "--config", config, "--data", tmp_path / "nowhere", "--out", tmp_path / "run")
    assert result.exit_code == 2
    assert "dataset directory not found" in result.output


def test_train_writes_checkpoint_and_history(trained):
    for name in ("model.pt", "stats.json", "history.csv"):
        assert (trained / name).exists()
    history = pd.read_csv(trained / "history.csv")
    assert list(history["epoch"]) == [1]


def test_evaluate_scores_model_and_baselines(workspace, trained):
    root, _ = workspace
    result = invoke("evaluate", "--checkpoint", trained / "model.pt", "--data", root / "data", "--out", trained)
    assert result.exit_code == 0, result.output
    metrics = pd.read_csv(trained / "metrics.csv")
    assert list(metrics["model"]) == ["LAST", "HA", "aseer-xi3"]
    forecast = pd.read_csv(trained / "forecast_aseer-xi3.csv")
    assert list(forecast.columns) == ["anchor_t", "sensor_id", "slot_index", "begin", "length", "flow", "elapsed"]
    assert (forecast["length"] >= 1).all()


def test_evaluate_needs_something_to_score(workspace, tmp_path):
    root, config = workspace
    result = invoke("evaluate", "--config", config, "--data", root / "data", "--out", tmp_path, "--no-baselines")
    assert result.exit_code == 1
    assert "nothing to evaluate" in result.output


def test_latency_and_report(workspace, trained):
    root, _ = workspace
    result = invoke("latency", "--checkpoint", trained / "model.pt", "--data", root / "data", "--out", trained)
    assert result.exit_code == 0, result.output
    latency = pd.read_csv(trained / "latency.csv")
    assert list(latency["xi"]) == [1, 3]
    assert latency["invocations"].iloc[1] == math.ceil(latency["invocations"].iloc[0] / 3)
    assert (latency["slots"] == latency["invocations"].iloc[0]).all()

    result = invoke("report", "--run-dir", trained)
    assert result.exit_code == 0, result.output
    for name in ("metrics.png", "latency.png", "history.png"):
        assert (trained / name).exists()


def test_report_without_inputs_exits_2(tmp_path):
    assert invoke("report", "--run-dir", tmp_path).exit_code == 2


def test_version():
    result = invoke("--version")
    assert result.exit_code == 0
    assert "signalcast" in result.output
