from dataclasses import replace

import pandas as pd
import pytest

from signalcast.errors import ConfigError, DataError
from signalcast.evaluation import baseline_predictors, collect_pairs, evaluate_predictors, model_predictor
from signalcast.latency import benchmark_latency, rank_correlation, standard_slots, transplant
from signalcast.metrics import compute_report
from signalcast.models import make_windows
from signalcast.networks import create_model
from signalcast.reporting import (
    latency_table,
    metrics_frame,
    metrics_table,
    plot_history,
    plot_latency,
    plot_metrics,
    read_frame,
    write_frame,
)
from signalcast.training import prepare_batches


@pytest.fixture
def windows(line_dataset):
    return make_windows(line_dataset, 3600, 3600, 1800)


def test_baselines_are_scored_on_every_window(windows):
    reports, forecasts = evaluate_predictors(baseline_predictors(), windows)
    assert set(reports) == {"LAST", "HA"}
    for report in reports.values():
        assert report.windows == 3
        assert report.slots > 0
        assert all(value is not None and value >= 0 for value in report.values().values())
    assert [anchor for anchor, _ in forecasts["LAST"]] == [3599, 5399, 7199]


def test_model_forecasts_reach_the_target_count(windows, line_graph, unit_stats, tiny_model_config):
    model = create_model(tiny_model_config, line_graph.sensor_ids, unit_stats)
    predict = model_predictor(model, line_graph, unit_stats)
    pairs, forecasts, ms = collect_pairs(predict, windows[:1])
    assert {p.sensor_id for p in pairs} == {"a", "b", "c"}
    assert ms > 0
    for p in pairs:
        assert len(p.predicted) >= len(p.truth)
        assert (p.predicted.length >= 1).all()
    assert compute_report("aseer", pairs).slots == sum(p.observed for p in pairs)


def test_standard_slot_count(unit_stats):
    assert standard_slots(1, unit_stats) == 60
    assert standard_slots(0.5, unit_stats) == 30


def test_invocations_shrink_with_step_size(line_dataset, line_graph, windows, tiny_model_config, unit_stats):
    batches = prepare_batches(windows[:1], line_graph, unit_stats, line_graph.sensor_ids)
    frame = benchmark_latency(tiny_model_config, line_graph.sensor_ids, unit_stats, batches, [1, 4, 12], [1], repeats=1)
    assert frame["invocations"].tolist() == [60, 15, 5]
    assert frame["slots"].tolist() == [60, 60, 60]
    assert (frame["ms"] > 0).all()


def test_latency_needs_the_step_size_model(line_graph, tiny_model_config, unit_stats):
    with pytest.raises(ConfigError):
        benchmark_latency(replace(tiny_model_config, kind="recurrent"), line_graph.sensor_ids, unit_stats, [], [1], [1])


def test_transplant_keeps_everything_but_the_output_head(line_graph, tiny_model_config, unit_stats):
    source = create_model(replace(tiny_model_config, step_size=12), line_graph.sensor_ids, unit_stats)
    target = create_model(replace(tiny_model_config, step_size=4), line_graph.sensor_ids, unit_stats)
    loaded = transplant(target, source.state_dict())
    assert loaded == len(target.state_dict()) - 2
    assert (target.agdn.W_a.weight == source.agdn.W_a.weight).all()


def test_rank_correlation_per_horizon():
    frame = pd.DataFrame(
        {"xi": [1, 6, 12, 1, 6, 12], "hours": [1, 1, 1, 4, 4, 4], "ms": [9.0, 5.0, 2.0, 30.0, 8.0, 9.0]}
    )
    rho = rank_correlation(frame)
    assert rho[1.0] == pytest.approx(-1.0)
    assert rho[4.0] == pytest.approx(-0.5)


def test_reports_tables_and_plots(tmp_path, windows):
    reports, _ = evaluate_predictors(baseline_predictors(), windows)
    frame = metrics_frame(reports.values())
    path = write_frame(frame, tmp_path / "out" / "metrics.csv")
    assert list(read_frame(path)["model"]) == ["LAST", "HA"]
    assert metrics_table(frame).row_count == 2
    assert plot_metrics(frame, tmp_path / "metrics.png").stat().st_size > 0

    latency = pd.DataFrame({"xi": [1, 12], "hours": [1.0, 1.0], "ms": [4.0, 1.0], "invocations": [60, 5], "slots": [60, 60]})
    assert latency_table(latency, rank_correlation(latency)).caption == "1h rank corr -1.00"
    assert plot_latency(latency, tmp_path / "latency.png").exists()
    history = pd.DataFrame({"epoch": [1, 2], "train_total": [3.0, 2.0], "val_total": [3.5, 2.5]})
    assert plot_history(history, tmp_path / "history.png").exists()

    with pytest.raises(DataError):
        read_frame(tmp_path / "absent.csv")
