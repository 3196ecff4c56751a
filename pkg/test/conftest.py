import pytest
import torch

from signalcast.config import ModelConfig, ScenarioConfig
from signalcast.models import Measurement, NormalizationStats, SensorSeries, TrafficDataset, build_graph


def cycles(sensor_id, begin, lengths, flow=10.0, missing=()):
    """Consecutive cycles starting at `begin`; indices in `missing` are flagged unobserved."""
    out, t = [], begin
    for i, length in enumerate(lengths):
        out.append(Measurement(sensor_id, t, length, flow, i not in missing))
        t += length
    return SensorSeries(sensor_id, tuple(out))


@pytest.fixture
def line_dataset():
    """Three sensors 0.3 km apart on a line over three hours; the middle one has a failure."""
    series = {
        "a": cycles("a", 0, [60] * 180, flow=12.0),
        "b": cycles("b", 10, [50, 70] * 90, flow=8.0, missing=set(range(40, 60))),
        "c": cycles("c", 25, [90] * 120, flow=20.0),
    }
    sensors = [("a", 27.8300, 113.1300), ("b", 27.8327, 113.1300), ("c", 27.8354, 113.1300)]
    return TrafficDataset(series, sensors, {("a", "b"), ("b", "c")})


@pytest.fixture
def line_graph(line_dataset):
    return line_dataset.graph(1.0)


@pytest.fixture
def unit_stats():
    return NormalizationStats(p_mean=60.0, p_std=15.0, f_mean=12.0, f_std=5.0, u_mean=0.2, u_std=0.1)


@pytest.fixture
def tiny_model_config():
    return ModelConfig(hidden_dim=8, time_dim=4, mlp_layers=2, step_size=3)


@pytest.fixture
def tiny_scenario():
    return ScenarioConfig(grid_rows=1, grid_cols=2, lanes_per_intersection=2, seed=7)


@pytest.fixture
def pair_graph():
    return build_graph([("x", 0.0, 0.0), ("y", 0.0, 0.004)], {("x", "y")}, 1.0)


@pytest.fixture(autouse=True)
def _seed():
    torch.manual_seed(0)
