import pytest
import torch

from signalcast.baselines import RecurrentForecaster, ha_predict, last_predict
from signalcast.metrics import EvalPair, c_metrics, f_metrics
from signalcast.models import ForecastInstance, Measurement, SensorWindow, TargetSlot, make_windows
from signalcast.networks import build_batch, create_model


def instance_with(history, horizon, anchor=None, targets=()):
    anchor = history[-1].end if anchor is None and history else anchor
    windows = {"s": SensorWindow("s", tuple(history), tuple(targets)), "idle": SensorWindow("idle", (), ())}
    return ForecastInstance(anchor, 3600, horizon, windows)


@pytest.mark.parametrize("horizon,count", [(180, 3), (60, 1), (61, 2)])
def test_last_repeats_until_horizon_covered(horizon, count):
    instance = instance_with([Measurement("s", 0, 45, 3.0), Measurement("s", 45, 60, 12.0)], horizon)
    slots = last_predict(instance)["s"]
    assert len(slots) == count
    assert slots.begin.tolist() == [105 + 60 * k for k in range(count)]
    assert set(slots.length.tolist()) == {60.0}
    assert slots.flow.tolist() == pytest.approx([12.0] * count)


def test_sensor_without_history_is_skipped():
    instance = instance_with([Measurement("s", 0, 60, 12.0)], 60)
    assert set(last_predict(instance)) == {"s"}
    assert set(ha_predict(instance)) == {"s"}


def test_historical_average():
    history = [Measurement("s", 0, 50, 10.0), Measurement("s", 50, 70, 20.0)]
    slots = ha_predict(instance_with(history, 120))["s"]
    assert slots.length[0] == 60.0
    assert slots.flow[0] == pytest.approx(15.0)
    assert slots.begin[0] == 120


def test_average_of_one_measurement_is_last():
    instance = instance_with([Measurement("s", 0, 75, 9.0)], 600)
    last, average = last_predict(instance)["s"], ha_predict(instance)["s"]
    assert last.begin.tolist() == average.begin.tolist()
    assert last.length.tolist() == average.length.tolist()
    assert last.unit_flow.tolist() == pytest.approx(average.unit_flow.tolist())


def test_standardized_length_reaches_target_count():
    targets = tuple(TargetSlot(60 + 10 * k, 10, 1.0, 1, 1 + 10 * k) for k in range(7))
    instance = instance_with([Measurement("s", 0, 60, 12.0)], 60, targets=targets)
    assert len(last_predict(instance)["s"]) == 1
    assert len(last_predict(instance, standardize=True)["s"]) == 7
    assert len(ha_predict(instance, standardize=True)["s"]) == 7


@pytest.mark.parametrize("sensor", ["a", "c"])
def test_constant_cycles_are_predicted_exactly(line_dataset, sensor):
    # c's cycles run across the anchor; a's end on it
    instance = make_windows(line_dataset, 3600, 3600, 1800)[0]
    slots = last_predict(instance)[sensor]
    truth = instance.windows[sensor].targets
    assert len(slots) == len(truth)
    assert slots.begin.tolist() == [t.begin for t in truth]
    assert slots.length.tolist() == [t.length for t in truth]
    pair = EvalPair(sensor, instance.anchor_t, instance.horizon, slots, truth)
    assert c_metrics([pair])[0] == 0.0
    assert f_metrics([pair])[0] == pytest.approx(0.0)


def test_recurrent_model_decodes_one_cycle_per_step(line_dataset, line_graph, unit_stats, tiny_model_config):
    model = create_model(tiny_model_config, line_graph.sensor_ids, unit_stats, kind="recurrent")
    assert isinstance(model, RecurrentForecaster)
    assert model.step_size == 1
    instance = make_windows(line_dataset, 3600, 3600, 1800)[0]
    batch = build_batch(instance, line_graph, unit_stats, model.sensor_ids)
    with torch.no_grad():
        out = model(batch, needed=batch.target_len, clamp=True)
    assert out.length.shape == (len(batch), out.invocations)
    assert out.invocations >= int(batch.target_len.max())
    assert (out.length >= 1).all()
    begins = out.elapsed[0]
    assert torch.allclose(begins[1:], begins[:-1] + out.length[0, :-1])
