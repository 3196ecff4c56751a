"""Run predictors over forecast windows and score them."""
import logging
import time

import torch

from .baselines import ha_predict, last_predict
from .metrics import EvalPair, compute_report
from .networks.batching import build_batch
from .networks.forecaster import predicted_slots

logger = logging.getLogger(__name__)


def baseline_predictors():
    return {
        "LAST": lambda instance: last_predict(instance, standardize=True),
        "HA": lambda instance: ha_predict(instance, standardize=True),
    }


def model_predictor(model, graph, stats, device="cpu"):
    """Wrap a learnable forecaster as instance -> {sensor_id: PredictedSlots}.

    Rollouts cover the horizon and emit at least as many slots as the
    sensor has ground-truth targets; outputs are clamped.
    """
    dtype = next(model.parameters()).dtype

    @torch.no_grad()
    def predict(instance):
        batch = build_batch(instance, graph, stats, model.sensor_ids, dtype=dtype)
        if len(batch) == 0:
            return {}
        batch = batch.to(device=device)
        model.eval()
        rollout = model(batch, needed=batch.target_len, clamp=True)
        return predicted_slots(batch, rollout)

    return predict


def collect_pairs(predict, instances):
    """Returns (pairs, forecasts, mean milliseconds per window)."""
    pairs, forecasts, elapsed = [], [], 0.0
    for instance in instances:
        started = time.perf_counter()
        per_sensor = predict(instance)
        elapsed += time.perf_counter() - started
        forecasts.append((instance.anchor_t, per_sensor))
        for sid, slots in per_sensor.items():
            window = instance.windows[sid]
            pairs.append(EvalPair(sid, instance.anchor_t, instance.horizon, slots, window.targets))
    ms = 1000.0 * elapsed / len(instances) if instances else None
    return pairs, forecasts, ms


def evaluate_predictors(predictors, instances):
    """Score every named predictor on the same windows; returns ({name: MetricReport}, {name: forecasts})."""
    reports, forecasts = {}, {}
    for name, predict in predictors.items():
        pairs, forecasts[name], ms = collect_pairs(predict, instances)
        reports[name] = compute_report(name, pairs, windows=len(instances), latency_ms=ms)
        logger.info("%s: %d pairs over %d windows", name, len(pairs), len(instances))
    return reports, forecasts
