"""Forecast latency against the prediction step size.

Every forecast is standardized to emit the same number of slots for a given
horizon (horizon seconds over the mean training cycle length) so that step
sizes are compared on equal output.
"""
import logging
import math
import time
from dataclasses import replace

import pandas as pd
import torch
from scipy.stats import spearmanr

from .errors import ConfigError
from .networks import create_model

logger = logging.getLogger(__name__)

LATENCY_COLUMNS = ["xi", "hours", "ms", "invocations", "slots"]


def standard_slots(hours, stats):
    return max(math.ceil(hours * 3600.0 / max(stats.p_mean, 1.0)), 1)


def transplant(model, state):
    """Load every parameter whose name and shape match; the predictor head differs across step sizes."""
    own = model.state_dict()
    compatible = {k: v for k, v in state.items() if k in own and own[k].shape == v.shape}
    model.load_state_dict(compatible, strict=False)
    return len(compatible)


@torch.no_grad()
def time_forecast(model, batch, slots, repeats=1):
    """Mean milliseconds and predictor invocations for one standardized forecast of `batch`."""
    needed = torch.full_like(batch.lengths, slots)
    cover = torch.zeros_like(batch.cover)
    timings, invocations = [], 0
    for _ in range(repeats):
        started = time.perf_counter()
        rollout = model(batch, needed=needed, clamp=True, cover=cover)
        timings.append(time.perf_counter() - started)
        invocations = rollout.invocations
    return 1000.0 * sum(timings) / len(timings), invocations


def benchmark_latency(model_config, sensor_ids, stats, batches, step_sizes, hours, repeats=5, state=None):
    if model_config.kind != "aseer":
        raise ConfigError("the latency benchmark varies the step size and needs the aseer model")
    if not batches:
        raise ConfigError("no windows to benchmark on")

    rows = []
    dtype = batches[0].x.dtype
    for xi in step_sizes:
        model = create_model(replace(model_config, step_size=xi, no_sapn=False), sensor_ids, stats)
        model = model.to(dtype=dtype)
        if state is not None:
            transplant(model, state)
        model.eval()
        for h in hours:
            slots = standard_slots(h, stats)
            results = [time_forecast(model, batch, slots, repeats) for batch in batches]
            ms = sum(r[0] for r in results) / len(results)
            rows.append({"xi": xi, "hours": h, "ms": ms, "invocations": results[0][1], "slots": slots})
            logger.info("xi=%-3d hours=%-4g %8.2f ms  %d invocations", xi, h, ms, results[0][1])
    return pd.DataFrame(rows, columns=LATENCY_COLUMNS)


def rank_correlation(frame):
    """Spearman correlation between step size and latency, per horizon."""
    out = {}
    for hours, group in frame.groupby("hours"):
        if group["xi"].nunique() < 2:
            continue
        rho, _ = spearmanr(group["xi"], group["ms"])
        out[float(hours)] = float(rho)
    return out
