"""Cycle and flow accuracy over forecast windows.

Predicted and ground-truth slots are aligned by ordinal position and only
observed ground-truth slots count. Every metric is pooled over all observed
slots of all pairs and is None when there are none.
"""
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

logger = logging.getLogger(__name__)

METRIC_NAMES = ["C-MAE", "C-RMSE", "C-MAPE", "F-MAE", "F-RMSE", "F-AAE"]


@dataclass(frozen=True)
class EvalPair:
    """One sensor in one window: its prediction and its ground-truth target slots."""

    sensor_id: str
    anchor_t: int
    horizon: int
    predicted: object
    truth: tuple

    @property
    def horizon_end(self):
        return self.anchor_t + self.horizon

    @property
    def observed(self):
        return sum(slot.mask for slot in self.truth)

    def aligned(self):
        """(predicted index, truth slot) for observed slots that have a prediction."""
        count = min(len(self.predicted), len(self.truth))
        return [(k, self.truth[k]) for k in range(count) if self.truth[k].mask]


def _collect(pairs, extract):
    rows = [extract(pair, k, slot) for pair in pairs for k, slot in pair.aligned()]
    if not rows:
        return np.empty((0, 0))
    return np.asarray(rows, dtype=float)


def c_metrics(pairs):
    """(C-MAE, C-RMSE, C-MAPE %) over begin timestamps and cycle lengths."""

    def extract(pair, k, slot):
        pred = pair.predicted
        return (pred.begin[k] - slot.begin, pred.length[k] - slot.length, slot.elapsed, slot.length)

    rows = _collect(pairs, extract)
    if len(rows) == 0:
        return None, None, None
    begin_err, length_err, elapsed, length = rows.T
    errors = np.concatenate([begin_err, length_err])
    mae = float(np.abs(errors).mean())
    rmse = float(np.sqrt((errors**2).mean()))
    mape = float(np.concatenate([np.abs(begin_err) / elapsed, np.abs(length_err) / length]).mean() * 100.0)
    return mae, rmse, mape


def f_metrics(pairs):
    """(F-MAE, F-RMSE) with the predicted unit flow applied to the true cycle length."""

    def extract(pair, k, slot):
        return (pair.predicted.unit_flow[k] * slot.length - slot.flow,)

    rows = _collect(pairs, extract)
    if len(rows) == 0:
        return None, None
    errors = rows[:, 0]
    return float(np.abs(errors).mean()), float(np.sqrt((errors**2).mean()))


def density_grid(begins, lengths, densities, lo, hi):
    """Per-second density on [lo, hi) from half-open spans [begin, begin + length); 0 where uncovered."""
    seconds = np.arange(lo, hi, dtype=float)
    out = np.zeros(len(seconds))
    if len(begins) == 0:
        return out
    begins = np.asarray(begins, dtype=float)
    ends = begins + np.asarray(lengths, dtype=float)
    k = np.searchsorted(begins, seconds, side="right") - 1
    safe = np.clip(k, 0, None)
    covered = (k >= 0) & (seconds < ends[safe])
    out[covered] = np.asarray(densities, dtype=float)[safe[covered]]
    return out


def pair_density_error(pair):
    """(Σ |ρ̂ - ρ| over observed seconds, number of observed seconds) for one pair."""
    lo, hi = pair.anchor_t + 1, pair.horizon_end + 1
    truth = [s for s in pair.truth if s.length]
    rho = density_grid(
        [s.begin for s in truth], [s.length for s in truth], [s.flow / s.length for s in truth], lo, hi
    )
    eta = density_grid([s.begin for s in truth], [s.length for s in truth], [s.mask for s in truth], lo, hi)
    pred = pair.predicted
    rho_hat = density_grid(pred.begin, pred.length, pred.unit_flow, lo, hi)
    mask = eta > 0
    return float(np.abs(rho_hat - rho)[mask].sum()), int(mask.sum())


def f_aae(pairs):
    """Accumulated per-second density error, normalized by the observed minutes."""
    total, seconds = 0.0, 0
    for pair in pairs:
        error, count = pair_density_error(pair)
        total += error
        seconds += count
    if seconds == 0:
        return None
    return total / (seconds / 60.0)


@dataclass
class MetricReport:
    model: str
    c_mae: float | None
    c_rmse: float | None
    c_mape: float | None
    f_mae: float | None
    f_rmse: float | None
    f_aae: float | None
    windows: int = 0
    slots: int = 0
    latency_ms: float | None = None

    def as_row(self):
        row = asdict(self)
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}

    def values(self):
        return dict(zip(METRIC_NAMES, (self.c_mae, self.c_rmse, self.c_mape, self.f_mae, self.f_rmse, self.f_aae)))


def compute_report(model, pairs, windows=0, latency_ms=None):
    c_mae, c_rmse, c_mape = c_metrics(pairs)
    f_mae, f_rmse = f_metrics(pairs)
    slots = sum(len(pair.aligned()) for pair in pairs)
    if slots == 0:
        logger.warning("%s: no observed target slots; metrics are absent", model)
    return MetricReport(model, c_mae, c_rmse, c_mape, f_mae, f_rmse, f_aae(pairs), windows, slots, latency_ms)
