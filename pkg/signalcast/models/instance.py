import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TargetSlot:
    """A ground-truth cycle to forecast. Values may be None when the slot is unknown."""

    begin: int | None
    length: int | None
    flow: float | None
    mask: int
    elapsed: int

    @property
    def end(self):
        return None if self.begin is None or self.length is None else self.begin + self.length - 1


@dataclass(frozen=True)
class SensorWindow:
    sensor_id: str
    history: tuple
    targets: tuple

    @property
    def available(self):
        return len(self.history) > 0

    @property
    def last_end(self):
        return self.history[-1].end if self.history else None

    @property
    def observed_targets(self):
        return sum(slot.mask for slot in self.targets)


@dataclass(frozen=True)
class ForecastInstance:
    anchor_t: int
    history_len: int
    horizon: int
    windows: dict

    @property
    def window_start(self):
        return self.anchor_t - self.history_len + 1

    @property
    def horizon_end(self):
        return self.anchor_t + self.horizon

    @property
    def available_sensors(self):
        return [sid for sid, w in self.windows.items() if w.available]

    def cover(self, sensor_id):
        """Elapsed time after the sensor's last observation that a forecast must pass."""
        return self.horizon_end - self.windows[sensor_id].last_end

    def __repr__(self):
        return (
            f"<ForecastInstance t={self.anchor_t} sensors={len(self.windows)} "
            f"available={len(self.available_sensors)}>"
        )


def _series_map(dataset):
    series = getattr(dataset, "series", dataset)
    if isinstance(series, dict):
        return series
    return {s.sensor_id: s for s in series}


def _target_slots(truth, last_reference):
    # Unobserved slots keep their ordinal position; the mask hides them from losses and metrics
    return tuple(
        TargetSlot(m.begin, m.length, m.flow, int(m.observed), m.begin - last_reference)
        for m in truth
    )


def make_windows(dataset, history_len, horizon, stride):
    """Cut the dataset into forecast instances.

    Anchors sit at start + history_len - 1 and then every `stride` seconds,
    as long as ground truth runs strictly past anchor + horizon. A sensor's
    targets run from the cycle after its last observed one up to the last
    cycle beginning by anchor + horizon. Cycles between that observation and
    the anchor were never observed, so they carry mask 0.
    """
    if history_len <= 0 or horizon <= 0 or stride <= 0:
        raise ValueError("history_len, horizon and stride must all be positive")

    series = {sid: series for sid, series in sorted(_series_map(dataset).items()) if len(series)}
    if not series:
        logger.warning("dataset is empty; no forecast windows")
        return []

    start = min(s.first_begin for s in series.values())
    data_end = max(s.last_end for s in series.values())

    indexed = {}
    for sid, s in series.items():
        begins = np.array([m.begin for m in s.measurements], dtype=np.int64)
        ends = np.array([m.end for m in s.measurements], dtype=np.int64)
        indexed[sid] = (s.measurements, begins, ends)

    instances = []
    anchor = start + history_len - 1
    while anchor + horizon < data_end:
        window_start = anchor - history_len + 1
        windows = {}
        for sid, (measurements, begins, ends) in indexed.items():
            lo = np.searchsorted(ends, window_start, side="left")
            hi = np.searchsorted(ends, anchor, side="right")
            history = tuple(m for m in measurements[lo:hi] if m.observed)

            # Targets are the cycles right after the last observation, so slot 0 starts at
            # last_end + 1 like the rollout does. Cycles the anchor cuts through are kept.
            reference = history[-1].end if history else anchor
            t_lo = np.searchsorted(begins, reference, side="right")
            t_hi = np.searchsorted(begins, anchor + horizon, side="right")
            targets = _target_slots(measurements[t_lo:t_hi], reference)
            windows[sid] = SensorWindow(sid, history, targets)
        instances.append(ForecastInstance(anchor, history_len, horizon, windows))
        anchor += stride

    if not instances:
        logger.warning(
            "dataset spans %d s, shorter than history_len + horizon = %d s; no forecast windows",
            data_end - start + 1,
            history_len + horizon,
        )
    return instances
