from dataclasses import dataclass

import numpy as np
import pandas as pd

FORECAST_COLUMNS = ["anchor_t", "sensor_id", "slot_index", "begin", "length", "flow", "elapsed"]


@dataclass
class PredictedSlots:
    """Forecast of one sensor for one window, slots in chronological order.

    `elapsed[k]` is the predicted time from the sensor's last observed
    second to the begin of slot k, so begin = last_end + elapsed.
    """

    sensor_id: str
    last_end: int
    elapsed: np.ndarray
    length: np.ndarray
    unit_flow: np.ndarray
    steps: int = 0
    truncated: bool = False

    def __post_init__(self):
        self.elapsed = np.asarray(self.elapsed, dtype=float)
        self.length = np.asarray(self.length, dtype=float)
        self.unit_flow = np.asarray(self.unit_flow, dtype=float)

    def __len__(self):
        return len(self.length)

    @property
    def begin(self):
        return self.last_end + self.elapsed

    @property
    def flow(self):
        return self.unit_flow * self.length


def repeat_slots(sensor_id, last_end, length, flow, cover, min_slots=0):
    """Chain copies of one (length, flow) cycle from last_end + 1 until `cover` is passed."""
    length = max(float(length), 1.0)
    count = max(int(np.ceil(cover / length)), 1, int(min_slots))
    elapsed = 1.0 + length * np.arange(count)
    return PredictedSlots(
        sensor_id,
        last_end,
        elapsed,
        np.full(count, length),
        np.full(count, float(flow) / length),
        steps=count,
    )


def forecast_frame(forecasts):
    """`forecasts` is a list of (anchor_t, {sensor_id: PredictedSlots})."""
    rows = []
    for anchor_t, per_sensor in forecasts:
        for sensor_id, slots in sorted(per_sensor.items()):
            for k, (b, p, f, d) in enumerate(zip(slots.begin, slots.length, slots.flow, slots.elapsed)):
                rows.append((anchor_t, sensor_id, k, b, p, f, d))
    return pd.DataFrame(rows, columns=FORECAST_COLUMNS)


def write_forecast_csv(forecasts, path):
    forecast_frame(forecasts).to_csv(path, index=False)
    return path
