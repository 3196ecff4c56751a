import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from marshmallow import Schema, ValidationError, fields, post_load

from ..errors import DataError
from .graph import build_graph
from .measurement import Measurement, SensorSeries

logger = logging.getLogger(__name__)

CYCLES_FILE = "cycles.csv"
NODES_FILE = "nodes.csv"
REACH_FILE = "reach.csv"
STATS_FILE = "stats.json"

CYCLE_COLUMNS = ["sensor_id", "begin", "length", "flow", "observed"]
NODE_COLUMNS = ["sensor_id", "lat", "lon"]
REACH_COLUMNS = ["src", "dst"]


@dataclass
class TrafficDataset:
    """Complete ground-truth cycles per sensor plus the inputs needed to build the graph."""

    series: dict = field(default_factory=dict)
    sensors: list = field(default_factory=list)
    reach: set = field(default_factory=set)

    def __post_init__(self):
        self.series = dict(sorted(self.series.items()))
        self.sensors = sorted(self.sensors, key=lambda s: s[0])

    @property
    def sensor_ids(self):
        return [s[0] for s in self.sensors]

    @property
    def start(self):
        begins = [s.first_begin for s in self.series.values() if len(s)]
        return min(begins) if begins else None

    @property
    def end(self):
        ends = [s.last_end for s in self.series.values() if len(s)]
        return max(ends) if ends else None

    def graph(self, epsilon_km):
        return build_graph(self.sensors, self.reach, epsilon_km)

    def missing_fraction(self):
        total = sum(m.length for s in self.series.values() for m in s)
        missing = sum(m.length for s in self.series.values() for m in s if not m.observed)
        return missing / total if total else 0.0

    def __repr__(self):
        cycles = sum(len(s) for s in self.series.values())
        return f"<TrafficDataset sensors={len(self.sensors)} cycles={cycles}>"


def save_dataset(dataset, out_dir):
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"cannot create output directory {out_dir}: {e}") from e

    rows = [m.to_dict() for s in dataset.series.values() for m in s]
    cycles = pd.DataFrame(rows, columns=CYCLE_COLUMNS)
    nodes = pd.DataFrame([list(s) for s in dataset.sensors], columns=NODE_COLUMNS)
    reach = pd.DataFrame(sorted(dataset.reach), columns=REACH_COLUMNS)
    try:
        cycles.to_csv(out_dir / CYCLES_FILE, index=False)
        nodes.to_csv(out_dir / NODES_FILE, index=False)
        reach.to_csv(out_dir / REACH_FILE, index=False)
    except OSError as e:
        raise DataError(f"cannot write dataset to {out_dir}: {e}") from e
    logger.info("wrote %d cycles for %d sensors to %s", len(cycles), len(nodes), out_dir)
    return out_dir


def _read_csv(path, columns, dtypes):
    if not path.exists():
        raise DataError(f"missing dataset file: {path}")
    frame = pd.read_csv(path, dtype=dtypes)
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DataError(f"{path} lacks columns {missing}")
    return frame


def load_dataset(data_dir):
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"dataset directory not found: {data_dir}")

    cycles = _read_csv(
        data_dir / CYCLES_FILE,
        CYCLE_COLUMNS,
        {"sensor_id": str, "begin": np.int64, "length": np.int64, "flow": float, "observed": np.int64},
    )
    nodes = _read_csv(data_dir / NODES_FILE, NODE_COLUMNS, {"sensor_id": str, "lat": float, "lon": float})
    reach = _read_csv(data_dir / REACH_FILE, REACH_COLUMNS, {"src": str, "dst": str})

    series = {}
    for sensor_id, group in cycles.groupby("sensor_id", sort=True):
        group = group.sort_values("begin", kind="stable")
        series[sensor_id] = SensorSeries(
            sensor_id,
            tuple(
                Measurement(sensor_id, int(b), int(p), float(f), bool(o))
                for b, p, f, o in zip(group["begin"], group["length"], group["flow"], group["observed"])
            ),
        )
    sensors = [(sid, float(lat), float(lon)) for sid, lat, lon in zip(nodes["sensor_id"], nodes["lat"], nodes["lon"])]
    for sensor_id, _, _ in sensors:
        series.setdefault(sensor_id, SensorSeries(sensor_id, ()))
    unknown = set(series) - {s[0] for s in sensors}
    if unknown:
        raise DataError(f"cycles reference sensors missing from {NODES_FILE}: {sorted(unknown)}")
    return TrafficDataset(series, sensors, set(zip(reach["src"], reach["dst"])))


def _slice_series(series, lo, hi):
    return SensorSeries(series.sensor_id, tuple(m for m in series if lo <= m.begin < hi))


def split_by_time(dataset, train_fraction=0.6, val_fraction=0.2):
    """Chronological split; a cycle belongs to the part its begin falls in."""
    start, end = dataset.start, dataset.end
    if start is None:
        raise DataError("cannot split an empty dataset")
    duration = end - start + 1
    cut_train = start + int(duration * train_fraction)
    cut_val = start + int(duration * (train_fraction + val_fraction))
    bounds = [(start, cut_train), (cut_train, cut_val), (cut_val, end + 1)]
    return tuple(
        TrafficDataset(
            {sid: _slice_series(s, lo, hi) for sid, s in dataset.series.items()},
            dataset.sensors,
            dataset.reach,
        )
        for lo, hi in bounds
    )


@dataclass(frozen=True)
class NormalizationStats:
    p_mean: float = 0.0
    p_std: float = 1.0
    f_mean: float = 0.0
    f_std: float = 1.0
    u_mean: float = 0.0
    u_std: float = 1.0
    gap_mean: float = 0.0
    gap_std: float = 1.0

    def normalize(self, length, flow):
        return ((length - self.p_mean) / self.p_std, (flow - self.f_mean) / self.f_std)


class NormalizationStatsSchema(Schema):
    p_mean = fields.Float(required=True)
    p_std = fields.Float(required=True)
    f_mean = fields.Float(required=True)
    f_std = fields.Float(required=True)
    u_mean = fields.Float(required=True)
    u_std = fields.Float(required=True)
    gap_mean = fields.Float(load_default=0.0)
    gap_std = fields.Float(load_default=1.0)

    @post_load
    def make_stats(self, data, **kwargs):
        return NormalizationStats(**data)


def _moments(values):
    if len(values) == 0:
        return 0.0, 1.0
    values = np.asarray(values, dtype=float)
    std = float(values.std())
    return float(values.mean()), std if std > 1e-6 else 1.0


def compute_stats(dataset):
    """z-score statistics over observed cycles (use the training split)."""
    observed = [m for s in dataset.series.values() for m in s if m.observed]
    gaps = []
    for s in dataset.series.values():
        seen = s.observed
        gaps.extend(b.begin - a.end for a, b in zip(seen, seen[1:]))
    p_mean, p_std = _moments([m.length for m in observed])
    f_mean, f_std = _moments([m.flow for m in observed])
    u_mean, u_std = _moments([m.unit_flow for m in observed])
    gap_mean, gap_std = _moments(gaps)
    return NormalizationStats(p_mean, p_std, f_mean, f_std, u_mean, u_std, gap_mean, gap_std)


def save_stats(stats, path):
    path = Path(path)
    path.write_text(json.dumps(NormalizationStatsSchema().dump(stats), indent=2, sort_keys=True) + "\n")
    return path


def load_stats(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"normalization stats not found: {path}")
    try:
        return NormalizationStatsSchema().load(json.loads(path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise DataError(f"invalid normalization stats in {path}: {e}") from e
