from .dataset import (
    NormalizationStats,
    TrafficDataset,
    compute_stats,
    load_dataset,
    load_stats,
    save_dataset,
    save_stats,
    split_by_time,
)
from .forecast import PredictedSlots, repeat_slots, write_forecast_csv
from .graph import DiffusionGraph, EdgeFeature, Sensor, build_graph
from .instance import ForecastInstance, SensorWindow, TargetSlot, make_windows
from .measurement import Measurement, SensorSeries, validate_series

__all__ = [
    "DiffusionGraph",
    "EdgeFeature",
    "ForecastInstance",
    "Measurement",
    "NormalizationStats",
    "PredictedSlots",
    "Sensor",
    "SensorSeries",
    "SensorWindow",
    "TargetSlot",
    "TrafficDataset",
    "build_graph",
    "compute_stats",
    "load_dataset",
    "load_stats",
    "make_windows",
    "repeat_slots",
    "save_dataset",
    "save_stats",
    "split_by_time",
    "validate_series",
    "write_forecast_csv",
]
