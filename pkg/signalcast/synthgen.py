"""Synthetic adaptive-signal road network.

Intersections sit on a grid; every intersection has up to four entrance
lanes, one per approach direction, each watched by a sensor. Each lane runs
its own adaptive controller: the next cycle length follows an exponentially
weighted average of the unit flow it has been serving. Flow follows a
diurnal demand profile plus spillover from the lane feeding it upstream.
"""
import heapq
import json
import logging
from bisect import bisect_left
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .errors import ConfigError
from .models.dataset import TrafficDataset, save_dataset
from .models.measurement import Measurement, SensorSeries
from .utils.geo import offset_km

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
EWMA_HALF_LIFE = 3  # cycles
BAND = 0.05
MAX_ATTEMPTS = 100

# (row step, col step) towards the intersection traffic arrives from, per approach
APPROACHES = {0: (-1, 0), 1: (0, 1), 2: (1, 0), 3: (0, -1)}
LANE_OFFSET_KM = 0.03


@dataclass(frozen=True)
class LaneSpec:
    sensor_id: str
    lat: float
    lon: float
    upstream: int | None


def check_scenario(config):
    if not 1 <= config.p_min <= config.base_cycle <= config.p_max:
        raise ConfigError(
            f"infeasible cycle bounds: need 1 <= p_min <= base_cycle <= p_max, got "
            f"{config.p_min} / {config.base_cycle} / {config.p_max}"
        )
    if not 0 <= config.missing_ratio < 1:
        raise ConfigError(f"missing_ratio must be in [0, 1), got {config.missing_ratio}")
    if not 1 <= config.lanes_per_intersection <= len(APPROACHES):
        raise ConfigError(f"lanes_per_intersection must be in 1..4, got {config.lanes_per_intersection}")
    if config.grid_rows < 1 or config.grid_cols < 1:
        raise ConfigError("grid must have at least one intersection")
    if not config.diurnal_profile or min(config.diurnal_profile) < 0:
        raise ConfigError("diurnal_profile must be a non-empty list of non-negative rates")


def lane_layout(config):
    index = {}
    for r in range(config.grid_rows):
        for c in range(config.grid_cols):
            for k in range(config.lanes_per_intersection):
                index[(r, c, k)] = len(index)

    lanes = []
    for (r, c, k), _ in sorted(index.items(), key=lambda item: item[1]):
        lat, lon = offset_km(
            config.origin_lat, config.origin_lon, -r * config.spacing_km, c * config.spacing_km
        )
        dr, dc = APPROACHES[k]
        lat, lon = offset_km(lat, lon, -dr * LANE_OFFSET_KM, dc * LANE_OFFSET_KM)
        upstream = index.get((r + dr, c + dc, k))
        lanes.append(LaneSpec(f"s{r:02d}{c:02d}-{k}", float(lat), float(lon), upstream))
    return lanes


def diurnal_rate(profile, t):
    """Demand in vehicles/second at absolute second `t`."""
    knots = np.linspace(0.0, 24.0, len(profile) + 1)
    values = np.append(profile, profile[0])
    hour = (t % SECONDS_PER_DAY) / 3600.0
    return float(np.interp(hour, knots, values))


def simulate(config, days):
    """Run every lane controller for `days` days and return complete, fully observed series."""
    if days < 1:
        raise ConfigError(f"days must be >= 1, got {days}")
    check_scenario(config)

    lanes = lane_layout(config)
    n = len(lanes)
    duration = days * SECONDS_PER_DAY
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(n + 1)]
    lane_factor = streams[-1].uniform(0.6, 1.4, size=n)
    alpha = 1.0 - 0.5 ** (1.0 / EWMA_HALF_LIFE)
    profile = list(config.diurnal_profile)

    ewma = np.array([diurnal_rate(profile, 0) * lane_factor[i] for i in range(n)])
    ends = [[] for _ in range(n)]
    flows = [[] for _ in range(n)]
    cycles = [[] for _ in range(n)]

    # Lanes advance in begin order so upstream cycles finished before `begin` are known
    heap = [(0, i) for i in range(n)]
    heapq.heapify(heap)
    while heap:
        begin, i = heapq.heappop(heap)
        rng = streams[i]

        length = config.base_cycle + config.controller_gain * ewma[i]
        if config.length_noise > 0:
            length += config.length_noise * rng.standard_normal()
        length = int(np.clip(round(length), config.p_min, config.p_max))

        flow = length * diurnal_rate(profile, begin) * lane_factor[i]
        up = lanes[i].upstream
        if up is not None and config.coupling > 0:
            last = bisect_left(ends[up], begin) - 1
            if last >= 0:
                flow += config.coupling * config.spillover * flows[up][last]
        if config.flow_noise > 0:
            flow *= 1.0 + config.flow_noise * rng.standard_normal()
        flow = max(float(flow), 0.0)

        ewma[i] = alpha * (flow / length) + (1.0 - alpha) * ewma[i]
        ends[i].append(begin + length - 1)
        flows[i].append(flow)
        cycles[i].append(Measurement(lanes[i].sensor_id, begin, length, flow))

        if begin + length < duration:
            heapq.heappush(heap, (begin + length, i))

    series = {lane.sensor_id: SensorSeries(lane.sensor_id, tuple(cycles[i])) for i, lane in enumerate(lanes)}
    sensors = [(lane.sensor_id, lane.lat, lane.lon) for lane in lanes]
    reach = {(lanes[lane.upstream].sensor_id, lane.sensor_id) for lane in lanes if lane.upstream is not None}
    logger.info("simulated %d lanes over %d day(s): %d cycles", n, days, sum(len(c) for c in cycles))
    return TrafficDataset(series, sensors, reach)


def _draw_missing(rng, t0, t1, midpoints, ratio, span):
    # Alternating renewal process: exponential observed gaps, exponential missing spans
    gap = span * (1.0 - ratio) / ratio
    starts, stops = [], []
    t = t0
    missing = rng.random() < ratio
    while t < t1:
        duration = rng.exponential(span if missing else gap)
        if missing:
            starts.append(t)
            stops.append(t + duration)
        t += duration
        missing = not missing
    if not starts:
        return np.ones(len(midpoints), dtype=bool)
    starts = np.asarray(starts)
    stops = np.asarray(stops)
    k = np.searchsorted(starts, midpoints, side="right") - 1
    inside = (k >= 0) & (midpoints < stops[np.clip(k, 0, None)])
    return ~inside


def inject_missing(series, missing_ratio, mean_span, seed):
    """Flag contiguous runs of cycles as unobserved so roughly `missing_ratio` of the time is missing."""
    if not 0 <= missing_ratio < 1:
        raise ValueError(f"missing_ratio must be in [0, 1), got {missing_ratio}")
    if missing_ratio == 0 or len(series) == 0:
        return series.with_flags([True] * len(series))

    begins = np.array([m.begin for m in series], dtype=float)
    lengths = np.array([m.length for m in series], dtype=float)
    midpoints = begins + (lengths - 1) / 2.0
    total = lengths.sum()
    t0, t1 = begins[0], begins[-1] + lengths[-1]

    rng = np.random.default_rng(seed)
    span = float(mean_span)
    best_flags, best_error = None, np.inf
    for _ in range(MAX_ATTEMPTS):
        flags = _draw_missing(rng, t0, t1, midpoints, missing_ratio, span)
        error = abs(lengths[~flags].sum() / total - missing_ratio)
        if error < best_error:
            best_flags, best_error = flags, error
        if error <= BAND:
            break
        span *= 0.8
    else:
        logger.warning(
            "sensor %s: missing fraction off target by %.3f after %d attempts; keeping best effort",
            series.sensor_id,
            best_error,
            MAX_ATTEMPTS,
        )
    return series.with_flags(best_flags)


def generate(config, days):
    """Simulate, then withhold observations lane by lane."""
    dataset = simulate(config, days)
    seeds = np.random.SeedSequence([config.seed, 1]).generate_state(len(dataset.series))
    series = {
        sid: inject_missing(s, config.missing_ratio, config.mean_missing_span, int(seed))
        for (sid, s), seed in zip(dataset.series.items(), seeds)
    }
    return TrafficDataset(series, dataset.sensors, dataset.reach)


def export(dataset, out_dir, config=None):
    out_dir = save_dataset(dataset, out_dir)
    if config is not None:
        (Path(out_dir) / "scenario.json").write_text(json.dumps(asdict(config), indent=2, sort_keys=True) + "\n")
    return out_dir


__all__ = ["ScenarioConfig", "check_scenario", "diurnal_rate", "export", "generate", "inject_missing", "simulate"]
