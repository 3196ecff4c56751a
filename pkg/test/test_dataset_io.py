import pytest

from conftest import cycles
from signalcast.errors import DataError
from signalcast.models import (
    TrafficDataset,
    compute_stats,
    load_dataset,
    load_stats,
    save_dataset,
    save_stats,
    split_by_time,
)


def round_trip(dataset, tmp_path):
    first = save_dataset(dataset, tmp_path / "first")
    loaded = load_dataset(first)
    second = save_dataset(loaded, tmp_path / "second")
    for name in ("cycles.csv", "nodes.csv", "reach.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    return loaded


def test_empty_dataset_round_trip(tmp_path):
    loaded = round_trip(TrafficDataset({}, [], set()), tmp_path)
    assert loaded.series == {}


def test_one_sensor_round_trip(tmp_path):
    dataset = TrafficDataset({"s1": cycles("s1", 0, [60, 61, 59], flow=7.25)}, [("s1", 30.0, 120.0)], set())
    loaded = round_trip(dataset, tmp_path)
    assert loaded.series == dataset.series


def test_missing_flags_round_trip(line_dataset, tmp_path):
    loaded = round_trip(line_dataset, tmp_path)
    assert loaded.series == line_dataset.series
    assert loaded.reach == line_dataset.reach
    assert loaded.missing_fraction() == pytest.approx(line_dataset.missing_fraction())


def test_missing_directory_and_unknown_sensor(tmp_path):
    with pytest.raises(DataError):
        load_dataset(tmp_path / "nope")
    dataset = TrafficDataset({"s1": cycles("s1", 0, [60])}, [("s1", 30.0, 120.0)], set())
    out = save_dataset(dataset, tmp_path / "d")
    (out / "nodes.csv").write_text("sensor_id,lat,lon\n")
    with pytest.raises(DataError, match="s1"):
        load_dataset(out)


def test_missing_column(tmp_path, line_dataset):
    out = save_dataset(line_dataset, tmp_path / "d")
    (out / "reach.csv").write_text("from,to\n")
    with pytest.raises(DataError, match="lacks columns"):
        load_dataset(out)


def test_split_by_time_is_chronological(line_dataset):
    train, val, test = split_by_time(line_dataset, 0.6, 0.2)
    train_last = max(m.begin for s in train.series.values() for m in s)
    val_first = min(m.begin for s in val.series.values() for m in s)
    test_first = min(m.begin for s in test.series.values() for m in s)
    assert train_last < val_first < test_first
    total = sum(len(s) for s in line_dataset.series.values())
    assert sum(len(s) for part in (train, val, test) for s in part.series.values()) == total


def test_stats_use_observed_cycles_only(tmp_path):
    series = cycles("s1", 0, [60, 60, 120], flow=10.0, missing={2})
    stats = compute_stats(TrafficDataset({"s1": series}, [("s1", 30.0, 120.0)], set()))
    assert stats.p_mean == 60.0
    assert stats.p_std == 1.0
    path = save_stats(stats, tmp_path / "stats.json")
    assert load_stats(path) == stats


def test_bad_stats_file(tmp_path):
    path = tmp_path / "stats.json"
    path.write_text('{"p_mean": 1}')
    with pytest.raises(DataError):
        load_stats(path)
