import logging
from pathlib import Path

import click

from ..config import Config, load_run_config
from ..errors import DataError
from ..latency import benchmark_latency, rank_correlation
from ..models.dataset import compute_stats, split_by_time
from ..models.instance import make_windows
from ..reporting import LATENCY_FILE, latency_table, print_table, write_frame
from ..training import dtype_for, load_checkpoint, prepare_batches
from . import load_split, parse_float_list, parse_int_list

logger = logging.getLogger(__name__)


@click.command("latency")
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Untrained weights when omitted.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--data", "data_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--step-sizes", callback=parse_int_list, default=None, help="e.g. 1,6,12,24,48")
@click.option("--hours", callback=parse_float_list, default=None, help="e.g. 1,4,24")
@click.option("--repeats", type=int, default=None)
def latency_cmd(checkpoint, config_path, data_dir, out_dir, step_sizes, hours, repeats):
    """Mean forecast latency per step size and horizon, written to latency.csv."""
    if checkpoint:
        loaded = load_checkpoint(checkpoint, Config.DEVICE)
        run_config, stats, state = loaded.run_config, loaded.stats, loaded.model.state_dict()
    else:
        run_config, stats, state = load_run_config(config_path), None, None
    evaluation, training = run_config.evaluation, run_config.training

    dataset, split = load_split(data_dir, training, "test")
    if stats is None:
        stats = compute_stats(split_by_time(dataset, training.train_fraction, training.val_fraction)[0])
    windows = make_windows(split, training.history_len, training.horizon, evaluation.stride)
    windows = windows[: evaluation.latency_batch]
    graph = dataset.graph(run_config.model.epsilon_km)
    batches = prepare_batches(windows, graph, stats, dataset.sensor_ids, dtype_for(training), Config.DEVICE)
    if not batches:
        raise DataError("no test windows to benchmark on")

    frame = benchmark_latency(
        run_config.model,
        dataset.sensor_ids,
        stats,
        batches,
        step_sizes or evaluation.latency_step_sizes,
        hours or evaluation.latency_hours,
        repeats or evaluation.latency_repeats,
        state,
    )
    out = Path(out_dir or Config.OUTPUT_DIR)
    write_frame(frame, out / LATENCY_FILE)
    print_table(latency_table(frame, rank_correlation(frame)))
    click.echo(f"latency -> {out / LATENCY_FILE}")
