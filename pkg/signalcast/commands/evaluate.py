import logging
from pathlib import Path

import click

from ..config import Config, load_run_config
from ..errors import ConfigError, DataError
from ..evaluation import baseline_predictors, evaluate_predictors, model_predictor
from ..models.forecast import write_forecast_csv
from ..models.instance import make_windows
from ..reporting import METRICS_FILE, metrics_frame, metrics_table, print_table, write_frame
from ..training import load_checkpoint
from . import load_split

logger = logging.getLogger(__name__)


def checkpoint_label(checkpoint, taken):
    model_config = checkpoint.run_config.model
    label = checkpoint.model.kind
    for flag in ("no_agdn", "no_pte", "no_sapn"):
        if getattr(model_config, flag):
            label += f"-{flag}"
    if checkpoint.model.kind == "aseer" and not model_config.no_sapn and model_config.step_size != 12:
        label += f"-xi{model_config.step_size}"
    base, n = label, 2
    while label in taken:
        label, n = f"{base}-{n}", n + 1
    return label


@click.command("evaluate")
@click.option("--checkpoint", "checkpoints", multiple=True, type=click.Path(dir_okay=False), help="Repeatable.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Used when no checkpoint is given.")
@click.option("--data", "data_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--split", "part", type=click.Choice(["test", "val", "all"]), default="test", show_default=True)
@click.option("--baselines/--no-baselines", default=True, show_default=True, help="Also score LAST and HA.")
def evaluate_cmd(checkpoints, config_path, data_dir, out_dir, part, baselines):
    """Score checkpoints and baselines with all six metrics and write metrics.csv plus forecasts."""
    loaded = [load_checkpoint(path, Config.DEVICE) for path in checkpoints]
    run_config = loaded[0].run_config if loaded else load_run_config(config_path)
    training = run_config.training

    dataset, split = load_split(data_dir, training, part)
    windows = make_windows(split, training.history_len, training.horizon, run_config.evaluation.stride)
    if not windows:
        raise DataError(f"no evaluation windows in the {part} split")

    predictors = baseline_predictors() if baselines else {}
    for checkpoint in loaded:
        label = checkpoint_label(checkpoint, predictors)
        graph = dataset.graph(checkpoint.run_config.model.epsilon_km)
        predictors[label] = model_predictor(checkpoint.model, graph, checkpoint.stats, Config.DEVICE)
    if not predictors:
        raise ConfigError("nothing to evaluate: pass --checkpoint or keep --baselines")

    reports, forecasts = evaluate_predictors(predictors, windows)
    out = Path(out_dir or Config.OUTPUT_DIR)
    frame = metrics_frame(reports.values())
    write_frame(frame, out / METRICS_FILE)
    for name, per_window in forecasts.items():
        write_forecast_csv(per_window, out / f"forecast_{name}.csv")
    print_table(metrics_table(frame, title=f"Forecast accuracy ({part} split, {len(windows)} windows)"))
    click.echo(f"metrics -> {out / METRICS_FILE}")
