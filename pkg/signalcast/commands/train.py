import logging
from dataclasses import replace
from pathlib import Path

import click
import torch

from ..config import Config, dump_run_config, load_run_config, parse_run_config
from ..models.dataset import compute_stats, load_dataset, split_by_time
from ..models.instance import make_windows
from ..networks import MODEL_KINDS, create_model
from ..reporting import HISTORY_FILE, write_frame
from ..training import CHECKPOINT_FILE, Trainer, dtype_for, prepare_batches, save_checkpoint

logger = logging.getLogger(__name__)


@click.command("train")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--data", "data_dir", type=click.Path(file_okay=False), default=None, help="Defaults to SIGNALCAST_DATA_DIR.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Defaults to SIGNALCAST_OUTPUT_DIR.")
@click.option("--model", "kind", type=click.Choice(MODEL_KINDS), default=None)
@click.option("--step-size", type=int, default=None, help="Prediction step size xi.")
@click.option("--no-agdn", is_flag=True, default=False, help="Zero all spatial representations.")
@click.option("--no-pte", is_flag=True, default=False, help="Generic time encoding only.")
@click.option("--no-sapn", is_flag=True, default=False, help="Per-cycle decoding without state evolution.")
@click.option("--max-epochs", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Overrides training.seed.")
def train_cmd(config_path, data_dir, out_dir, kind, step_size, no_agdn, no_pte, no_sapn, max_epochs, seed):
    """Train a forecaster and write model.pt, stats.json and history.csv."""
    run_config = load_run_config(config_path)
    overrides = {"no_agdn": no_agdn or run_config.model.no_agdn, "no_pte": no_pte or run_config.model.no_pte}
    overrides["no_sapn"] = no_sapn or run_config.model.no_sapn
    if kind is not None:
        overrides["kind"] = kind
    if step_size is not None:
        overrides["step_size"] = step_size
    training = run_config.training
    if max_epochs is not None:
        training = replace(training, max_epochs=max_epochs)
    if seed is not None:
        training = replace(training, seed=seed)
    run_config = replace(run_config, model=replace(run_config.model, **overrides), training=training)
    # command-line overrides go through the same validation as the file
    run_config = parse_run_config(dump_run_config(run_config))
    training = run_config.training

    torch.manual_seed(training.seed)
    dataset = load_dataset(data_dir or Config.DATA_DIR)
    train, val, _ = split_by_time(dataset, training.train_fraction, training.val_fraction)
    stats = compute_stats(train)
    graph = dataset.graph(run_config.model.epsilon_km)

    model = create_model(run_config.model, dataset.sensor_ids, stats)
    dtype = dtype_for(training)
    device = Config.DEVICE
    batches = {
        name: prepare_batches(
            make_windows(part, training.history_len, training.horizon, training.stride),
            graph,
            stats,
            model.sensor_ids,
            dtype,
            device,
        )
        for name, part in (("train", train), ("val", val))
    }
    logger.info(
        "%s model, %d training and %d validation windows", model.kind, len(batches["train"]), len(batches["val"])
    )

    result = Trainer(model, training, device).fit(batches["train"], batches["val"])
    out = Path(out_dir or Config.OUTPUT_DIR)
    save_checkpoint(out / CHECKPOINT_FILE, model, run_config, stats, result.history)
    write_frame(result.frame(), out / HISTORY_FILE)
    click.echo(f"best validation loss {result.best_val:.4f} at epoch {result.best_epoch} -> {out}")
