import logging
from dataclasses import replace

import click

from ..config import Config, load_run_config
from ..synthgen import export, generate

logger = logging.getLogger(__name__)


@click.command("generate")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Run-config JSON.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Defaults to SIGNALCAST_DATA_DIR.")
@click.option("--days", type=int, default=None, help="Overrides the config's days.")
@click.option("--seed", type=int, default=None, help="Overrides scenario.seed.")
def generate_cmd(config_path, out_dir, days, seed):
    """Simulate a signal network and write cycles.csv, nodes.csv and reach.csv."""
    run_config = load_run_config(config_path)
    scenario = run_config.scenario if seed is None else replace(run_config.scenario, seed=seed)
    dataset = generate(scenario, run_config.days if days is None else days)
    out = export(dataset, out_dir or Config.DATA_DIR, scenario)
    click.echo(
        f"{len(dataset.sensors)} sensors, {dataset.missing_fraction():.1%} of cycle time missing -> {out}"
    )
