import logging

import click
import torch

from .. import __version__, configure_logging
from ..config import Config
from ..errors import ConfigError, SignalcastError

logger = logging.getLogger(__name__)


class SignalcastGroup(click.Group):
    """Click group that turns package errors into a message and their exit code.

    Usage errors (bad option values, unknown options or commands) exit with
    the configuration-error code.
    """

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = ConfigError.exit_code
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = ConfigError.exit_code
            raise
        except SignalcastError as e:
            logger.debug("command failed", exc_info=True)
            click.echo(f"Error: {e.message}", err=True)
            ctx.exit(e.exit_code)


def parse_int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from None


def parse_float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}") from None


def cli_group():
    @click.group(cls=SignalcastGroup)
    @click.option("--log-level", default=None, help="Overrides SIGNALCAST_LOG_LEVEL.")
    @click.version_option(__version__, prog_name="signalcast")
    def cli(log_level):
        """Forecast irregular traffic signal cycles and flows."""
        configure_logging(log_level)
        torch.set_num_threads(Config.NUM_THREADS)

    return cli


def load_split(data_dir, training, part):
    """Load a dataset directory and return (dataset, the requested chronological part)."""
    from ..models.dataset import load_dataset, split_by_time

    dataset = load_dataset(data_dir or Config.DATA_DIR)
    train, val, test = split_by_time(dataset, training.train_fraction, training.val_fraction)
    return dataset, {"train": train, "val": val, "test": test, "all": dataset}[part]
