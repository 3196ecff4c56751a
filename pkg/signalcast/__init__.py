import logging

from dotenv import load_dotenv
from rich.logging import RichHandler

load_dotenv()

__version__ = "0.1.0"

logger = logging.getLogger("signalcast")


def configure_logging(level=None):
    """Attach a rich handler to the package logger once; later calls only change the level."""
    from .config import Config

    level = (level or Config.LOG_LEVEL).upper()
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(level)
    return logger


def create_cli():
    # Build the command group and register every command module
    from .commands import cli_group
    from .commands.evaluate import evaluate_cmd
    from .commands.generate import generate_cmd
    from .commands.latency import latency_cmd
    from .commands.report import report_cmd
    from .commands.train import train_cmd

    group = cli_group()
    for command in (generate_cmd, train_cmd, evaluate_cmd, latency_cmd, report_cmd):
        group.add_command(command)
    return group
