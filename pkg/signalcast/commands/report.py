import logging
from pathlib import Path

import click
import pandas as pd

from ..config import Config
from ..errors import DataError
from ..latency import rank_correlation
from ..reporting import (
    HISTORY_FILE,
    LATENCY_FILE,
    METRICS_FILE,
    latency_table,
    metrics_table,
    plot_history,
    plot_latency,
    plot_metrics,
    print_table,
    read_frame,
    write_frame,
)

logger = logging.getLogger(__name__)


@click.command("report")
@click.option("--run-dir", "run_dirs", multiple=True, type=click.Path(file_okay=False), help="Repeatable.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def report_cmd(run_dirs, out_dir):
    """Summarize run directories as tables and metrics.png / latency.png / history.png."""
    run_dirs = [Path(d) for d in (run_dirs or [Config.OUTPUT_DIR])]
    out = Path(out_dir or run_dirs[0])
    out.mkdir(parents=True, exist_ok=True)

    metrics = []
    for run_dir in run_dirs:
        if (run_dir / METRICS_FILE).exists():
            frame = read_frame(run_dir / METRICS_FILE)
            if len(run_dirs) > 1:
                frame["model"] = run_dir.name + "/" + frame["model"].astype(str)
            metrics.append(frame)
    latency = [read_frame(d / LATENCY_FILE) for d in run_dirs if (d / LATENCY_FILE).exists()]
    histories = [(d, read_frame(d / HISTORY_FILE)) for d in run_dirs if (d / HISTORY_FILE).exists()]
    if not (metrics or latency or histories):
        raise DataError(f"no {METRICS_FILE}, {LATENCY_FILE} or {HISTORY_FILE} in {', '.join(map(str, run_dirs))}")

    written = []
    if metrics:
        frame = pd.concat(metrics, ignore_index=True)
        print_table(metrics_table(frame))
        if len(run_dirs) > 1:
            written.append(write_frame(frame, out / METRICS_FILE))
        written.append(plot_metrics(frame, out / "metrics.png"))
    if latency:
        frame = pd.concat(latency, ignore_index=True)
        print_table(latency_table(frame, rank_correlation(frame)))
        written.append(plot_latency(frame, out / "latency.png"))
    for run_dir, frame in histories:
        name = "history.png" if len(histories) == 1 else f"history_{run_dir.name}.png"
        written.append(plot_history(frame, out / name))
    for path in written:
        click.echo(f"wrote {path}")
