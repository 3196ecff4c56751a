import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
from rich.console import Console  # noqa: E402
from rich.table import Table  # noqa: E402

from .errors import DataError  # noqa: E402
from .metrics import METRIC_NAMES  # noqa: E402

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
LATENCY_FILE = "latency.csv"
HISTORY_FILE = "history.csv"

METRIC_COLUMNS = {
    "C-MAE": "c_mae",
    "C-RMSE": "c_rmse",
    "C-MAPE": "c_mape",
    "F-MAE": "f_mae",
    "F-RMSE": "f_rmse",
    "F-AAE": "f_aae",
}


def metrics_frame(reports):
    return pd.DataFrame([r.as_row() for r in reports])


def write_frame(frame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def read_frame(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"report input not found: {path}")
    return pd.read_csv(path)


def _fmt(value, digits=3):
    if value is None or pd.isna(value):
        return "-"
    return f"{value:.{digits}f}"


def metrics_table(frame, title="Forecast accuracy"):
    table = Table(title=title)
    table.add_column("model", style="bold")
    for name in METRIC_NAMES:
        table.add_column(name, justify="right")
    table.add_column("ms/window", justify="right")
    for row in frame.to_dict("records"):
        cells = [_fmt(row.get(METRIC_COLUMNS[name])) for name in METRIC_NAMES]
        table.add_row(str(row["model"]), *cells, _fmt(row.get("latency_ms"), 1))
    return table


def latency_table(frame, correlations=None):
    table = Table(title="Forecast latency by step size")
    for column in ("xi", "hours", "ms", "invocations", "slots"):
        table.add_column(column, justify="right")
    for row in frame.to_dict("records"):
        table.add_row(
            str(int(row["xi"])), f"{row['hours']:g}", _fmt(row["ms"], 2), str(int(row["invocations"])), str(int(row["slots"]))
        )
    if correlations:
        table.caption = "  ".join(f"{h:g}h rank corr {rho:+.2f}" for h, rho in sorted(correlations.items()))
    return table


def print_table(table, console=None):
    (console or Console()).print(table)


def plot_metrics(frame, path):
    """One bar panel per metric, one bar per model."""
    fig, axes = plt.subplots(2, 3, figsize=(12, 6))
    models = frame["model"].astype(str).tolist()
    for ax, name in zip(axes.flat, METRIC_NAMES):
        values = pd.to_numeric(frame[METRIC_COLUMNS[name]], errors="coerce").fillna(0.0)
        ax.bar(models, values, color="tab:blue")
        ax.set_title(name)
        ax.tick_params(axis="x", labelrotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    logger.info("wrote %s", path)
    return Path(path)


def plot_latency(frame, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for hours, group in frame.groupby("hours"):
        group = group.sort_values("xi")
        ax.plot(group["xi"], group["ms"], marker="o", label=f"{hours:g} h")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("prediction step size")
    ax.set_ylabel("ms per forecast")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    logger.info("wrote %s", path)
    return Path(path)


def plot_history(frame, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for column in ("train_total", "val_total"):
        if column in frame:
            ax.plot(frame["epoch"], frame[column], label=column)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
