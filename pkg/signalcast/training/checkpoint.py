import logging
from dataclasses import dataclass
from pathlib import Path

import torch

from ..config import dump_run_config, parse_run_config
from ..errors import DataError
from ..models.dataset import STATS_FILE, NormalizationStatsSchema, save_stats
from ..networks import create_model

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "model.pt"


@dataclass
class Checkpoint:
    model: torch.nn.Module
    run_config: object
    stats: object
    history: list


def save_checkpoint(path, model, run_config, stats, history=None):
    """Parameters, normalization stats and the config echo in one file; stats.json is written beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "kind": model.kind,
        "sensor_ids": list(model.sensor_ids),
        "state_dict": model.state_dict(),
        "config": dump_run_config(run_config),
        "stats": NormalizationStatsSchema().dump(stats),
        "history": list(history or []),
    }
    torch.save(payload, path)
    save_stats(stats, path.with_name(STATS_FILE))
    logger.info("saved %s checkpoint to %s", model.kind, path)
    return path


def load_checkpoint(path, device="cpu"):
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location=device, weights_only=True)
    except Exception as e:
        raise DataError(f"cannot read checkpoint {path}: {e}") from e

    run_config = parse_run_config(payload["config"])
    stats = NormalizationStatsSchema().load(payload["stats"])
    model = create_model(run_config.model, payload["sensor_ids"], stats, kind=payload["kind"])
    state = payload["state_dict"]
    if any(t.dtype == torch.float64 for t in state.values()):
        model = model.double()
    model.load_state_dict(state)
    model.to(device)
    model.eval()
    return Checkpoint(model, run_config, stats, payload.get("history", []))
