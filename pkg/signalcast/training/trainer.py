import copy
import logging
import math
from dataclasses import dataclass, field

import pandas as pd
import torch

from ..errors import DataError, TrainingDivergedError
from ..networks.batching import build_batch
from .losses import hybrid_loss

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["epoch", "L_p", "L_delta", "L_f", "train_total", "val_total"]


@dataclass
class TrainResult:
    history: list = field(default_factory=list)
    best_epoch: int = 0
    best_val: float = math.inf
    stopped_early: bool = False

    def frame(self):
        return pd.DataFrame(self.history, columns=HISTORY_COLUMNS)


def dtype_for(config):
    return torch.float64 if config.double_precision else torch.float32


def prepare_batches(instances, graph, stats, sensor_ids, dtype=None, device="cpu"):
    """One batch per window; windows with no available sensor or no observed target are dropped."""
    batches, skipped = [], 0
    for instance in instances:
        batch = build_batch(instance, graph, stats, sensor_ids, dtype=dtype)
        if len(batch) == 0 or batch.masked_slots == 0:
            skipped += 1
            continue
        batches.append(batch.to(device=device))
    if skipped:
        logger.info("skipped %d of %d windows without usable targets", skipped, len(instances))
    return batches


class Trainer:
    """Adam with gradient clipping and early stopping on the validation loss.

    One window (all of its available sensors) is one optimization step;
    windows are shuffled every epoch.
    """

    def __init__(self, model, config, device="cpu"):
        self.config = config
        self.device = device
        self.dtype = dtype_for(config)
        self.model = model.to(device=device, dtype=self.dtype)
        self.optimizer = torch.optim.Adam(self.model.parameters(), lr=config.lr)
        self.generator = torch.Generator().manual_seed(config.seed)

    def _loss(self, batch):
        rollout = self.model(batch, needed=batch.target_len)
        return hybrid_loss(rollout, batch)

    def train_epoch(self, batches, epoch):
        self.model.train()
        sums = {"L_p": 0.0, "L_delta": 0.0, "L_f": 0.0, "total": 0.0}
        order = torch.randperm(len(batches), generator=self.generator).tolist()
        for i in order:
            batch = batches[i]
            self.optimizer.zero_grad()
            breakdown = self._loss(batch)
            total = breakdown.total
            if not torch.isfinite(total):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} on the window anchored at {batch.anchor_t}: "
                    f"L_p={float(breakdown.cycle):.4g} L_delta={float(breakdown.timing):.4g} "
                    f"L_f={float(breakdown.flow):.4g}"
                )
            total.backward()
            torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.config.grad_clip)
            self.optimizer.step()
            for key, value in breakdown.as_dict().items():
                if key in sums:
                    sums[key] += value
        count = max(len(batches), 1)
        return {key: value / count for key, value in sums.items()}

    @torch.no_grad()
    def validate(self, batches):
        self.model.eval()
        if not batches:
            return math.nan
        return sum(float(self._loss(batch).total) for batch in batches) / len(batches)

    def fit(self, train_batches, val_batches):
        if not train_batches:
            raise DataError("no training windows with observed targets")
        if not val_batches:
            logger.warning("no validation windows; early stopping follows the training loss")

        result = TrainResult()
        best_state = copy.deepcopy(self.model.state_dict())
        stale = 0
        for epoch in range(1, self.config.max_epochs + 1):
            train = self.train_epoch(train_batches, epoch)
            val = self.validate(val_batches) if val_batches else train["total"]
            if not math.isfinite(val):
                raise TrainingDivergedError(f"non-finite validation loss at epoch {epoch}")
            result.history.append(
                {
                    "epoch": epoch,
                    "L_p": train["L_p"],
                    "L_delta": train["L_delta"],
                    "L_f": train["L_f"],
                    "train_total": train["total"],
                    "val_total": val,
                }
            )
            logger.info(
                "epoch %3d  L_p %.3f  L_delta %.3f  L_f %.3f  val %.3f",
                epoch,
                train["L_p"],
                train["L_delta"],
                train["L_f"],
                val,
            )
            if val < result.best_val:
                result.best_val, result.best_epoch = val, epoch
                best_state = copy.deepcopy(self.model.state_dict())
                stale = 0
            else:
                stale += 1
                if stale >= self.config.patience:
                    logger.info("early stop at epoch %d; best epoch %d", epoch, result.best_epoch)
                    result.stopped_early = True
                    break

        self.model.load_state_dict(best_state)
        return result
