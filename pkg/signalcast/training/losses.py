import logging
from dataclasses import dataclass

import torch

logger = logging.getLogger(__name__)


@dataclass
class LossBreakdown:
    cycle: torch.Tensor
    timing: torch.Tensor
    flow: torch.Tensor
    masked: int

    @property
    def total(self):
        return self.cycle + self.timing + self.flow

    def as_dict(self):
        return {
            "L_p": float(self.cycle),
            "L_delta": float(self.timing),
            "L_f": float(self.flow),
            "total": float(self.total),
            "masked": self.masked,
        }


def masked_mae(error, mask):
    """Mean of |error| over mask == 1 entries; 0 (still attached to the graph) when nothing is masked in."""
    keep = mask > 0
    count = keep.sum()
    if count == 0:
        logger.warning("no observed target slots; loss term is 0")
        return error.sum() * 0.0
    return torch.where(keep, error.abs(), torch.zeros_like(error)).sum() / count


def loss_cycle(length, target_length, mask):
    return masked_mae(length - target_length, mask)


def loss_timing(elapsed, target_elapsed, mask):
    return masked_mae(elapsed - target_elapsed, mask)


def loss_flow(unit_flow, target_length, target_flow, mask):
    """Flow error with the predicted unit flow multiplied by the true cycle length."""
    return masked_mae(unit_flow * target_length - target_flow, mask)


def _align(rollout, batch):
    slots = min(rollout.length.shape[-1], batch.target_mask.shape[-1])
    return slots, batch.target_mask[..., :slots]


def hybrid_loss(rollout, batch):
    """Unweighted sum of the cycle, timing and flow losses over the batch's observed slots."""
    slots, mask = _align(rollout, batch)
    return LossBreakdown(
        cycle=loss_cycle(rollout.length[..., :slots], batch.target_p[..., :slots], mask),
        timing=loss_timing(rollout.elapsed[..., :slots], batch.target_delta[..., :slots], mask),
        flow=loss_flow(
            rollout.unit_flow[..., :slots],
            batch.target_p[..., :slots],
            batch.target_f[..., :slots],
            mask,
        ),
        masked=int((mask > 0).sum()),
    )
