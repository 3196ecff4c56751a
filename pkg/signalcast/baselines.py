"""Reference predictors: LAST, HA and a plain recurrent encoder-decoder."""
import logging

import numpy as np
import torch
import torch.nn as nn

from .models.forecast import repeat_slots
from .networks.sapn import DecoderState, StepPrediction, run_rollout

logger = logging.getLogger(__name__)

DECODER_TIME_SCALE = 3600.0


def last_predict(instance, standardize=False):
    """Repeat each sensor's last observed (length, flow) until its horizon is covered."""
    out = {}
    for sid in instance.available_sensors:
        window = instance.windows[sid]
        last = window.history[-1]
        min_slots = len(window.targets) if standardize else 0
        out[sid] = repeat_slots(sid, last.end, last.length, last.flow, instance.cover(sid), min_slots)
    return out


def ha_predict(instance, standardize=False):
    """Repeat the mean (length, flow) of the sensor's historical window."""
    out = {}
    for sid in instance.available_sensors:
        window = instance.windows[sid]
        length = max(int(np.round(np.mean([m.length for m in window.history]))), 1)
        flow = float(np.mean([m.flow for m in window.history]))
        min_slots = len(window.targets) if standardize else 0
        out[sid] = repeat_slots(sid, window.last_end, length, flow, instance.cover(sid), min_slots)
    return out


class RecurrentForecaster(nn.Module):
    """GRU encoder over z-scored (length, flow, gap) and a cycle-by-cycle GRU decoder.

    The decoder sees the previously predicted length and the elapsed time so
    far. It has no spatial input and no time encoding; `step_size` is always 1.
    """

    kind = "recurrent"
    step_size = 1

    def __init__(self, sensor_ids, config, stats=None):
        super().__init__()
        self.sensor_ids = list(sensor_ids)
        self.config = config
        hidden = config.hidden_dim
        self.encoder = nn.GRU(3, hidden, batch_first=True)
        self.cell = nn.GRUCell(2, hidden)
        self.head = nn.Linear(hidden, 2)
        if stats is None:
            scale = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]
        else:
            scale = [stats.p_mean, stats.p_std, stats.u_mean, stats.u_std, stats.gap_mean, stats.gap_std]
        self.register_buffer("scale", torch.tensor(scale, dtype=torch.get_default_dtype()))

    def encode(self, batch):
        gap = (batch.gaps - self.scale[4]) / self.scale[5]
        inputs = torch.cat([batch.x, gap.unsqueeze(-1)], dim=-1)
        packed = nn.utils.rnn.pack_padded_sequence(
            inputs, batch.lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        _, hidden = self.encoder(packed)
        return hidden[-1]

    def step(self, state, clamp=False):
        p_mean, p_std, u_mean, u_std = self.scale[:4]
        inputs = torch.stack([(state.sigma - p_mean) / p_std, state.delta / DECODER_TIME_SCALE], dim=-1)
        hidden = self.cell(inputs, state.hidden)
        out = self.head(hidden)
        length = (p_mean + p_std * out[..., 0]).unsqueeze(-1)
        unit_flow = (u_mean + u_std * out[..., 1]).unsqueeze(-1)
        if clamp:
            length = length.clamp(min=1.0)
            unit_flow = unit_flow.clamp(min=0.0)
        return hidden, StepPrediction(length, unit_flow, state.delta.unsqueeze(-1))

    def forward(self, batch, needed=None, clamp=False, cover=None):
        context = self.encode(batch)
        cover = batch.cover if cover is None else cover
        return run_rollout(
            lambda state: self.step(state, clamp),
            DecoderState.initial(context),
            cover,
            needed,
            self.step_size,
            self.config.p_floor,
        )
