import logging

import torch
import torch.nn as nn

from ..models.forecast import PredictedSlots
from .agdn import AsyncGraphDiffusion
from .sapn import SemiAutoregressiveDecoder
from .time_encoding import TimeEncoding
from .ttcn import TransformableConvolution, fuse

logger = logging.getLogger(__name__)

VALUE_DIM = 2


class AsyncForecaster(nn.Module):
    """Full irregular-traffic forecaster: AGDN → TTCN → fuse → SAPN rollout.

    Ablations read from `config`: `no_agdn` zeroes every spatial
    representation, `no_pte` keeps only the generic time encoding, and
    `no_sapn` decodes one cycle per step with no state evolution.
    """

    kind = "aseer"

    def __init__(self, sensor_ids, config, stats=None):
        super().__init__()
        self.sensor_ids = list(sensor_ids)
        self.config = config
        hidden = config.hidden_dim
        self.time_encoding = TimeEncoding(self.sensor_ids, config.time_dim, personalized=not config.no_pte)
        phi_dim = self.time_encoding.out_dim
        self.agdn = AsyncGraphDiffusion(hidden, config.time_dim, config.mlp_layers)
        self.ttcn = TransformableConvolution(VALUE_DIM + hidden + phi_dim, hidden, hidden)
        self.decoder = SemiAutoregressiveDecoder(
            hidden,
            phi_dim,
            1 if config.no_sapn else config.step_size,
            config.mlp_layers,
            stats,
            evolve=not config.no_sapn,
        )

    @property
    def step_size(self):
        return self.decoder.step_size

    @property
    def predictor(self):
        return self.decoder.predictor

    def spatial(self, batch):
        if self.config.no_agdn:
            return self.agdn.zero_output(batch)
        return self.agdn(batch, self.time_encoding)

    def encode(self, batch):
        """𝐡_T per row of the batch."""
        h_tilde, h_bar = self.spatial(batch)
        last = batch.times.gather(1, (batch.lengths - 1).unsqueeze(1))
        phi = self.time_encoding(batch.sensor_index.unsqueeze(1), last - batch.times)
        z = torch.cat([batch.x, h_tilde, phi], dim=-1)
        return fuse(self.ttcn(z, batch.pad_mask), h_bar)

    def forward(self, batch, needed=None, clamp=False, cover=None):
        context = self.encode(batch)
        index = batch.sensor_index

        def encode(dt):
            return self.time_encoding(index, dt)

        cover = batch.cover if cover is None else cover
        return self.decoder(context, encode, cover, needed, clamp, self.config.p_floor)


def predicted_slots(batch, rollout):
    """Split a batched rollout into one PredictedSlots per sensor, trimmed to its own steps."""
    out = {}
    elapsed = rollout.elapsed.detach().cpu().numpy()
    length = rollout.length.detach().cpu().numpy()
    unit_flow = rollout.unit_flow.detach().cpu().numpy()
    for b, sid in enumerate(batch.sensor_ids):
        count = rollout.slots(b)
        out[sid] = PredictedSlots(
            sid,
            int(batch.last_end[b]),
            elapsed[b, :count],
            length[b, :count],
            unit_flow[b, :count],
            steps=int(rollout.steps[b]),
            truncated=bool(rollout.truncated[b]),
        )
    return out
