"""Semi-autoregressive decoding.

Every decoding step first advances the hidden state by the time the previous
step covered, then emits ξ consecutive (cycle length, unit-time flow) pairs.
Steps repeat until the predicted slots pass the required cover time and the
required slot count.
"""
import logging
import math
from dataclasses import dataclass, replace

import torch
import torch.nn as nn

from .layers import make_mlp

logger = logging.getLogger(__name__)


@dataclass
class DecoderState:
    hidden: torch.Tensor  # (B, D)
    context: torch.Tensor  # (B, D), the encoder output 𝐡_T
    delta: torch.Tensor  # (B,) elapsed from the last observation to the next slot begin
    sigma: torch.Tensor  # (B,) elapsed since the previous state update
    step: int = 0

    @classmethod
    def initial(cls, context):
        ones = context.new_ones(context.shape[:-1])
        return cls(context, context, ones, ones.clone(), 0)


@dataclass
class StepPrediction:
    length: torch.Tensor  # (B, ξ)
    unit_flow: torch.Tensor  # (B, ξ)
    elapsed: torch.Tensor  # (B, ξ)

    @property
    def flow(self):
        return self.unit_flow * self.length


@dataclass
class Rollout:
    """Batched decoder output; slots past a row's own `steps * step_size` are surplus."""

    length: torch.Tensor
    unit_flow: torch.Tensor
    elapsed: torch.Tensor
    steps: torch.Tensor
    truncated: torch.Tensor
    step_size: int
    invocations: int

    @property
    def flow(self):
        return self.unit_flow * self.length

    def begin(self, last_end):
        return last_end.unsqueeze(-1) + self.elapsed

    def slots(self, row):
        return int(self.steps[row]) * self.step_size


class StateEvolutionUnit(nn.Module):
    def __init__(self, time_dim, hidden_dim=64):
        super().__init__()
        self.cell = nn.GRUCell(time_dim, hidden_dim)

    def forward(self, phi_sigma, hidden):
        return self.cell(phi_sigma, hidden)


class SemiAutoregressivePredictor(nn.Module):
    """MLP over [ĥ ⊕ 𝐡_T ⊕ φ(δ̂)] emitting ξ (length, unit flow) pairs.

    Raw outputs are de-normalized with the training statistics; nothing is
    clamped here.
    """

    def __init__(self, hidden_dim, time_dim, step_size=12, mlp_layers=3, stats=None):
        super().__init__()
        if step_size < 1:
            raise ValueError(f"step_size must be >= 1, got {step_size}")
        self.step_size = step_size
        self.mlp = make_mlp(2 * hidden_dim + time_dim, hidden_dim, 2 * step_size, mlp_layers)
        scale = [0.0, 1.0, 0.0, 1.0] if stats is None else [stats.p_mean, stats.p_std, stats.u_mean, stats.u_std]
        self.register_buffer("scale", torch.tensor(scale, dtype=torch.get_default_dtype()))
        self.invocations = 0

    def forward(self, hidden, context, phi_delta):
        self.invocations += 1
        out = self.mlp(torch.cat([hidden, context, phi_delta], dim=-1)).unflatten(-1, (self.step_size, 2))
        p_mean, p_std, u_mean, u_std = self.scale
        return p_mean + p_std * out[..., 0], u_mean + u_std * out[..., 1]


def predict_step(state, predictor, phi_delta, clamp=False):
    length, unit_flow = predictor(state.hidden, state.context, phi_delta)
    if clamp:
        length = length.clamp(min=1.0)
        unit_flow = unit_flow.clamp(min=0.0)
    elapsed = state.delta.unsqueeze(-1) + torch.cumsum(length, dim=-1) - length
    return StepPrediction(length, unit_flow, elapsed)


def update_elapsed(state, step):
    return state.delta + step.length.sum(dim=-1)


def evolve_state(state, unit, phi_sigma):
    return unit(phi_sigma, state.hidden)


def max_steps(cover, needed, step_size, p_floor=20.0):
    """Hard cap on decoding steps for one rollout."""
    return max(math.ceil(cover / p_floor / step_size) + 2, math.ceil(needed / step_size))


def run_rollout(step_fn, state, cover, needed=None, step_size=12, p_floor=20.0, cap=None):
    """Repeat `step_fn` until every row has passed its cover time and slot count.

    `step_fn(state)` returns (new_hidden, StepPrediction). `cover` and `needed`
    are per row; at least one step always runs.
    """
    if needed is None:
        needed = torch.zeros_like(cover, dtype=torch.long)
    if cap is None:
        top_cover = float(cover.max()) if cover.numel() else 0.0
        top_needed = int(needed.max()) if needed.numel() else 0
        cap = max_steps(top_cover, top_needed, step_size, p_floor)

    batch = cover.shape[0]
    steps = torch.zeros(batch, dtype=torch.long, device=cover.device)
    done = torch.zeros(batch, dtype=torch.bool, device=cover.device)
    predictions = []
    for m in range(cap):
        hidden, step = step_fn(state)
        predictions.append(step)
        delta = update_elapsed(state, step)
        state = replace(state, hidden=hidden, delta=delta, sigma=step.length.sum(dim=-1), step=m + 1)
        steps = torch.where(done, steps, steps + 1)
        done = done | ((delta.detach() > cover) & ((m + 1) * step_size >= needed))
        if bool(done.all()):
            break

    truncated = ~done
    if bool(truncated.any()):
        logger.warning("%d rollout(s) hit the %d-step cap before covering the horizon", int(truncated.sum()), cap)
    return Rollout(
        length=torch.cat([s.length for s in predictions], dim=-1),
        unit_flow=torch.cat([s.unit_flow for s in predictions], dim=-1),
        elapsed=torch.cat([s.elapsed for s in predictions], dim=-1),
        steps=steps,
        truncated=truncated,
        step_size=step_size,
        invocations=len(predictions),
    )


class SemiAutoregressiveDecoder(nn.Module):
    """State evolution unit plus predictor; φ is supplied by the caller's time encoding."""

    def __init__(self, hidden_dim=64, time_dim=17, step_size=12, mlp_layers=3, stats=None, evolve=True):
        super().__init__()
        self.evolve = evolve
        self.step_size = step_size
        self.seu = StateEvolutionUnit(time_dim, hidden_dim)
        self.predictor = SemiAutoregressivePredictor(hidden_dim, time_dim, step_size, mlp_layers, stats)

    def step(self, state, encode, clamp=False):
        hidden = state.hidden
        if self.evolve:
            hidden = evolve_state(state, self.seu, encode(state.sigma))
            state = replace(state, hidden=hidden)
        return hidden, predict_step(state, self.predictor, encode(state.delta), clamp)

    def forward(self, context, encode, cover, needed=None, clamp=False, p_floor=20.0):
        """`encode(dt)` maps a (B,) tensor of seconds to the rows' φ^i(dt)."""
        return run_rollout(
            lambda state: self.step(state, encode, clamp),
            DecoderState.initial(context),
            cover,
            needed,
            self.step_size,
            p_floor,
        )
