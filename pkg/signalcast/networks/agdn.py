"""Asynchronous graph diffusion.

Every observed measurement is diffused as a message along the sensor's
outgoing edges and parked in the receivers' buffers. When a sensor observes
its own next measurement it attends over its buffer, aggregates, and clears
it. After a sensor's last measurement one more convolution runs with a
valueless query at the window anchor, yielding the tail representation.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass

import torch
import torch.nn as nn

from .layers import make_mlp, segment_softmax

logger = logging.getLogger(__name__)

VALUE_DIM = 2
EDGE_DIM = 2


@dataclass(frozen=True)
class TrafficMessage:
    source: str
    values: tuple
    emit_time: int
    edge: tuple


@dataclass(frozen=True)
class Convolution:
    """One buffer read. `position` is the history index, or None for the tail query."""

    sensor_id: str
    position: int | None
    query: tuple | None
    time: int
    messages: tuple

    @property
    def is_tail(self):
        return self.position is None


class MessageBuffer:
    """Per-sensor message stores, drained whole at each convolution."""

    def __init__(self):
        self._store = defaultdict(list)
        self.stored = 0
        self.consumed = 0

    def store(self, receiver, message):
        self._store[receiver].append(message)
        self.stored += 1

    def drain(self, receiver):
        messages = tuple(sorted(self._store.pop(receiver, ()), key=lambda m: (m.emit_time, m.source)))
        self.consumed += len(messages)
        return messages

    def pending(self, receiver):
        return len(self._store.get(receiver, ()))

    def __len__(self):
        return sum(len(v) for v in self._store.values())


def replay_timeline(instance, graph, stats):
    """Replay the history of `instance` in timestamp order and record every convolution.

    At a shared timestamp all stores happen before any convolution; within a
    phase sensors go in ascending id. Sensors without history receive
    messages but never convolve.
    """
    events = defaultdict(list)
    for sid in sorted(instance.windows):
        for position, m in enumerate(instance.windows[sid].history):
            events[m.end].append((sid, position, m))

    buffer = MessageBuffer()
    convolutions = []
    for t in sorted(events):
        batch = events[t]
        for sid, _, m in batch:
            values = stats.normalize(m.length, m.flow)
            for receiver in graph.receivers(sid):
                if receiver in instance.windows:
                    edge = graph.edge(sid, receiver).as_tuple()
                    buffer.store(receiver, TrafficMessage(sid, values, t, edge))
        for sid, position, m in batch:
            query = stats.normalize(m.length, m.flow)
            convolutions.append(Convolution(sid, position, query, t, buffer.drain(sid)))

    for sid in instance.available_sensors:
        convolutions.append(Convolution(sid, None, None, instance.anchor_t, buffer.drain(sid)))
    return convolutions, buffer


class AsyncGraphDiffusion(nn.Module):
    """Attention over buffered neighbour messages followed by an aggregation MLP.

    Score of a message: vᵀ tanh(W_a [x_query ⊕ x_msg ⊕ φ(Δt) ⊕ x_edge]).
    Output: MLP(Σ α · [x_msg ⊕ φ(Δt) ⊕ x_edge]), or zeros for an empty buffer.
    """

    def __init__(self, hidden_dim=64, time_dim=16, mlp_layers=3):
        super().__init__()
        phi_dim = time_dim + 1
        self.hidden_dim = hidden_dim
        self.message_dim = VALUE_DIM + phi_dim + EDGE_DIM
        self.W_a = nn.Linear(VALUE_DIM + self.message_dim, hidden_dim, bias=False)
        self.v = nn.Linear(hidden_dim, 1, bias=False)
        self.mlp = make_mlp(self.message_dim, hidden_dim, hidden_dim, mlp_layers)

    def scores(self, query, msg_values, phi, edge):
        query = query.expand(msg_values.shape[:-1] + query.shape[-1:])
        features = torch.cat([query, msg_values, phi, edge], dim=-1)
        return self.v(torch.tanh(self.W_a(features))).squeeze(-1)

    def attention_weights(self, query, msg_values, phi, edge):
        """Weights over one non-empty buffer; rows of the inputs are messages."""
        if msg_values.shape[0] == 0:
            raise ValueError("attention over an empty buffer")
        return torch.softmax(self.scores(query, msg_values, phi, edge), dim=0)

    def aggregate(self, msg_values, phi, edge, alpha):
        if alpha.shape[0] != msg_values.shape[0]:
            raise ValueError(f"{alpha.shape[0]} weights for {msg_values.shape[0]} messages")
        messages = torch.cat([msg_values, phi, edge], dim=-1)
        return self.mlp((alpha.unsqueeze(-1) * messages).sum(dim=0))

    def zero_output(self, batch):
        zeros = batch.x.new_zeros
        return zeros(batch.x.shape[:2] + (self.hidden_dim,)), zeros((batch.x.shape[0], self.hidden_dim))

    def forward(self, batch, time_encoding):
        """All convolutions of a batch at once.

        Returns (h_tilde, h_bar): (B, T, D) per history position and (B, D) per tail.
        """
        num_conv = batch.conv_batch.shape[0]
        out = batch.x.new_zeros((num_conv, self.hidden_dim))
        if batch.msg_conv.numel():
            receiver = batch.sensor_index[batch.conv_batch[batch.msg_conv]]
            dt = batch.conv_time[batch.msg_conv] - batch.msg_time
            phi = time_encoding(receiver, dt)
            query = batch.conv_query[batch.msg_conv]
            beta = self.scores(query, batch.msg_values, phi, batch.msg_edge)
            alpha = segment_softmax(beta, batch.msg_conv, num_conv)
            messages = torch.cat([batch.msg_values, phi, batch.msg_edge], dim=-1)
            pooled = messages.new_zeros((num_conv, self.message_dim)).index_add(
                0, batch.msg_conv, alpha.unsqueeze(-1) * messages
            )
            filled = torch.bincount(batch.msg_conv, minlength=num_conv) > 0
            out = out.index_put((filled.nonzero(as_tuple=True)[0],), self.mlp(pooled[filled]))

        h_tilde, h_bar = self.zero_output(batch)
        step = batch.conv_pos >= 0
        h_tilde = h_tilde.index_put((batch.conv_batch[step], batch.conv_pos[step]), out[step])
        h_bar = h_bar.index_put((batch.conv_batch[~step],), out[~step])
        return h_tilde, h_bar


def process_timeline(instance, graph, stats, module, time_encoding):
    """Spatial representations per available sensor: {sensor_id: (h_tilde (T, D), h_bar (D,))}."""
    from .batching import build_batch

    dtype = next(module.parameters()).dtype
    batch = build_batch(instance, graph, stats, time_encoding.sensor_ids, dtype=dtype)
    h_tilde, h_bar = module(batch, time_encoding)
    return {
        sid: (h_tilde[b, : int(batch.lengths[b])], h_bar[b])
        for b, sid in enumerate(batch.sensor_ids)
    }
