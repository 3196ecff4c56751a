"""Flatten one ForecastInstance into padded tensors.

Rows are the instance's available sensors in ascending id. Times are stored
relative to the anchor. The AGDN replay is run here once, and its
convolutions and messages are flattened into index arrays so the network
can score every message of the window in one pass.
"""
import dataclasses
from dataclasses import dataclass

import torch

from ..errors import UnknownSensorError
from .agdn import replay_timeline

ZERO_QUERY = (0.0, 0.0)


@dataclass
class InstanceBatch:
    anchor_t: int
    horizon: int
    sensor_ids: list
    sensor_index: torch.Tensor  # (B,) position in the model's sensor list
    x: torch.Tensor  # (B, T, 2) z-scored (length, flow)
    times: torch.Tensor  # (B, T) end second minus anchor
    gaps: torch.Tensor  # (B, T) seconds from previous end to this begin, 0 for the first
    pad_mask: torch.Tensor  # (B, T) True on real measurements
    lengths: torch.Tensor  # (B,)
    last_end: torch.Tensor  # (B,) absolute seconds
    cover: torch.Tensor  # (B,) anchor + horizon - last_end
    conv_batch: torch.Tensor  # (C,)
    conv_pos: torch.Tensor  # (C,) history position, -1 for the tail
    conv_query: torch.Tensor  # (C, 2)
    conv_time: torch.Tensor  # (C,)
    msg_conv: torch.Tensor  # (M,) index into the convolutions
    msg_values: torch.Tensor  # (M, 2)
    msg_time: torch.Tensor  # (M,)
    msg_edge: torch.Tensor  # (M, 2)
    target_p: torch.Tensor  # (B, L)
    target_f: torch.Tensor
    target_delta: torch.Tensor
    target_begin: torch.Tensor
    target_mask: torch.Tensor
    target_len: torch.Tensor  # (B,)

    def __len__(self):
        return len(self.sensor_ids)

    @property
    def masked_slots(self):
        return int(self.target_mask.sum().item())

    def to(self, device=None, dtype=None):
        changes = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, torch.Tensor):
                if dtype is not None and value.is_floating_point():
                    value = value.to(device=device, dtype=dtype)
                else:
                    value = value.to(device=device)
                changes[f.name] = value
        return dataclasses.replace(self, **changes)


def _tensor(rows, dtype):
    return torch.tensor(rows, dtype=dtype)


def _pad(rows, width, fill, dtype):
    out = torch.full((len(rows), width), fill, dtype=dtype)
    for b, row in enumerate(rows):
        if row:
            out[b, : len(row)] = torch.tensor(row, dtype=dtype)
    return out


def build_batch(instance, graph, stats, sensor_ids, dtype=None):
    dtype = dtype or torch.get_default_dtype()
    index = {sid: i for i, sid in enumerate(sensor_ids)}
    available = instance.available_sensors
    row_of = {sid: b for b, sid in enumerate(available)}
    anchor = instance.anchor_t

    try:
        sensor_index = [index[sid] for sid in available]
    except KeyError as e:
        raise UnknownSensorError(e.args[0]) from None

    histories = [instance.windows[sid].history for sid in available]
    width = max((len(h) for h in histories), default=1)
    x = torch.zeros((len(available), width, 2), dtype=dtype)
    times, gaps = [], []
    for b, history in enumerate(histories):
        for n, m in enumerate(history):
            x[b, n] = torch.tensor(stats.normalize(m.length, m.flow), dtype=dtype)
        times.append([m.end - anchor for m in history])
        gaps.append([0] + [m.begin - prev.end for prev, m in zip(history, history[1:])])
    lengths = _tensor([len(h) for h in histories], torch.long)
    last_end = _tensor([h[-1].end for h in histories], torch.long)

    convolutions, _ = replay_timeline(instance, graph, stats)
    conv_batch, conv_pos, conv_query, conv_time = [], [], [], []
    msg_conv, msg_values, msg_time, msg_edge = [], [], [], []
    for c, conv in enumerate(convolutions):
        conv_batch.append(row_of[conv.sensor_id])
        conv_pos.append(-1 if conv.is_tail else conv.position)
        conv_query.append(ZERO_QUERY if conv.query is None else conv.query)
        conv_time.append(conv.time - anchor)
        for message in conv.messages:
            msg_conv.append(c)
            msg_values.append(message.values)
            msg_time.append(message.emit_time - anchor)
            msg_edge.append(message.edge)

    targets = [instance.windows[sid].targets for sid in available]
    slots = max((len(t) for t in targets), default=0)
    target_rows = {
        name: [[getattr(s, name) or 0 for s in t] for t in targets]
        for name in ("length", "flow", "elapsed", "begin", "mask")
    }

    return InstanceBatch(
        anchor_t=anchor,
        horizon=instance.horizon,
        sensor_ids=list(available),
        sensor_index=_tensor(sensor_index, torch.long),
        x=x,
        times=_pad(times, width, 0, dtype),
        gaps=_pad(gaps, width, 0, dtype),
        pad_mask=_pad([[True] * len(h) for h in histories], width, False, torch.bool),
        lengths=lengths,
        last_end=last_end,
        cover=(anchor + instance.horizon - last_end).to(dtype),
        conv_batch=_tensor(conv_batch, torch.long),
        conv_pos=_tensor(conv_pos, torch.long),
        conv_query=_tensor(conv_query, dtype).reshape(-1, 2),
        conv_time=_tensor(conv_time, dtype),
        msg_conv=_tensor(msg_conv, torch.long),
        msg_values=_tensor(msg_values, dtype).reshape(-1, 2),
        msg_time=_tensor(msg_time, dtype),
        msg_edge=_tensor(msg_edge, dtype).reshape(-1, 2),
        target_p=_pad(target_rows["length"], slots, 0, dtype),
        target_f=_pad(target_rows["flow"], slots, 0, dtype),
        target_delta=_pad(target_rows["elapsed"], slots, 0, dtype),
        target_begin=_pad(target_rows["begin"], slots, 0, dtype),
        target_mask=_pad(target_rows["mask"], slots, 0, dtype),
        target_len=_tensor([len(t) for t in targets], torch.long),
    )
