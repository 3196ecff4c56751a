import math

import torch
import torch.nn as nn

from ..errors import UnknownSensorError


def frequency_ladder(time_dim):
    """Transformer-style geometric frequencies, expressed per minute of elapsed seconds."""
    k = torch.arange(time_dim // 2, dtype=torch.get_default_dtype())
    return torch.exp(-math.log(10000.0) * 2.0 * k / time_dim) / 60.0


class TimeEncoding(nn.Module):
    """Per-sensor learnable trigonometric encoding of a time interval, mixed with a shared one.

    For Δt the encoding has time_dim + 1 elements: [Δt, sin(ω_0 Δt), cos(ω_0 Δt), ...].
    Sensor i mixes its own frequencies with the generic ones using the weight
    exp(-λ_i²) on the generic part, so λ_i = 0 gives the generic encoding.

    Args:
        sensor_ids: ordered sensor identifiers; position = sensor index.
        time_dim: d_φ, must be even.
        personalized: when False only the generic encoding is used (λ pinned at 0).
    """

    def __init__(self, sensor_ids, time_dim=16, personalized=True):
        super().__init__()
        if time_dim % 2:
            raise ValueError(f"time_dim must be even, got {time_dim}")
        self.sensor_ids = list(sensor_ids)
        self._index = {sid: i for i, sid in enumerate(self.sensor_ids)}
        self.time_dim = time_dim
        self.personalized_enabled = personalized

        ladder = frequency_ladder(time_dim)
        self.generic_freq = nn.Parameter(ladder.clone())
        self.sensor_freq = nn.Parameter(ladder.repeat(len(self.sensor_ids), 1))
        self.mix = nn.Parameter(torch.randn(len(self.sensor_ids)) * 0.01)
        if not personalized:
            self.sensor_freq.requires_grad_(False)
            self.mix.requires_grad_(False)
            with torch.no_grad():
                self.mix.zero_()

    @property
    def out_dim(self):
        return self.time_dim + 1

    def index_of(self, sensor_id):
        try:
            return self._index[sensor_id]
        except KeyError:
            raise UnknownSensorError(sensor_id) from None

    @staticmethod
    def _trig(dt, freq):
        angles = dt.unsqueeze(-1) * freq
        # interleave so element 2k+1 is sin and 2k+2 is cos of the k-th frequency
        return torch.stack([torch.sin(angles), torch.cos(angles)], dim=-1).flatten(-2)

    def generic_weight(self, sensor_index):
        if not self.personalized_enabled:
            return torch.ones_like(self.mix[sensor_index])
        return torch.exp(-self.mix[sensor_index] ** 2)

    def personalized(self, sensor_index, dt):
        trig = self._trig(dt, self.sensor_freq[sensor_index])
        return torch.cat([dt.unsqueeze(-1), trig], dim=-1)

    def generic(self, dt):
        return torch.cat([dt.unsqueeze(-1), self._trig(dt, self.generic_freq)], dim=-1)

    def forward(self, sensor_index, dt):
        """Mixed encoding φ^i(Δt). `sensor_index` and `dt` broadcast to the same shape."""
        sensor_index, dt = torch.broadcast_tensors(torch.as_tensor(sensor_index), dt)
        generic = self._trig(dt, self.generic_freq)
        if not self.personalized_enabled:
            return torch.cat([dt.unsqueeze(-1), generic], dim=-1)
        weight = self.generic_weight(sensor_index).unsqueeze(-1)
        personal = self._trig(dt, self.sensor_freq[sensor_index])
        # element 0 is Δt itself in both encodings, so it is copied rather than mixed
        mixed = (1.0 - weight) * personal + weight * generic
        return torch.cat([dt.unsqueeze(-1), mixed], dim=-1)

    def _as_dt(self, delta_t):
        return torch.as_tensor(delta_t, dtype=self.generic_freq.dtype, device=self.generic_freq.device)

    def encode_personalized(self, sensor_id, delta_t):
        return self.personalized(self.index_of(sensor_id), self._as_dt(delta_t))

    def encode_generic(self, delta_t):
        return self.generic(self._as_dt(delta_t))

    def encode_mixed(self, sensor_id, delta_t):
        index = torch.tensor(self.index_of(sensor_id), device=self.generic_freq.device)
        return self(index, self._as_dt(delta_t))
