"""Transformable time-aware convolution.

A meta-filter maps every element z_n of a sequence to one row of each of D
filters, so the filter length always equals the sequence length. Rows are
normalized over time per (filter, channel), and the convolution is a single
full-length inner product per filter.
"""
import torch
import torch.nn as nn


class MetaFilter(nn.Module):
    """Shared tanh trunk plus D output heads, each mapping to the input width."""

    def __init__(self, in_dim, out_maps, hidden_dim=64):
        super().__init__()
        self.in_dim = in_dim
        self.out_maps = out_maps
        self.trunk = nn.Sequential(
            nn.Linear(in_dim, hidden_dim),
            nn.Tanh(),
            nn.Linear(hidden_dim, hidden_dim),
            nn.Tanh(),
        )
        # all D heads in one matrix, reshaped to (..., D, in_dim)
        self.heads = nn.Linear(hidden_dim, out_maps * in_dim)

    def forward(self, z):
        raw = self.heads(self.trunk(z))
        return raw.unflatten(-1, (self.out_maps, self.in_dim))


class TransformableConvolution(nn.Module):
    def __init__(self, in_dim, out_maps, hidden_dim=64):
        super().__init__()
        self.meta_filter = MetaFilter(in_dim, out_maps, hidden_dim)

    @property
    def out_dim(self):
        return self.meta_filter.out_maps

    def derive_filters(self, z, mask=None):
        """Filters of shape (..., T, D, D_in); every channel sums to 1 over T.

        `mask` (..., T) marks real positions; padded positions get weight 0.
        """
        if z.shape[-2] == 0:
            raise ValueError("cannot derive filters for an empty sequence")
        raw = self.meta_filter(z)
        if mask is not None:
            raw = raw.masked_fill(~mask[..., None, None], float("-inf"))
        return torch.softmax(raw, dim=-3)

    @staticmethod
    def convolve(z, filters):
        if filters.shape[-3] != z.shape[-2]:
            raise ValueError(f"filter length {filters.shape[-3]} does not match sequence length {z.shape[-2]}")
        if filters.shape[-1] != z.shape[-1]:
            raise ValueError(f"filter width {filters.shape[-1]} does not match input width {z.shape[-1]}")
        return torch.einsum("...tdc,...tc->...d", filters, z)

    def forward(self, z, mask=None):
        if mask is not None:
            z = z.masked_fill(~mask[..., None], 0.0)
        return self.convolve(z, self.derive_filters(z, mask))


def fuse(h, h_bar):
    """Spatiotemporal representation: temporal plus tail spatial representation."""
    if h.shape[-1] != h_bar.shape[-1]:
        raise ValueError(f"cannot fuse widths {h.shape[-1]} and {h_bar.shape[-1]}")
    return h + h_bar
