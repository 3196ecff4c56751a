import torch
import torch.nn as nn


def make_mlp(in_dim, hidden_dim, out_dim, layers=3, activation=nn.ReLU):
    """Feed-forward stack of `layers` linear layers with `activation` between them."""
    if layers < 1:
        raise ValueError("an MLP needs at least one layer")
    dims = [in_dim] + [hidden_dim] * (layers - 1) + [out_dim]
    modules = []
    for i, (a, b) in enumerate(zip(dims, dims[1:])):
        modules.append(nn.Linear(a, b))
        if i < layers - 1:
            modules.append(activation())
    return nn.Sequential(*modules)


def segment_softmax(scores, segment, num_segments):
    """Normalized exponentials of `scores` within each segment id."""
    # the per-segment max only shifts scores, which leaves the result unchanged
    peak = torch.full((num_segments,), float("-inf"), dtype=scores.dtype, device=scores.device)
    peak = peak.scatter_reduce(0, segment, scores.detach(), reduce="amax", include_self=True)
    weights = torch.exp(scores - peak[segment])
    total = torch.zeros(num_segments, dtype=scores.dtype, device=scores.device).index_add(0, segment, weights)
    return weights / total[segment]
