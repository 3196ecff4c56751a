import logging
from types import SimpleNamespace

import pytest
import torch

from signalcast.networks.sapn import Rollout
from signalcast.training import hybrid_loss, loss_cycle, loss_flow, loss_timing


def t(*values):
    return torch.tensor(values, dtype=torch.float64)


def test_cycle_loss_averages_observed_slots():
    assert loss_cycle(t(60, 50, 40), t(70, 50, 90), t(1, 1, 0)).item() == 5.0


def test_timing_loss():
    assert loss_timing(t(61, 121), t(60, 125), t(1, 1)).item() == 2.5


def test_flow_loss_uses_true_length():
    assert loss_flow(t(0.5), t(60), t(25), t(1)).item() == 5.0
    assert loss_flow(t(0.25, 0.1), t(40, 50), t(10, 5), t(1, 1)).item() == pytest.approx(0.0, abs=1e-12)


def test_perfect_prediction_is_zero():
    assert loss_cycle(t(60, 45), t(60, 45), t(1, 1)).item() == 0.0


def test_masked_targets_do_not_matter():
    mask = t(1, 0, 1)
    base = loss_cycle(t(1, 2, 3), t(2, 2, 2), mask)
    perturbed = loss_cycle(t(1, 2, 3), t(2, 1e6, 2), mask)
    assert base.item() == perturbed.item()
    assert loss_flow(t(1, 1, 1), t(1, float("nan"), 1), t(1, 5, 1), mask).item() == 0.0


def test_all_masked_out_gives_zero_with_gradient(caplog):
    pred = t(10, 20).requires_grad_()
    with caplog.at_level(logging.WARNING):
        loss = loss_cycle(pred, t(0, 0), t(0, 0))
    assert loss.item() == 0.0
    loss.backward()
    assert pred.grad.tolist() == [0.0, 0.0]
    assert "no observed target slots" in caplog.text


def rollout(length, unit_flow, elapsed):
    return Rollout(
        length=torch.tensor(length, dtype=torch.float64),
        unit_flow=torch.tensor(unit_flow, dtype=torch.float64),
        elapsed=torch.tensor(elapsed, dtype=torch.float64),
        steps=torch.tensor([1]),
        truncated=torch.tensor([False]),
        step_size=3,
        invocations=1,
    )


def test_hybrid_loss_sums_the_three_terms_over_aligned_slots():
    out = rollout([[60.0, 50.0, 40.0]], [[0.5, 0.2, 9.0]], [[61.0, 121.0, 171.0]])
    batch = SimpleNamespace(
        target_p=t(70, 50).unsqueeze(0),
        target_f=t(30, 12).unsqueeze(0),
        target_delta=t(60, 125).unsqueeze(0),
        target_mask=t(1, 1).unsqueeze(0),
    )
    losses = hybrid_loss(out, batch)
    # slot 1: |0.5*70-30| = 5, slot 2: |0.2*50-12| = 2
    assert losses.cycle.item() == 5.0
    assert losses.timing.item() == 2.5
    assert losses.flow.item() == pytest.approx(3.5)
    assert losses.total.item() == pytest.approx(11.0)
    assert losses.masked == 2
    row = losses.as_dict()
    assert set(row) == {"L_p", "L_delta", "L_f", "total", "masked"}
    assert row["total"] == pytest.approx(row["L_p"] + row["L_delta"] + row["L_f"])
