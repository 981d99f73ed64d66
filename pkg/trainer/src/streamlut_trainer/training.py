"""The two-stage optimization loop.

Stage 1 minimizes the Charbonnier loss from a zero-residual start; stage 2
fine-tunes the same model with MSE at a much smaller learning rate.  Both
stages run Adam with optional cosine annealing over the stage's iteration
budget, sampling augmented clip windows each step.
"""

from __future__ import annotations

import numpy as np
import torch

from .config import TrainConfig
from .datasets import sample_batch
from .errors import DataError, NumericError
from .formats import save_weights
from .losses import charbonnier_loss, mse_loss
from .model import ReplicaModel

# Lower bound for the learnable quantizer steps: the engine requires s > 0.
MIN_STEP = 1e-3


def train(pairs: list, config: TrainConfig = TrainConfig(), log=None):
    """Optimize a fresh model on clip pairs; returns (model, history).

    ``history`` maps "stage1"/"stage2" to the per-iteration loss values.
    A non-finite loss aborts immediately with the stage, iteration and
    learning rate in the message.
    """
    if not pairs:
        raise DataError("empty dataset: no clip pairs to train on")
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    model = ReplicaModel(window=config.window)
    model.zero_residual_init()
    history: dict = {"stage1": [], "stage2": []}

    stages = (
        ("stage1", config.stage1_iters, config.stage1_lr,
         lambda p, t: charbonnier_loss(p, t, config.charbonnier_eps)),
        ("stage2", config.stage2_iters, config.stage2_lr, mse_loss),
    )
    for stage, iters, lr, loss_fn in stages:
        if iters == 0:
            continue
        model.train()
        opt = torch.optim.Adam(
            model.parameters(), lr=lr, betas=config.adam_betas, eps=config.adam_eps
        )
        sched = (
            torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=iters)
            if config.cosine_annealing
            else None
        )
        for it in range(iters):
            comp, raw, qps = sample_batch(
                pairs, rng, config.crop, config.batch, config.frames_per_sample
            )
            out = model.enhance_window(comp, qps)
            loss = loss_fn(out, raw)
            value = float(loss.detach())
            if not np.isfinite(value):
                raise NumericError(
                    f"{stage} iteration {it}: non-finite loss {value} "
                    f"(lr {opt.param_groups[0]['lr']:.3g})"
                )
            opt.zero_grad()
            loss.backward()
            opt.step()
            with torch.no_grad():
                model.s_input.clamp_(min=MIN_STEP)
                model.s_ref.clamp_(min=MIN_STEP)
            if sched is not None:
                sched.step()
            history[stage].append(value)
            if log is not None:
                log(stage, it, value)
    model.eval()
    return model, history


def export_weights(model: ReplicaModel, path) -> dict:
    """Write the model as an engine weights file; returns the tensor dict."""
    tensors = model.export_tensors()
    for name in ("quant.s_input", "quant.s_ref"):
        if not (tensors[name] > 0).all():
            raise NumericError(f"{name} must be positive, got {tensors[name]}")
    save_weights(path, tensors)
    return tensors
