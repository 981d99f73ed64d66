"""The two training objectives.

Stage 1 uses the Charbonnier loss, a smooth L1 whose epsilon keeps the
gradient finite at zero error; stage 2 fine-tunes with plain MSE at a much
smaller learning rate.
"""

from __future__ import annotations

import torch

from .errors import DataError


def charbonnier_loss(pred: torch.Tensor, target: torch.Tensor, eps: float = 1e-6) -> torch.Tensor:
    """mean(sqrt((pred - target)^2 + eps)); never below sqrt(eps)."""
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return torch.sqrt((pred - target) ** 2 + eps).mean()


def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Per-pixel mean squared error."""
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return ((pred - target) ** 2).mean()
