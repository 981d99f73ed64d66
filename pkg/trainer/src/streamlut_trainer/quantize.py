"""Learnable-step quantization with straight-through gradients.

The engine quantizes planes as ``round_ties_away(clip(x / s, -q_n, q_p))``
and feeds the integer indices to its networks scaled back by ``s``.  Here
the same mapping is trainable: the forward value is exactly the engine's
``round(clip(x/s)) * s``, the input gradient passes straight through the
rounding (identity inside the clip range, zero outside), and the step
gradient is the quantized lattice value, which is the true local slope of
the output in ``s`` between rounding jumps, so it can be checked against
central finite differences anywhere away from a rounding tie.
"""

from __future__ import annotations

import torch


def ties_away_round(v: torch.Tensor) -> torch.Tensor:
    """Round to nearest, ties away from zero; bit-matches the engine's rule."""
    return torch.trunc(v + 0.5 * torch.sign(v))


def lsq_quantize(
    x: torch.Tensor, s: torch.Tensor, q_n: float = 0.0, q_p: float = 255.0
) -> torch.Tensor:
    """Quantize ``x`` to the ``s``-scaled integer grid, returning grid values.

    The forward value is bit-identical to the engine's dequantized indices;
    the ``(x - x.detach())`` term is exactly zero in the forward pass and
    exists only to carry the straight-through input gradient.
    """
    u = x / s
    u_bar = ties_away_round(u.clamp(-q_n, q_p)).detach()
    pass_through = ((u >= -q_n) & (u <= q_p)).detach().to(x.dtype)
    return u_bar * s + (x - x.detach()) * pass_through


def quantize_indices(
    x: torch.Tensor, s: torch.Tensor, q_n: float = 0.0, q_p: float = 255.0
) -> torch.Tensor:
    """The engine-side integer indices for ``x`` (no gradients)."""
    with torch.no_grad():
        return ties_away_round((x / s).clamp(-q_n, q_p))
