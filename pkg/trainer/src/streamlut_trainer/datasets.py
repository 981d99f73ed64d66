"""Clip-pair datasets and training-batch sampling.

A training clip is a compressed/raw pair of streams with identical
geometry.  On disk a pair is three files sharing a stem inside the data
directory: ``<stem>.comp.yuv`` (compressed), ``<stem>.raw.yuv`` (ground
truth) and ``<stem>.qp`` (the sidecar; its QP column describes the
compressed stream).

A batch sample is a square crop of a few consecutive frames, the same
window and crop from both streams, with flip/rotation augmentation applied
to input and target identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .errors import DataError
from .formats import read_sidecar, read_y_planes


@dataclass
class ClipPair:
    name: str
    comp: np.ndarray  # (T, H, W) float32 compressed luma
    raw: np.ndarray  # (T, H, W) float32 ground-truth luma
    qps: list

    def __post_init__(self):
        if self.comp.shape != self.raw.shape:
            raise DataError(
                f"{self.name}: compressed/raw shapes differ: "
                f"{self.comp.shape} vs {self.raw.shape}"
            )
        if self.comp.ndim != 3:
            raise DataError(f"{self.name}: clips must be (T, H, W), got {self.comp.shape}")
        if len(self.qps) != self.comp.shape[0]:
            raise DataError(
                f"{self.name}: {len(self.qps)} QP values for {self.comp.shape[0]} frames"
            )


def load_clip_dir(data_dir) -> list[ClipPair]:
    """Load every ``<stem>.qp`` + ``.comp.yuv`` + ``.raw.yuv`` triple."""
    root = Path(data_dir)
    if not root.is_dir():
        raise DataError(f"data directory {data_dir} does not exist")
    pairs = []
    for sidecar in sorted(root.glob("*.qp")):
        stem = sidecar.name[: -len(".qp")]
        comp_path = root / f"{stem}.comp.yuv"
        raw_path = root / f"{stem}.raw.yuv"
        for p in (comp_path, raw_path):
            if not p.exists():
                raise DataError(f"clip {stem!r} is missing {p.name}")
        w, h, n, qps = read_sidecar(sidecar)
        pairs.append(
            ClipPair(
                stem,
                read_y_planes(comp_path, w, h, n),
                read_y_planes(raw_path, w, h, n),
                qps,
            )
        )
    if not pairs:
        raise DataError(f"no clip pairs (*.qp) found under {data_dir}")
    return pairs


def augment_pair(comp: np.ndarray, raw: np.ndarray, k: int, flip: bool):
    """Rotate by k*90 degrees and optionally mirror, both clips identically."""
    if k:
        comp = np.rot90(comp, k, axes=(1, 2))
        raw = np.rot90(raw, k, axes=(1, 2))
    if flip:
        comp = comp[:, :, ::-1]
        raw = raw[:, :, ::-1]
    return np.ascontiguousarray(comp), np.ascontiguousarray(raw)


def sample_batch(pairs: list, rng: np.random.Generator, crop: int, batch: int, frames: int):
    """Draw a (comp, raw, qps) batch of augmented clip windows.

    Returns float32 torch tensors (B, T, c, c) for both streams and an
    integer array (B, T) of the window's QP values.  The crop side is
    clamped to the smallest clip dimension so the configured default works
    on any clip.
    """
    usable = [p for p in pairs if p.comp.shape[0] >= frames]
    if not usable:
        raise DataError(f"no clip has the {frames} frames a sample needs")
    side = min([crop] + [min(p.comp.shape[1], p.comp.shape[2]) for p in usable])
    comp_out = np.empty((batch, frames, side, side), dtype=np.float32)
    raw_out = np.empty((batch, frames, side, side), dtype=np.float32)
    qps_out = np.empty((batch, frames), dtype=np.int64)
    for b in range(batch):
        p = usable[rng.integers(len(usable))]
        t_count, hh, ww = p.comp.shape
        t0 = int(rng.integers(t_count - frames + 1))
        r0 = int(rng.integers(hh - side + 1))
        c0 = int(rng.integers(ww - side + 1))
        comp = p.comp[t0 : t0 + frames, r0 : r0 + side, c0 : c0 + side]
        raw = p.raw[t0 : t0 + frames, r0 : r0 + side, c0 : c0 + side]
        comp, raw = augment_pair(comp, raw, int(rng.integers(4)), bool(rng.integers(2)))
        comp_out[b], raw_out[b] = comp, raw
        qps_out[b] = p.qps[t0 : t0 + frames]
    return torch.from_numpy(comp_out), torch.from_numpy(raw_out), qps_out
