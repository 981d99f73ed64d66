"""Offset prediction and deformable gathering of reference frames.

A small network predicts, per output pixel, nine fractional displacements
relative to a fixed 3x3 base grid; bilinear sampling at the displaced
coordinates gathers nine correlated reference pixels per output pixel and
tiles them into a 3H x 3W plane (the 3x3 block at (3r, 3c) belongs to output
pixel (r, c)).  This stands in for optical-flow alignment at a fraction of
the cost.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .nn import ConvSpec, WeightStore, conv2d, pixel_shuffle, relu

OFFSET_LAYERS = 4

# Base grid displacements, row-major over the 3x3 neighborhood: slot k
# samples at (r + BASE_GRID[k, 0] + dy_k, c + BASE_GRID[k, 1] + dx_k).
BASE_GRID = np.array(
    [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)], dtype=np.float32
)


def predict_offsets(feat_cur: np.ndarray, feat_ref: np.ndarray, weights: WeightStore) -> np.ndarray:
    """Run the offset head on concatenated features.

    Both features are (32, H/2, W/2); the result is (18, H, W): nine
    (dy, dx) pairs per pixel, slot-major, so channel 2k is dy and channel
    2k+1 is dx for base-grid slot k.  The final layer is linear (offsets
    are signed) and pixel shuffle restores full resolution.
    """
    if feat_cur.shape != feat_ref.shape:
        raise DataError(
            f"feature shapes differ: {feat_cur.shape} vs {feat_ref.shape}"
        )
    if feat_cur.ndim != 3 or feat_cur.shape[0] != 32:
        raise DataError(f"features must be (32, h, w), got {feat_cur.shape}")
    h = np.concatenate([feat_cur, feat_ref], axis=0).astype(np.float32, copy=False)
    for i in range(OFFSET_LAYERS):
        w, b = weights.conv_params(f"offset.{i}")
        spec = ConvSpec(w.shape[1], w.shape[0], w.shape[2], w.shape[3])
        h = conv2d(h, w, b, spec)
        if i < OFFSET_LAYERS - 1:
            h = relu(h)
    return pixel_shuffle(h, 2)


def bilinear_sample(plane: np.ndarray, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Sample ``plane`` at fractional coordinates, clamped to the frame.

    Clamping the coordinates (rather than zero-filling) makes out-of-frame
    samples replicate the border, so integer coordinates always reduce to an
    exact pixel gather.
    """
    hh, ww = plane.shape
    y = np.clip(y, 0.0, hh - 1.0)
    x = np.clip(x, 0.0, ww - 1.0)
    y0 = np.floor(y).astype(np.int64)
    x0 = np.floor(x).astype(np.int64)
    y1 = np.minimum(y0 + 1, hh - 1)
    x1 = np.minimum(x0 + 1, ww - 1)
    fy = (y - y0).astype(np.float32)
    fx = (x - x0).astype(np.float32)
    top = plane[y0, x0] * (1.0 - fx) + plane[y0, x1] * fx
    bot = plane[y1, x0] * (1.0 - fx) + plane[y1, x1] * fx
    return (top * (1.0 - fy) + bot * fy).astype(np.float32)


def deform(ref: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Gather a reference plane into its 3H x 3W deformed layout."""
    if ref.ndim != 2:
        raise DataError(f"reference plane must be 2-D, got shape {ref.shape}")
    hh, ww = ref.shape
    if offsets.shape != (18, hh, ww):
        raise DataError(
            f"offsets must be (18, {hh}, {ww}), got {offsets.shape}"
        )
    ref = ref.astype(np.float32, copy=False)
    rows = np.arange(hh, dtype=np.float32)[:, None]
    cols = np.arange(ww, dtype=np.float32)[None, :]
    out = np.empty((3 * hh, 3 * ww), dtype=np.float32)
    for k in range(9):
        yy = rows + BASE_GRID[k, 0] + offsets[2 * k]
        xx = cols + BASE_GRID[k, 1] + offsets[2 * k + 1]
        out[k // 3 :: 3, k % 3 :: 3] = bilinear_sample(ref, yy, xx)
    return out
