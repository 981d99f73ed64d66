"""File formats shared with the enhancement engine.

The trainer talks to the engine exclusively through files, so the three
formats are implemented here independently: the raw planar YUV420 stream,
its text sidecar (``width height frame_count`` then one QP per line), and
the "STWT" little-endian weights container the engine loads.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DataError

WEIGHTS_MAGIC = b"STWT"
WEIGHTS_VERSION = 1


def read_sidecar(path) -> tuple[int, int, int, list[int]]:
    """Parse a sidecar into (width, height, frame_count, qps)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataError(f"empty sidecar {path}")
    head = lines[0].split()
    if len(head) != 3:
        raise DataError(
            f"sidecar first line must be 'width height frame_count', got {lines[0]!r}"
        )
    try:
        width, height, frame_count = (int(t) for t in head)
        qps = [int(ln) for ln in lines[1:]]
    except ValueError as e:
        raise DataError(f"sidecar {path} has a non-integer field: {e}") from e
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise DataError(f"bad dimensions {width}x{height}")
    if frame_count <= 0:
        raise DataError(f"frame_count must be positive, got {frame_count}")
    if len(qps) != frame_count:
        raise DataError(f"sidecar lists {len(qps)} QP values for {frame_count} frames")
    return width, height, frame_count, qps


def read_y_planes(video_path, width: int, height: int, frame_count: int) -> np.ndarray:
    """Luma planes of a raw 4:2:0 stream as float32 (frames, H, W).

    Chroma is skipped: training targets and inputs are luma only, matching
    the engine's passthrough of U/V.
    """
    frame_bytes = width * height * 3 // 2
    data = np.fromfile(video_path, dtype=np.uint8)
    expected = frame_bytes * frame_count
    if data.size != expected:
        raise DataError(
            f"{video_path} holds {data.size} bytes, sidecar implies {expected}"
        )
    y_len = width * height
    out = np.empty((frame_count, height, width), dtype=np.float32)
    for i in range(frame_count):
        base = i * frame_bytes
        out[i] = data[base : base + y_len].reshape(height, width)
    return out


def save_weights(path, tensors: dict[str, np.ndarray]) -> None:
    """Write named float32 tensors to the "STWT" container the engine reads.

    Layout per tensor: u32 name length, UTF-8 name, u32 ndim, u32 dims,
    little-endian float32 payload; preceded by the 4-byte magic, u32
    version and u32 tensor count.
    """
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<II", WEIGHTS_VERSION, len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype=np.float32)
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f4", copy=False).tobytes())
