"""Raw planar YUV420 8-bit stream I/O plus the per-frame QP sidecar.

The video container is headerless: dimensions, frame count and pixel format
live in a text sidecar whose first line is ``width height frame_count`` and
whose remaining lines carry one integer QP per frame.  Only the luma plane
is enhanced, so Y is handed out as float32 while chroma stays as raw bytes
for passthrough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .quant import round_half_away

PIXEL_FORMAT = "yuv420p-8bit"


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    frame_count: int
    pixel_format: str = PIXEL_FORMAT

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"bad dimensions {self.width}x{self.height}")
        if self.width % 2 or self.height % 2:
            raise DataError(
                f"dimensions must be even for 4:2:0 chroma, got {self.width}x{self.height}"
            )
        if self.frame_count <= 0:
            raise DataError(f"frame_count must be positive, got {self.frame_count}")
        if self.pixel_format != PIXEL_FORMAT:
            raise DataError(f"unknown pixel format {self.pixel_format!r}")

    @property
    def frame_bytes(self) -> int:
        return self.width * self.height * 3 // 2


def read_sidecar(path) -> tuple[StreamHeader, list[int]]:
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
    header = StreamHeader(width, height, frame_count)
    if len(qps) != frame_count:
        raise DataError(
            f"sidecar lists {len(qps)} QP values for {frame_count} frames"
        )
    return header, qps


def write_sidecar(path, header: StreamHeader, qps) -> None:
    qps = list(qps)
    if len(qps) != header.frame_count:
        raise DataError(f"{len(qps)} QP values for {header.frame_count} frames")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{header.width} {header.height} {header.frame_count}\n")
        for qp in qps:
            fh.write(f"{int(qp)}\n")


def read_stream(video_path, sidecar_path):
    """Yield (y float32 HxW, u uint8, v uint8, qp) per frame, display order."""
    header, qps = read_sidecar(sidecar_path)
    data = np.fromfile(video_path, dtype=np.uint8)
    expected = header.frame_bytes * header.frame_count
    if data.size != expected:
        raise DataError(
            f"{video_path} holds {data.size} bytes, sidecar implies {expected}"
        )
    w, h = header.width, header.height
    y_len, c_len = w * h, (w // 2) * (h // 2)
    for i in range(header.frame_count):
        base = i * header.frame_bytes
        y = data[base : base + y_len].reshape(h, w).astype(np.float32)
        u = data[base + y_len : base + y_len + c_len].reshape(h // 2, w // 2)
        v = data[base + y_len + c_len : base + header.frame_bytes].reshape(h // 2, w // 2)
        yield y, u.copy(), v.copy(), qps[i]


def write_stream(path, frames) -> None:
    """Write (y uint8, u uint8, v uint8) triples as raw planar 4:2:0."""
    with open(path, "wb") as fh:
        for y, u, v in frames:
            for plane in (y, u, v):
                plane = np.asarray(plane)
                if plane.dtype != np.uint8:
                    raise DataError(f"planes must be uint8, got {plane.dtype}")
                fh.write(plane.tobytes())


def encode_y(y: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round to the nearest 8-bit level.

    The only place enhancement output leaves floating point; ties round
    away from zero, matching the quantizer.
    """
    return round_half_away(np.clip(y, 0.0, 255.0)).astype(np.uint8)
