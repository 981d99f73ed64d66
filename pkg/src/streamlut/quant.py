"""Learnable-step quantization and the MSB/LSB index split.

A plane is quantized by dividing by the step ``s``, clipping to
``[-q_n, q_p]`` and rounding to the nearest integer with ties away from
zero.  The resulting integers are the indices used for table storage and
retrieval; ``dequantize`` maps them back to the input scale as ``index * s``.

For 8-bit image-domain inputs the default parameters are ``s=1, q_n=0,
q_p=255``, which makes the index space exactly the 256-level lattice the
look-up tables are sampled on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, NumericError

VALID_INTERVALS = (2, 4, 8, 16, 32, 64, 128)


@dataclass(frozen=True)
class QuantParams:
    s: float = 1.0
    q_n: int = 0
    q_p: int = 255

    def __post_init__(self):
        if not (self.s > 0) or not np.isfinite(self.s):
            raise ConfigError(f"quantization step must be positive, got {self.s}")
        if self.q_n < 0:
            raise ConfigError(f"q_n must be non-negative, got {self.q_n}")
        if self.q_p <= -self.q_n:
            raise ConfigError(f"empty clip range [-{self.q_n}, {self.q_p}]")


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero (unlike numpy's bankers)."""
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    return np.trunc(x + np.copysign(np.asarray(0.5, dtype=x.dtype), x))


def quantize(x: np.ndarray, p: QuantParams) -> np.ndarray:
    """Map a float plane to integer indices: round(clip(x / s, -q_n, q_p))."""
    x = np.asarray(x, dtype=np.float32)
    bad = ~np.isfinite(x)
    if bad.any():
        where = np.argwhere(bad)[0]
        raise NumericError(f"non-finite sample at {tuple(int(i) for i in where)}")
    v = np.clip(x / np.float32(p.s), np.float32(-p.q_n), np.float32(p.q_p))
    return round_half_away(v).astype(np.int32)


def dequantize(q: np.ndarray, p: QuantParams) -> np.ndarray:
    """Map integer indices back to the input scale: q * s."""
    q = np.asarray(q)
    if q.size and (q.min() < -p.q_n or q.max() > p.q_p):
        raise DataError(f"index outside [-{p.q_n}, {p.q_p}]")
    return q.astype(np.float32) * np.float32(p.s)


def index_split(v, interval: int):
    """Split 8-bit indices into lattice coordinate (MSB) and fraction (LSB).

    ``v = msb * interval + lsb`` with ``msb = v // interval``.  Accepts
    scalars or integer arrays; values must lie in [0, 255].
    """
    if interval not in VALID_INTERVALS:
        raise ConfigError(f"interval must be one of {VALID_INTERVALS}, got {interval}")
    v = np.asarray(v)
    if not np.issubdtype(v.dtype, np.integer):
        raise DataError(f"indices must be integers, got dtype {v.dtype}")
    if v.size and (v.min() < 0 or v.max() > 255):
        raise DataError("index outside [0, 255]")
    return v // interval, v % interval
