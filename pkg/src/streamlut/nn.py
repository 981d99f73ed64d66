"""Deterministic convolutional forward-pass kernels and the weights container.

Tensors are plain ``numpy`` arrays: a feature map is float32 with shape
(C, H, W), a single-channel plane is float32 with shape (H, W).  Everything
here is a pure function of (input, parameters); repeated calls produce
bit-identical outputs.

The shared feature extractor (``mafe_forward``) pools the luma plane down 2x
and runs an 11-layer 3x3 conv stack at 32 channels; its output is reused by
the propagation, alignment and enhancement stages so the expensive feature
extraction happens once per frame.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    BadMagicError,
    BadVersionError,
    ConfigError,
    DuplicateNameError,
    NumericError,
    TruncatedFileError,
)

WEIGHTS_MAGIC = b"STWT"
WEIGHTS_VERSION = 1

MAFE_CHANNELS = 32
MAFE_LAYERS = 11


@dataclass(frozen=True)
class ConvSpec:
    """Static configuration of one convolution layer.

    ``padding="replicate"`` edge-pads so that with stride 1 the output keeps
    the input's spatial size; ``"none"`` is a valid (shrinking) convolution.
    """

    in_channels: int
    out_channels: int
    kernel_h: int
    kernel_w: int
    stride: int = 1
    dilation: int = 1
    padding: str = "replicate"

    def __post_init__(self):
        if self.stride < 1 or self.dilation < 1:
            raise ConfigError(f"stride/dilation must be >= 1, got {self.stride}/{self.dilation}")
        if self.padding not in ("replicate", "none"):
            raise ConfigError(f"unknown padding mode {self.padding!r}")


class WeightStore:
    """Ordered, immutable map from tensor name to float32 parameter block."""

    def __init__(self, tensors: dict[str, np.ndarray] | None = None):
        self._tensors: dict[str, np.ndarray] = {}
        for name, arr in (tensors or {}).items():
            self.add(name, arr)

    def add(self, name: str, arr: np.ndarray) -> None:
        if name in self._tensors:
            raise DuplicateNameError(f"duplicate tensor name {name!r}")
        a = np.array(arr, dtype=np.float32, order="C")
        a.flags.writeable = False
        self._tensors[name] = a

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._tensors[name]
        except KeyError:
            raise ConfigError(f"missing parameter {name!r}") from None

    def get(self, name: str, default=None):
        return self._tensors.get(name, default)

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    def __len__(self) -> int:
        return len(self._tensors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightStore):
            return NotImplemented
        if self.names() != other.names():
            return False
        return all(
            a.shape == other[n].shape and np.array_equal(a, other[n], equal_nan=True)
            for n, a in self.items()
        )

    def conv_params(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """Return the (weight, bias) pair stored as ``name.weight`` / ``name.bias``."""
        return self[name + ".weight"], self[name + ".bias"]


def conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """Cross-correlate a (C, H, W) tensor with an (O, C, kh, kw) kernel.

    Accumulation happens in float32 through a single tensordot per call, so
    the reduction order is fixed and outputs are reproducible bit-for-bit.
    """
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 3 or x.shape[0] != spec.in_channels:
        raise ConfigError(
            f"input shape {x.shape} does not match in_channels={spec.in_channels}"
        )
    want_w = (spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w)
    if weight.shape != want_w:
        raise ConfigError(f"weight shape {weight.shape}, expected {want_w}")
    if bias.shape != (spec.out_channels,):
        raise ConfigError(f"bias shape {bias.shape}, expected ({spec.out_channels},)")

    kh_eff = spec.dilation * (spec.kernel_h - 1) + 1
    kw_eff = spec.dilation * (spec.kernel_w - 1) + 1
    if spec.padding == "replicate":
        pt = (kh_eff - 1) // 2
        pb = kh_eff - 1 - pt
        pl = (kw_eff - 1) // 2
        pr = kw_eff - 1 - pl
        x = np.pad(x, ((0, 0), (pt, pb), (pl, pr)), mode="edge")
    if x.shape[1] < kh_eff or x.shape[2] < kw_eff:
        raise ConfigError(f"input {x.shape} smaller than effective kernel {kh_eff}x{kw_eff}")

    win = sliding_window_view(x, (kh_eff, kw_eff), axis=(1, 2))
    win = win[:, :: spec.stride, :: spec.stride, :: spec.dilation, :: spec.dilation]
    out = np.tensordot(
        weight.astype(np.float32, copy=False), win, axes=([1, 2, 3], [0, 3, 4])
    )
    out += bias.astype(np.float32, copy=False)[:, None, None]
    out = np.ascontiguousarray(out, dtype=np.float32)
    if not np.isfinite(out).all():
        raise NumericError("conv2d produced non-finite values")
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, np.float32(0.0))


def pixel_shuffle(x: np.ndarray, r: int) -> np.ndarray:
    """Rearrange (C, H, W) to (C/r^2, H*r, W*r); inverse of space-to-depth."""
    c, h, w = x.shape
    if r < 1 or c % (r * r) != 0:
        raise ConfigError(f"channels {c} not divisible by r^2 = {r * r}")
    out = x.reshape(c // (r * r), r, r, h, w)
    out = out.transpose(0, 3, 1, 4, 2)
    return np.ascontiguousarray(out.reshape(c // (r * r), h * r, w * r))


def pixel_unshuffle(x: np.ndarray, r: int) -> np.ndarray:
    """Inverse of :func:`pixel_shuffle`."""
    c, h, w = x.shape
    if h % r != 0 or w % r != 0:
        raise ConfigError(f"spatial size {h}x{w} not divisible by r={r}")
    out = x.reshape(c, h // r, r, w // r, r)
    out = out.transpose(0, 2, 4, 1, 3)
    return np.ascontiguousarray(out.reshape(c * r * r, h // r, w // r))


def downsample2x(x: np.ndarray) -> np.ndarray:
    """2x2 mean pooling on a (C, H, W) tensor, replicate-padding odd sizes."""
    c, h, w = x.shape
    if h % 2 or w % 2:
        x = np.pad(x, ((0, 0), (0, h % 2), (0, w % 2)), mode="edge")
        h, w = x.shape[1:]
    return x.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4), dtype=np.float32)


def mafe_forward(y_plane: np.ndarray, weights: WeightStore) -> np.ndarray:
    """Shared feature extraction: 2x mean-pool then 11 conv3x3/relu layers.

    Input is the (H, W) luma plane in [0, 255]; output is a float32
    (32, H/2, W/2) feature tensor.  relu follows every layer except the last.
    """
    t = downsample2x(np.asarray(y_plane, dtype=np.float32)[None])
    c_in = 1
    for i in range(MAFE_LAYERS):
        w, b = weights.conv_params(f"mafe.{i}")
        spec = ConvSpec(c_in, MAFE_CHANNELS, 3, 3)
        t = conv2d(t, w, b, spec)
        if i < MAFE_LAYERS - 1:
            t = relu(t)
        c_in = MAFE_CHANNELS
    return t


def save_weights(store: WeightStore, path) -> None:
    """Write a weight store to the little-endian "STWT" container."""
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<II", WEIGHTS_VERSION, len(store)))
        for name, arr in store.items():
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f4", copy=False).tobytes())


def load_weights(path) -> WeightStore:
    """Read an "STWT" weights file, validating magic, version and payload size."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != WEIGHTS_MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {WEIGHTS_MAGIC!r}")
    if len(data) < 12:
        raise TruncatedFileError("weights file shorter than fixed header")
    version, count = struct.unpack_from("<II", data, 4)
    if version != WEIGHTS_VERSION:
        raise BadVersionError(f"unsupported weights version {version}")
    off = 12
    store = WeightStore()
    for _ in range(count):
        if off + 4 > len(data):
            raise TruncatedFileError("truncated tensor header")
        (nlen,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + nlen + 4 > len(data):
            raise TruncatedFileError("truncated tensor name")
        name = data[off : off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + 4 * rank > len(data):
            raise TruncatedFileError(f"truncated dims for tensor {name!r}")
        dims = struct.unpack_from(f"<{rank}I", data, off)
        off += 4 * rank
        n = int(np.prod(dims, dtype=np.int64)) if rank else 1
        if off + 4 * n > len(data):
            raise TruncatedFileError(
                f"tensor {name!r} declares {n} floats but payload ends early"
            )
        arr = np.frombuffer(data[off : off + 4 * n], dtype="<f4").reshape(dims)
        off += 4 * n
        if name in store:
            raise DuplicateNameError(f"duplicate tensor name {name!r}")
        store.add(name, arr)
    return store
