"""D-dimensional sampled-lattice look-up tables with simplex interpolation.

A table samples a function of D 8-bit inputs on a lattice with spacing
``interval`` (a power of two), storing one float32 per lattice point in
lexicographic order; side length is ``L = 256 / interval + 1`` so the probe
value 256 itself is a lattice point and interpolation never clamps.

Queries use the simplex (tetrahedral) scheme: the LSBs of the query select
one of the D! simplices of the containing lattice cell by descending sort,
and the result is a convex combination of the D+1 bounding vertices.  This
costs D+1 table reads per query instead of the 2^D reads of multilinear
interpolation, which is what makes table retrieval cheaper than running the
network it replaced.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    BadVersionError,
    ConfigError,
    DataError,
    NumericError,
    TruncatedFileError,
)
from .quant import VALID_INTERVALS, index_split

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, belt and braces
    _HAVE_NUMBA = False

LUT_MAGIC = b"STLT"
LUT_VERSION = 1

KIND_CODES = {"s": 0, "t1": 1, "t2": 2}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}

# (dims, interval) defaults per table kind: the spatial and corner tables
# index 4 pixels at interval 4; the temporal-pair table indexes 6 pixels and
# needs the coarser interval 16 to stay storable.
DEFAULT_SPECS = {"s": (4, 4), "t1": (6, 16), "t2": (4, 4)}


@dataclass(frozen=True)
class LutSpec:
    kind: str
    dims: int
    interval: int

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ConfigError(f"kind must be one of {sorted(KIND_CODES)}, got {self.kind!r}")
        if self.dims < 1:
            raise ConfigError(f"dims must be positive, got {self.dims}")
        if self.interval not in VALID_INTERVALS:
            raise ConfigError(
                f"interval must be one of {VALID_INTERVALS}, got {self.interval}"
            )
        # 2^28 float32 entries is a 1 GiB table; anything above that is a
        # misconfiguration, not a plausible deployment.
        if self.side**self.dims > 1 << 28:
            raise ConfigError(
                f"table with dims={self.dims} interval={self.interval} would hold "
                f"{self.side**self.dims} entries; refusing tables over {1 << 28}"
            )

    @property
    def side(self) -> int:
        return 256 // self.interval + 1

    @property
    def entries(self) -> int:
        return self.side**self.dims

    @classmethod
    def default(cls, kind: str) -> "LutSpec":
        dims, interval = DEFAULT_SPECS[kind]
        return cls(kind, dims, interval)


@dataclass
class LookupTable:
    spec: LutSpec
    values: np.ndarray  # flat float32, length side**dims, lexicographic order

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32).reshape(-1)
        if self.values.size != self.spec.entries:
            raise ConfigError(
                f"table has {self.values.size} entries, spec wants {self.spec.entries}"
            )

    def grid(self) -> np.ndarray:
        """The values as a read-only (L, ..., L) D-dimensional view."""
        g = self.values.reshape((self.spec.side,) * self.spec.dims)
        g.flags.writeable = False
        return g


def lut_size_bytes(spec: LutSpec) -> int:
    """Payload size of one table: 4 bytes per lattice entry."""
    return 4 * spec.entries


def build_lut(oracle, spec: LutSpec, chunk: int = 1 << 20) -> LookupTable:
    """Enumerate the whole lattice through ``oracle`` and freeze the outputs.

    ``oracle`` maps a float32 (N, D) batch of input values (each coordinate a
    multiple of the interval, in [0, 256]) to (N,) float residuals.  Points
    are enumerated in lexicographic order, chunked to bound peak memory; the
    result is independent of the chunk size.
    """
    side, dims = spec.side, spec.dims
    total = spec.entries
    values = np.empty(total, dtype=np.float32)
    scale = np.float32(spec.interval)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.unravel_index(np.arange(start, stop, dtype=np.int64), (side,) * dims)
        pts = np.stack(idx, axis=1).astype(np.float32) * scale
        out = np.asarray(oracle(pts), dtype=np.float32).reshape(-1)
        if out.shape[0] != stop - start:
            raise ConfigError(
                f"oracle returned {out.shape[0]} values for {stop - start} points"
            )
        bad = ~np.isfinite(out)
        if bad.any():
            at = int(np.argmax(bad))
            coord = tuple(int(ax[at]) for ax in idx)
            raise NumericError(f"oracle returned non-finite value at lattice {coord}")
        values[start:stop] = out
    return LookupTable(spec, values)


def _simplex_loop(values, v, interval, side, dims, out):
    # Scalar walk, one query per row of v.  Kept in strict IEEE float32 with
    # a fixed accumulation order so the jitted and vectorized paths agree
    # bit for bit.
    strides = np.empty(dims, dtype=np.int64)
    s = 1
    for d in range(dims - 1, -1, -1):
        strides[d] = s
        s *= side
    lsb = np.empty(dims, dtype=np.int64)
    order = np.empty(dims, dtype=np.int64)
    inv = np.float32(interval)
    for i in range(v.shape[0]):
        flat = 0
        for d in range(dims):
            val = np.int64(v[i, d])
            lsb[d] = val % interval
            flat += (val // interval) * strides[d]
        # Insertion sort: descending LSB, ties keep ascending dimension
        # order (strict comparison makes it stable).
        for d in range(dims):
            order[d] = d
        for a in range(1, dims):
            key = order[a]
            kl = lsb[key]
            b = a - 1
            while b >= 0 and lsb[order[b]] < kl:
                order[b + 1] = order[b]
                b -= 1
            order[b + 1] = key
        acc = np.float32(interval - lsb[order[0]]) * values[flat]
        for k in range(dims):
            flat += strides[order[k]]
            if k + 1 < dims:
                w = np.float32(lsb[order[k]] - lsb[order[k + 1]])
            else:
                w = np.float32(lsb[order[dims - 1]])
            acc += w * values[flat]
        out[i] = acc / inv
    return out


if _HAVE_NUMBA:
    _simplex_loop_jit = njit(cache=True, fastmath=False)(_simplex_loop)
else:  # pragma: no cover
    _simplex_loop_jit = None


def _query_simplex_vectorized(lut: LookupTable, msb, lsb) -> np.ndarray:
    spec = lut.spec
    # Descending LSB sort; stable argsort of the negated keys keeps ties in
    # ascending dimension order.
    order = np.argsort(-lsb, axis=-1, kind="stable")
    lsb_sorted = np.take_along_axis(lsb, order, axis=-1)

    dims, side = spec.dims, spec.side
    strides = side ** np.arange(dims - 1, -1, -1, dtype=np.int64)
    flat = (msb.astype(np.int64) * strides).sum(axis=-1)

    w = np.empty(msb.shape[:-1] + (dims + 1,), dtype=np.float32)
    w[..., 0] = spec.interval - lsb_sorted[..., 0]
    w[..., 1:dims] = lsb_sorted[..., :-1] - lsb_sorted[..., 1:]
    w[..., dims] = lsb_sorted[..., -1]

    acc = w[..., 0] * lut.values[flat]
    for k in range(dims):
        flat = flat + strides[order[..., k]]
        acc = acc + w[..., k + 1] * lut.values[flat]
    return (acc / np.float32(spec.interval)).astype(np.float32)


def query_simplex(lut: LookupTable, v: np.ndarray) -> np.ndarray:
    """Interpolate the table at integer inputs in [0, 255].

    ``v`` has shape (..., D); the result drops the last axis.  Per query the
    D+1 simplex vertices are found by sorting the LSBs in descending order
    (ties broken by ascending dimension index) and the weights partition the
    interval exactly, so lattice-aligned inputs return stored values with
    zero error.

    Dispatches to a compiled scalar loop when available; the vectorized
    fallback produces bit-identical results (same accumulation order).
    """
    spec = lut.spec
    v = np.asarray(v)
    if v.shape == () or v.shape[-1] != spec.dims:
        raise DataError(
            f"query needs a trailing axis of {spec.dims} coordinates, got shape {v.shape}"
        )
    if not np.issubdtype(v.dtype, np.integer):
        raise DataError(f"query values must be integers, got dtype {v.dtype}")
    if v.size and (v.min() < 0 or v.max() > 255):
        raise DataError("query values outside [0, 255]; quantize inputs first")
    lead = v.shape[:-1]
    if _simplex_loop_jit is not None:
        flat_v = np.ascontiguousarray(v.reshape(-1, spec.dims), dtype=np.int32)
        out = np.empty(flat_v.shape[0], dtype=np.float32)
        _simplex_loop_jit(lut.values, flat_v, spec.interval, spec.side, spec.dims, out)
        return out.reshape(lead)
    msb, lsb = index_split(v, spec.interval)  # pragma: no cover
    return _query_simplex_vectorized(lut, msb, lsb)  # pragma: no cover


def save_lut(lut: LookupTable, path) -> None:
    """Write the little-endian "STLT" container: 12-byte header then payload."""
    spec = lut.spec
    with open(path, "wb") as fh:
        fh.write(LUT_MAGIC)
        fh.write(struct.pack("<I", LUT_VERSION))
        fh.write(struct.pack("<BBBB", KIND_CODES[spec.kind], spec.dims, spec.interval, 0))
        fh.write(lut.values.astype("<f4", copy=False).tobytes())


LUT_FILENAMES = {kind: f"{kind}.stlt" for kind in KIND_CODES}


def load_luts(directory) -> dict:
    """Load the three tables from their conventional filenames in a directory."""
    return {
        kind: load_lut(os.path.join(directory, name))
        for kind, name in LUT_FILENAMES.items()
    }


def load_lut(path) -> LookupTable:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != LUT_MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {LUT_MAGIC!r}")
    if len(data) < 12:
        raise TruncatedFileError("LUT file shorter than fixed header")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != LUT_VERSION:
        raise BadVersionError(f"unsupported LUT version {version}")
    kind_code, dims, interval, _ = struct.unpack_from("<BBBB", data, 8)
    if kind_code not in KIND_NAMES:
        raise DataError(f"unknown table kind code {kind_code}")
    spec = LutSpec(KIND_NAMES[kind_code], dims, interval)
    payload = data[12:]
    if len(payload) != 4 * spec.entries:
        raise TruncatedFileError(
            f"payload is {len(payload)} bytes, spec {spec} wants {4 * spec.entries}"
        )
    return LookupTable(spec, np.frombuffer(payload, dtype="<f4"))
