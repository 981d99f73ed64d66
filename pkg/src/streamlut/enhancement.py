"""Residual enhancement: spatial compensation, table queries, fusion.

Three residual paths feed the output: a spatial table indexed by 2x2 pixel
patterns of the current frame (averaged over a 4-rotation ensemble, which
widens the receptive field to 3x3 without growing the table), a temporal
table indexed by center/neighbor pairs drawn from the current and two
deformed reference planes, and a second temporal table indexed by the
corners of each deformed 3x3 patch.  Each table is the exhaustive
enumeration of a small network over its input lattice, so the network
itself (`enhance_direct`) doubles as the construction oracle and the
equivalence baseline.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError
from .lut import LookupTable, LutSpec, build_lut, query_simplex
from .nn import ConvSpec, WeightStore, conv2d, pixel_shuffle, relu

NET_KINDS = ("s", "t1", "t2")
NET_DIMS = {"s": 4, "t1": 6, "t2": 4}
FIRST_CONV_SHAPES = {"s": (32, 1, 2, 2), "t1": (32, 3, 2, 1), "t2": (32, 1, 2, 2)}
NET_LAYERS = 11  # patch conv + nine 1x1 hidden layers + 1x1 output layer

# Neighbor displacements (dr, dc) per rotation step j, in gather-column
# order (anchor, side a, side b, diagonal).  j=0 reads right/down/diag;
# each step rotates the pattern 90 degrees counter-clockwise about the
# anchor pixel.
ROT_STEPS = (
    ((0, 1), (1, 0), (1, 1)),
    ((-1, 0), (0, 1), (-1, 1)),
    ((0, -1), (-1, 0), (-1, -1)),
    ((1, 0), (0, -1), (1, -1)),
)

# Center-to-neighbor displacement per rotation step of the temporal pair
# pattern: down, right, up, left.
T1_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


class EnhancementNet:
    """The small per-patch network a table kind is enumerated from.

    Operates as an MLP over (N, D) index matrices: the kind-specific first
    convolution collapses to a (32, D) matrix over the gathered index
    pixels, and every later layer is 1x1 (position-independent).
    ``input_scales`` undoes quantization per column, so the net consumes
    integer indices directly and agrees with table queries for any step
    size.
    """

    def __init__(self, kind: str, layers, input_scales):
        if kind not in NET_KINDS:
            raise ConfigError(f"kind must be one of {NET_KINDS}, got {kind!r}")
        self.kind = kind
        self.dims = NET_DIMS[kind]
        self.layers = [
            (np.ascontiguousarray(w, dtype=np.float32), np.ascontiguousarray(b, dtype=np.float32))
            for w, b in layers
        ]
        self.input_scales = np.ascontiguousarray(input_scales, dtype=np.float32)
        if len(self.layers) != NET_LAYERS:
            raise ConfigError(f"need {NET_LAYERS} layers, got {len(self.layers)}")
        if self.layers[0][0].shape != (32, self.dims):
            raise ConfigError(
                f"first layer must be (32, {self.dims}), got {self.layers[0][0].shape}"
            )
        for w, b in self.layers:
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ConfigError("layer weight must be 2-D with matching bias")
        if self.layers[-1][0].shape[0] != 1:
            raise ConfigError("final layer must emit a single residual channel")
        if self.input_scales.shape != (self.dims,):
            raise ConfigError(
                f"input_scales must have shape ({self.dims},), got {self.input_scales.shape}"
            )

    @classmethod
    def from_weights(
        cls, kind: str, weights: WeightStore, s_input: float = 1.0, s_ref: float = 1.0
    ) -> "EnhancementNet":
        """Assemble from conv-shaped tensors named ``net_<kind>.0 .. .10``.

        The first conv tensor keeps its native 4-D shape in the file; its
        C-order flattening is exactly the gather-column order used by the
        query paths.
        """
        expected = FIRST_CONV_SHAPES[kind]
        w0 = weights[f"net_{kind}.0.weight"]
        if w0.shape != expected:
            raise ConfigError(
                f"net_{kind}.0.weight must have shape {expected}, got {w0.shape}"
            )
        layers = [(w0.reshape(32, -1), weights[f"net_{kind}.0.bias"])]
        for i in range(1, NET_LAYERS):
            w = weights[f"net_{kind}.{i}.weight"]
            out_c = 1 if i == NET_LAYERS - 1 else 32
            if w.shape != (out_c, 32, 1, 1):
                raise ConfigError(
                    f"net_{kind}.{i}.weight must have shape ({out_c}, 32, 1, 1), got {w.shape}"
                )
            layers.append((w.reshape(out_c, 32), weights[f"net_{kind}.{i}.bias"]))
        return cls(kind, layers, input_scales_for(kind, s_input, s_ref))

    def forward(self, x: np.ndarray, chunk: int = 1 << 20) -> np.ndarray:
        """(N, D) index-space inputs to (N,) residuals, chunked for memory."""
        x = np.asarray(x, dtype=np.float32)
        if x.ndim != 2 or x.shape[1] != self.dims:
            raise DataError(f"input must be (N, {self.dims}), got {x.shape}")
        out = np.empty(x.shape[0], dtype=np.float32)
        for start in range(0, x.shape[0], chunk):
            h = x[start : start + chunk] * self.input_scales
            for i, (w, b) in enumerate(self.layers):
                h = h @ w.T + b
                if i < NET_LAYERS - 1:
                    h = relu(h)
            out[start : start + chunk] = h[:, 0]
        return out


def input_scales_for(kind: str, s_input: float, s_ref: float) -> np.ndarray:
    """Per-column dequantization factors, matching the gather order."""
    if kind == "s":
        scales = [s_input] * 4
    elif kind == "t1":
        scales = [s_input] * 2 + [s_ref] * 4
    elif kind == "t2":
        scales = [s_ref] * 4
    else:
        raise ConfigError(f"kind must be one of {NET_KINDS}, got {kind!r}")
    return np.asarray(scales, dtype=np.float32)


def spatial_complement(x: np.ndarray, feat: np.ndarray, weights: WeightStore) -> np.ndarray:
    """Add the compensation head's residual to the input plane."""
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 2:
        raise DataError(f"plane must be 2-D, got shape {x.shape}")
    hh, ww = x.shape
    if feat.shape != (32, hh // 2, ww // 2):
        raise DataError(
            f"features must be (32, {hh // 2}, {ww // 2}) for a {hh}x{ww} plane, "
            f"got {feat.shape}"
        )
    h = np.asarray(feat, dtype=np.float32)
    for i in range(3):
        w, b = weights.conv_params(f"sc.{i}")
        spec = ConvSpec(w.shape[1], w.shape[0], w.shape[2], w.shape[3])
        h = conv2d(h, w, b, spec)
        if i < 2:
            h = relu(h)
    residual = pixel_shuffle(h, 2)
    return x + residual[0]


def upsample3(x: np.ndarray) -> np.ndarray:
    """Pixel repetition: each input pixel becomes a constant 3x3 block."""
    return np.repeat(np.repeat(x, 3, axis=0), 3, axis=1)


def _shifted(plane: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """plane[r+dr, c+dc] with out-of-frame coordinates replicate-clamped."""
    hh, ww = plane.shape
    rows = np.clip(np.arange(hh) + dr, 0, hh - 1)
    cols = np.clip(np.arange(ww) + dc, 0, ww - 1)
    return plane[rows[:, None], cols[None, :]]


def s_patterns(xq: np.ndarray) -> np.ndarray:
    """The four rotated 2x2 gather patterns, shape (4, H, W, 4)."""
    out = np.empty((4,) + xq.shape + (4,), dtype=xq.dtype)
    for j, steps in enumerate(ROT_STEPS):
        out[j, ..., 0] = xq
        for col, (dr, dc) in enumerate(steps, start=1):
            out[j, ..., col] = _shifted(xq, dr, dc)
    return out


def _check_triple(cur3: np.ndarray, ref1: np.ndarray, ref2: np.ndarray) -> None:
    if cur3.shape != ref1.shape or cur3.shape != ref2.shape:
        raise DataError(
            f"plane shapes differ: {cur3.shape}, {ref1.shape}, {ref2.shape}"
        )
    if cur3.ndim != 2 or cur3.shape[0] % 3 or cur3.shape[1] % 3:
        raise DataError(f"deformed planes must be (3H, 3W), got {cur3.shape}")


def t1_patterns(cur3: np.ndarray, ref1: np.ndarray, ref2: np.ndarray) -> np.ndarray:
    """Center/neighbor pair gathers per rotation, shape (4, H, W, 6).

    Per output pixel the patch center sits at (3r+1, 3c+1); the rotating
    partner is its 4-neighbor, which always stays inside the 3x3 block, so
    no clamping is ever needed.  Columns are plane-major: (current center,
    current neighbor, ref1 center, ref1 neighbor, ref2 center, ref2
    neighbor).
    """
    _check_triple(cur3, ref1, ref2)
    hh, ww = cur3.shape[0] // 3, cur3.shape[1] // 3
    out = np.empty((4, hh, ww, 6), dtype=cur3.dtype)
    for j, (dr, dc) in enumerate(T1_DIRS):
        for p, plane in enumerate((cur3, ref1, ref2)):
            out[j, ..., 2 * p] = plane[1::3, 1::3]
            out[j, ..., 2 * p + 1] = plane[1 + dr :: 3, 1 + dc :: 3]
    return out


def t2_pattern(ref3: np.ndarray) -> np.ndarray:
    """Corner gather of each 3x3 patch, shape (H, W, 4), row-major corners."""
    if ref3.ndim != 2 or ref3.shape[0] % 3 or ref3.shape[1] % 3:
        raise DataError(f"deformed plane must be (3H, 3W), got {ref3.shape}")
    return np.stack(
        [ref3[0::3, 0::3], ref3[0::3, 2::3], ref3[2::3, 0::3], ref3[2::3, 2::3]],
        axis=-1,
    )


def _ensemble_mean(results: np.ndarray) -> np.ndarray:
    # Sorting the per-rotation results before summing makes the float32 sum
    # independent of rotation labeling, which is what makes the 90-degree
    # covariance property exact instead of within-epsilon.
    return np.sort(results, axis=0).sum(axis=0, dtype=np.float32) / np.float32(4.0)


def slut_query(xq: np.ndarray, lut: LookupTable) -> np.ndarray:
    """Spatial residual plane from the 4-rotation table ensemble."""
    if lut.spec.kind != "s":
        raise ConfigError(f"expected a kind 's' table, got {lut.spec.kind!r}")
    xq = np.asarray(xq)
    if xq.ndim != 2:
        raise DataError(f"plane must be 2-D, got shape {xq.shape}")
    pats = s_patterns(xq)
    results = np.stack([query_simplex(lut, pats[j]) for j in range(4)])
    return _ensemble_mean(results)


def tlut1_query(
    cur3: np.ndarray, ref1: np.ndarray, ref2: np.ndarray, lut: LookupTable
) -> np.ndarray:
    """Temporal-pair residual plane, one value per original pixel."""
    if lut.spec.kind != "t1":
        raise ConfigError(f"expected a kind 't1' table, got {lut.spec.kind!r}")
    pats = t1_patterns(np.asarray(cur3), np.asarray(ref1), np.asarray(ref2))
    results = np.stack([query_simplex(lut, pats[j]) for j in range(4)])
    return _ensemble_mean(results)


def tlut2_query(ref3: np.ndarray, lut: LookupTable) -> np.ndarray:
    """Corner-pattern residual plane for one deformed reference."""
    if lut.spec.kind != "t2":
        raise ConfigError(f"expected a kind 't2' table, got {lut.spec.kind!r}")
    return query_simplex(lut, t2_pattern(np.asarray(ref3)))


def fuse(xt: np.ndarray, r_s: np.ndarray, r_t1: np.ndarray, r_t2: np.ndarray) -> np.ndarray:
    """y = compensated plane + spatial residual + combined temporal residual."""
    if not (xt.shape == r_s.shape == r_t1.shape == r_t2.shape):
        raise DataError(
            f"shape mismatch: {xt.shape}, {r_s.shape}, {r_t1.shape}, {r_t2.shape}"
        )
    return (xt + (r_s + (r_t1 + r_t2))).astype(np.float32)


def enhance_direct(xq: np.ndarray, ref1: np.ndarray, ref2: np.ndarray, nets) -> tuple:
    """Network-path residual triple on the exact table-query gather patterns.

    ``xq`` is the quantized compensated plane at original resolution;
    ``ref1``/``ref2`` are the quantized deformed planes.  The current-plane
    center/neighbor pair of the temporal path reads (xq, xq): on a
    pixel-repeated plane both always land in the same constant block.
    """
    xq = np.asarray(xq)
    if xq.ndim != 2:
        raise DataError(f"plane must be 2-D, got shape {xq.shape}")
    net_s, net_t1, net_t2 = nets["s"], nets["t1"], nets["t2"]
    hh, ww = xq.shape

    pats = s_patterns(xq)
    rs = np.stack(
        [net_s.forward(pats[j].reshape(-1, 4)).reshape(hh, ww) for j in range(4)]
    )
    r_s = _ensemble_mean(rs)

    cur3 = upsample3(xq)
    pats1 = t1_patterns(cur3, np.asarray(ref1), np.asarray(ref2))
    rt1 = np.stack(
        [net_t1.forward(pats1[j].reshape(-1, 6)).reshape(hh, ww) for j in range(4)]
    )
    r_t1 = _ensemble_mean(rt1)

    q1 = net_t2.forward(t2_pattern(np.asarray(ref1)).reshape(-1, 4)).reshape(hh, ww)
    q2 = net_t2.forward(t2_pattern(np.asarray(ref2)).reshape(-1, 4)).reshape(hh, ww)
    r_t2 = ((q1 + q2) / np.float32(2.0)).astype(np.float32)

    return r_s, r_t1, r_t2


def build_all_luts(nets, specs=None, chunk: int = 1 << 20) -> dict:
    """Enumerate each net over its input lattice into a table."""
    out = {}
    for kind in NET_KINDS:
        spec = specs[kind] if specs is not None else LutSpec.default(kind)
        net = nets[kind]
        if spec.dims != net.dims:
            raise ConfigError(
                f"table spec dims {spec.dims} do not match net dims {net.dims}"
            )
        if spec.kind != kind:
            raise ConfigError(f"spec kind {spec.kind!r} under key {kind!r}")
        out[kind] = build_lut(net.forward, spec, chunk=chunk)
    return out
