"""Streaming per-frame enhancement loop, LUT building, and the latency bench.

The frame loop is strictly sequential and strictly causal: frame i sees only
frames 0..i.  Each step reuses artifacts cached by earlier frames (features
and enhanced planes), so per-frame cost is flat regardless of stream length.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .alignment import deform, predict_offsets
from .enhancement import (
    EnhancementNet,
    NET_KINDS,
    enhance_direct,
    fuse,
    slut_query,
    spatial_complement,
    tlut1_query,
    tlut2_query,
    upsample3,
)
from .errors import ConfigError
from .lut import LookupTable
from .nn import WeightStore, mafe_forward
from .propagation import CacheEntry, ReferenceWindow, bootstrap_refs
from .quant import QuantParams, quantize
from .video_io import encode_y


@dataclass(frozen=True)
class EngineConfig:
    window: int = 7
    s_input: float = 1.0
    s_ref: float = 1.0

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")


def quant_params_from_weights(weights: WeightStore, config: EngineConfig):
    """Step sizes ride in the weights file as 1-element tensors when trained."""
    s_input, s_ref = config.s_input, config.s_ref
    if "quant.s_input" in weights:
        s_input = float(weights["quant.s_input"].reshape(-1)[0])
    if "quant.s_ref" in weights:
        s_ref = float(weights["quant.s_ref"].reshape(-1)[0])
    return QuantParams(s=s_input), QuantParams(s=s_ref)


class Engine:
    """Holds weights, tables and the reference window across frames."""

    def __init__(self, weights: WeightStore, luts: dict, config: EngineConfig = EngineConfig()):
        for kind in NET_KINDS:
            if kind not in luts:
                raise ConfigError(f"missing table kind {kind!r}")
            if not isinstance(luts[kind], LookupTable) or luts[kind].spec.kind != kind:
                raise ConfigError(f"table under key {kind!r} has wrong kind")
        self.weights = weights
        self.luts = luts
        self.config = config
        self.qp_input, self.qp_ref = quant_params_from_weights(weights, config)
        self.window = ReferenceWindow(config.window)
        self._nets = None

    def nets(self) -> dict:
        """The three enhancement networks, for the direct (non-table) path."""
        if self._nets is None:
            self._nets = {
                kind: EnhancementNet.from_weights(
                    kind, self.weights, self.qp_input.s, self.qp_ref.s
                )
                for kind in NET_KINDS
            }
        return self._nets

    def prepare(self, y: np.ndarray, qp: int, frame_index: int) -> dict:
        """Everything up to the enhancement stage: features, compensation,
        reference selection, deformation, quantization."""
        feat = mafe_forward(y, self.weights)
        xt = spatial_complement(y, feat, self.weights)
        current = CacheEntry(frame_index, qp, feat, xt)
        ref1, ref2 = bootstrap_refs(current, self.window.select_refs())
        deformed = []
        for ref in (ref1, ref2):
            offsets = predict_offsets(feat, ref.features, self.weights)
            deformed.append(deform(ref.enhanced, offsets))
        xq = quantize(xt, self.qp_input)
        return {
            "feat": feat,
            "xt": xt,
            "xq": xq,
            "cur3": upsample3(xq),
            "ref1q": quantize(deformed[0], self.qp_ref),
            "ref2q": quantize(deformed[1], self.qp_ref),
        }

    def lut_stage(self, prep: dict) -> np.ndarray:
        """Table-query enhancement: the inference path."""
        r_s = slut_query(prep["xq"], self.luts["s"])
        r_t1 = tlut1_query(prep["cur3"], prep["ref1q"], prep["ref2q"], self.luts["t1"])
        q1 = tlut2_query(prep["ref1q"], self.luts["t2"])
        q2 = tlut2_query(prep["ref2q"], self.luts["t2"])
        r_t2 = ((q1 + q2) / np.float32(2.0)).astype(np.float32)
        return fuse(prep["xt"], r_s, r_t1, r_t2)

    def direct_stage(self, prep: dict) -> np.ndarray:
        """Network-forward enhancement on the same inputs (reference path)."""
        r_s, r_t1, r_t2 = enhance_direct(
            prep["xq"], prep["ref1q"], prep["ref2q"], self.nets()
        )
        return fuse(prep["xt"], r_s, r_t1, r_t2)

    def commit(self, prep: dict, enhanced: np.ndarray, qp: int, frame_index: int) -> None:
        self.window.push(CacheEntry(frame_index, qp, prep["feat"], enhanced))

    def process(self, y: np.ndarray, qp: int, frame_index: int, direct: bool = False) -> np.ndarray:
        prep = self.prepare(y, qp, frame_index)
        enhanced = self.direct_stage(prep) if direct else self.lut_stage(prep)
        self.commit(prep, enhanced, qp, frame_index)
        return enhanced


def enhance_stream(stream, weights: WeightStore, luts: dict, config: EngineConfig = EngineConfig(), direct: bool = False):
    """Map (y, u, v, qp) frames to (y uint8, u, v) enhanced frames, lazily.

    Any failure is re-raised with the offending frame index prepended.
    """
    engine = Engine(weights, luts, config)
    for i, (y, u, v, qp) in enumerate(stream):
        try:
            enhanced = engine.process(y, qp, i, direct=direct)
        except Exception as e:
            e.args = (f"frame {i}: {e}",) + e.args[1:]
            raise
        yield encode_y(enhanced), u, v


@dataclass
class LatencyReport:
    """Per-frame process times plus the latency model LT = T_process + T_wait.

    This engine never waits on future frames (N_f = 0), so LT is just the
    processing time; the wait term is kept in the model for comparison with
    engines that buffer ahead.
    """

    t_process_ms: np.ndarray
    warmup: int
    n_future: int = 0
    fps_assumed: float = 30.0
    lut_stage_ms: float | None = None
    direct_stage_ms: float | None = None

    @staticmethod
    def wait_ms(n_future: int, fps: float) -> float:
        return 1000.0 * n_future / fps

    @property
    def mean_ms(self) -> float:
        return float(np.mean(self.t_process_ms))

    @property
    def p95_ms(self) -> float:
        return float(np.percentile(self.t_process_ms, 95))

    @property
    def t_wait_ms(self) -> float:
        return self.wait_ms(self.n_future, self.fps_assumed)

    @property
    def lt_ms(self) -> float:
        return self.mean_ms + self.t_wait_ms

    @property
    def achieved_fps(self) -> float:
        return 1000.0 / self.mean_ms

    @property
    def stage_speedup(self) -> float | None:
        if self.lut_stage_ms is None or self.direct_stage_ms is None:
            return None
        return self.direct_stage_ms / self.lut_stage_ms

    def lines(self) -> list[str]:
        out = [
            f"frames timed: {len(self.t_process_ms)} (warmup {self.warmup} excluded)",
            f"T_process mean: {self.mean_ms:.2f} ms  p95: {self.p95_ms:.2f} ms",
            f"T_wait (N_f={self.n_future}, fps={self.fps_assumed:g}): {self.t_wait_ms:.2f} ms",
            f"LT: {self.lt_ms:.2f} ms",
            f"achieved fps: {self.achieved_fps:.2f}",
        ]
        if self.stage_speedup is not None:
            out.append(
                f"enhancement stage: tables {self.lut_stage_ms:.2f} ms vs "
                f"network {self.direct_stage_ms:.2f} ms ({self.stage_speedup:.2f}x)"
            )
        return out


def bench(
    stream,
    weights: WeightStore,
    luts: dict,
    config: EngineConfig = EngineConfig(),
    fps: float = 30.0,
    warmup: int = 3,
    compare_direct: bool = False,
) -> LatencyReport:
    """Time the per-frame compute region (I/O excluded) over a stream.

    The first ``warmup`` frames run but are excluded from aggregates (they
    absorb one-time JIT and cache effects).  With ``compare_direct`` the
    enhancement stage is additionally timed both ways on identical inputs;
    the canonical output (and the cached state) always comes from the
    table path.
    """
    engine = Engine(weights, luts, config)
    times, lut_times, direct_times = [], [], []
    frame_index = 0
    for frame_index, (y, u, v, qp) in enumerate(stream):
        t0 = time.perf_counter()
        prep = engine.prepare(y, qp, frame_index)
        enhanced = engine.lut_stage(prep)
        engine.commit(prep, enhanced, qp, frame_index)
        elapsed = (time.perf_counter() - t0) * 1000.0
        if frame_index >= warmup:
            times.append(elapsed)
        if compare_direct and frame_index >= warmup:
            t0 = time.perf_counter()
            engine.lut_stage(prep)
            lut_times.append((time.perf_counter() - t0) * 1000.0)
            t0 = time.perf_counter()
            engine.direct_stage(prep)
            direct_times.append((time.perf_counter() - t0) * 1000.0)
    if not times:
        raise ConfigError(
            f"stream ended after {frame_index + 1} frames; need more than "
            f"the {warmup} warmup frames to time anything"
        )
    return LatencyReport(
        t_process_ms=np.asarray(times),
        warmup=warmup,
        fps_assumed=fps,
        lut_stage_ms=float(np.mean(lut_times)) if lut_times else None,
        direct_stage_ms=float(np.mean(direct_times)) if direct_times else None,
    )
