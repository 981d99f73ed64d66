#!/usr/bin/env python3
"""End-to-end streaming enhancement on a synthetic clip.

Synthesizes a short 4:2:0 clip (a drifting pattern plus QP-scaled noise so
frames differ in quality), writes it with its QP sidecar, then runs the full
per-frame loop: feature extraction, reference selection from the cache,
deformable alignment of the cached enhanced frames, spatial compensation,
quantization, the three table queries, fusion, and re-encode.

The weights here are random placeholders, not trained ones, so output
quality is NOT expected to improve; the point is the moving parts: strictly
causal frame order, quality-first reference picks, untouched chroma, and a
bit-reproducible output stream.

Run: python3 demos/enhance_stream.py
"""

import tempfile
from pathlib import Path

import numpy as np

from streamlut import (
    EngineConfig,
    EnhancementNet,
    LutSpec,
    StreamHeader,
    WeightStore,
    build_all_luts,
    enhance_stream,
    psnr,
    read_stream,
    write_sidecar,
    write_stream,
)

rng = np.random.default_rng(21)
W, H, FRAMES = 48, 32, 8
QPS = [37, 32, 27, 37, 42, 27, 32, 37]  # lower = better quality

# --- synthesize a clip ------------------------------------------------------
yy, xx = np.mgrid[0:H, 0:W]
frames = []
for i, qp in enumerate(QPS):
    clean = 128 + 96 * np.sin((xx + 3 * i) / 7.0) * np.cos(yy / 5.0)
    noisy = clean + rng.normal(0, qp / 8.0, size=(H, W))  # QP-scaled damage
    y = np.clip(noisy, 0, 255).astype(np.uint8)
    u = np.full((H // 2, W // 2), 128, np.uint8)
    v = np.full((H // 2, W // 2), 128, np.uint8)
    frames.append((y, u, v))

workdir = Path(tempfile.mkdtemp(prefix="stream_demo_"))
video, sidecar = workdir / "in.yuv", workdir / "in.qp"
write_stream(video, frames)
write_sidecar(sidecar, StreamHeader(W, H, FRAMES), QPS)
print(f"wrote {video} ({video.stat().st_size} bytes) and sidecar {sidecar}")

# --- random weights and small tables ----------------------------------------
# every parameter tensor the engine reads, filled with small random values
shapes = {"mafe.0": (32, 1, 3, 3)}
shapes.update({f"mafe.{i}": (32, 32, 3, 3) for i in range(1, 11)})
shapes.update({"sc.0": (32, 32, 3, 3), "sc.1": (32, 32, 3, 3), "sc.2": (4, 32, 3, 3)})
shapes.update({
    "offset.0": (32, 64, 3, 3), "offset.1": (32, 32, 3, 3),
    "offset.2": (32, 32, 3, 3), "offset.3": (72, 32, 3, 3),
})
shapes.update({"net_s.0": (32, 1, 2, 2), "net_t1.0": (32, 3, 2, 1), "net_t2.0": (32, 1, 2, 2)})
for kind in ("s", "t1", "t2"):
    for i in range(1, 10):
        shapes[f"net_{kind}.{i}"] = (32, 32, 1, 1)
    shapes[f"net_{kind}.10"] = (1, 32, 1, 1)

weights = WeightStore()
for name, shape in shapes.items():
    # larger output layers keep residuals above rounding so the effect shows
    gain = 40.0 if name in ("sc.2", "net_s.10", "net_t1.10", "net_t2.10") else 1.0
    weights.add(f"{name}.weight", (gain * rng.normal(0, 0.05, size=shape)).astype(np.float32))
    weights.add(f"{name}.bias", (gain * rng.normal(0, 0.05, size=shape[0])).astype(np.float32))

# interval 64 keeps this demo's table build under a second; the shipping
# intervals (4/16/4) take just over a minute and 228 MB
specs = {k: LutSpec(kind=k, dims=d, interval=64) for k, d in [("s", 4), ("t1", 6), ("t2", 4)]}
nets = {k: EnhancementNet.from_weights(k, weights) for k in ("s", "t1", "t2")}
luts = build_all_luts(nets, specs=specs)
print(f"built demo tables: {', '.join(f'{k}:{l.values.size} entries' for k, l in luts.items())}")

# --- run the streaming loop twice -------------------------------------------
out_path = workdir / "out.yuv"
enhanced = list(enhance_stream(read_stream(video, sidecar), weights, luts,
                               EngineConfig(window=4)))
write_stream(out_path, enhanced)

enhanced_again = list(enhance_stream(read_stream(video, sidecar), weights, luts,
                                     EngineConfig(window=4)))
identical = all(
    a[0].tobytes() == b[0].tobytes() for a, b in zip(enhanced, enhanced_again)
)
print(f"\nsecond run byte-identical: {identical}")

print("\nper-frame report (placeholder weights, so no quality gain expected):")
for i, ((y_in, u_in, _, qp), (y_out, u_out, _)) in enumerate(
    zip(read_stream(video, sidecar), enhanced)
):
    drift = psnr(y_in, y_out.astype(np.float32))
    chroma_ok = np.array_equal(u_in, u_out)
    print(f"  frame {i}: qp {qp}  output-vs-input {drift:6.2f} dB  "
          f"chroma untouched: {chroma_ok}")

print(f"\nenhanced stream at {out_path} ({out_path.stat().st_size} bytes)")
