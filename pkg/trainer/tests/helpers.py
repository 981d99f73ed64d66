"""Shared fixtures: synthetic clip pairs and on-disk clip triples.

The toy degradation is additive Gaussian noise on smooth low-frequency
content, both streams stored at 8 bits; denoising it is learnable within a
few hundred CPU iterations, which keeps the training tests honest but
fast.
"""

from pathlib import Path

import numpy as np

from streamlut_trainer import ClipPair


def smooth_field(rng, t, h, w, drift=0.4):
    coarse = rng.uniform(60, 200, size=(h // 8 + 2, w // 8 + 2))
    base = np.kron(coarse, np.ones((8, 8)))[:h, :w]
    frames = []
    yy, xx = np.mgrid[0:h, 0:w]
    for i in range(t):
        wave = 18 * np.sin(2 * np.pi * (xx / w + drift * i / t)) * np.cos(2 * np.pi * yy / h)
        frames.append(np.clip(base + wave, 20, 235))
    return np.stack(frames).astype(np.float32)


def make_pair(seed, t=8, h=40, w=48, sigma=9.0) -> ClipPair:
    """A compressed/raw clip pair; both streams already 8-bit levels."""
    rng = np.random.default_rng(seed)
    raw = smooth_field(rng, t, h, w)
    comp = np.clip(raw + rng.normal(0, sigma, raw.shape), 0, 255)
    raw = np.round(raw).astype(np.uint8).astype(np.float32)
    comp = np.round(comp).astype(np.uint8).astype(np.float32)
    qps = [int(q) for q in rng.integers(30, 42, size=t)]
    return ClipPair(f"clip{seed}", comp, raw, qps)


def write_clip_files(dirpath, pair: ClipPair) -> None:
    """Store a pair as the on-disk triple the trainer's loader expects."""
    dirpath = Path(dirpath)
    t, h, w = pair.comp.shape
    chroma = np.full((h // 2, w // 2), 128, dtype=np.uint8)
    for tag, planes in (("comp", pair.comp), ("raw", pair.raw)):
        with open(dirpath / f"{pair.name}.{tag}.yuv", "wb") as fh:
            for i in range(t):
                fh.write(planes[i].astype(np.uint8).tobytes())
                fh.write(chroma.tobytes())
                fh.write(chroma.tobytes())
    with open(dirpath / f"{pair.name}.qp", "w", encoding="utf-8") as fh:
        fh.write(f"{w} {h} {t}\n")
        for qp in pair.qps:
            fh.write(f"{qp}\n")
