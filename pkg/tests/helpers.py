"""Shared test fixtures: weight factories, tiny table specs, toy streams."""

import numpy as np

from streamlut import LutSpec, StreamHeader, WeightStore, write_sidecar, write_stream

# Full tensor inventory of the engine, name -> shape.
WEIGHT_SHAPES = {}
WEIGHT_SHAPES["mafe.0.weight"] = (32, 1, 3, 3)
for i in range(1, 11):
    WEIGHT_SHAPES[f"mafe.{i}.weight"] = (32, 32, 3, 3)
WEIGHT_SHAPES["sc.0.weight"] = (32, 32, 3, 3)
WEIGHT_SHAPES["sc.1.weight"] = (32, 32, 3, 3)
WEIGHT_SHAPES["sc.2.weight"] = (4, 32, 3, 3)
WEIGHT_SHAPES["offset.0.weight"] = (32, 64, 3, 3)
WEIGHT_SHAPES["offset.1.weight"] = (32, 32, 3, 3)
WEIGHT_SHAPES["offset.2.weight"] = (32, 32, 3, 3)
WEIGHT_SHAPES["offset.3.weight"] = (72, 32, 3, 3)
for kind, first in (("s", (32, 1, 2, 2)), ("t1", (32, 3, 2, 1)), ("t2", (32, 1, 2, 2))):
    WEIGHT_SHAPES[f"net_{kind}.0.weight"] = first
    for i in range(1, 10):
        WEIGHT_SHAPES[f"net_{kind}.{i}.weight"] = (32, 32, 1, 1)
    WEIGHT_SHAPES[f"net_{kind}.10.weight"] = (1, 32, 1, 1)

# Small-interval table specs keep test builds to a few thousand entries.
TINY_SPECS = {
    "s": LutSpec("s", 4, 64),
    "t1": LutSpec("t1", 6, 64),
    "t2": LutSpec("t2", 4, 64),
}


def random_weights(seed=0, scale=0.05, s_input=1.0, s_ref=1.0) -> WeightStore:
    """A full engine weight set with small random values.

    The scale keeps activations O(1) through the 11-layer stacks so float32
    comparisons against oracles stay well inside their tolerances.
    """
    rng = np.random.default_rng(seed)
    store = WeightStore()
    for name, shape in WEIGHT_SHAPES.items():
        store.add(name, rng.normal(0.0, scale, size=shape).astype(np.float32))
        store.add(name.replace(".weight", ".bias"), rng.normal(0.0, scale, size=shape[0]).astype(np.float32))
    store.add("quant.s_input", np.array([s_input], dtype=np.float32))
    store.add("quant.s_ref", np.array([s_ref], dtype=np.float32))
    return store


def zero_weights() -> WeightStore:
    """All-zero parameters: every network becomes the zero function."""
    store = WeightStore()
    for name, shape in WEIGHT_SHAPES.items():
        store.add(name, np.zeros(shape, dtype=np.float32))
        store.add(name.replace(".weight", ".bias"), np.zeros(shape[0], dtype=np.float32))
    return store


def toy_stream(path_video, path_sidecar, width=12, height=12, frames=4, seed=0, qps=None):
    """Write a random raw 4:2:0 stream plus sidecar; returns the y planes."""
    rng = np.random.default_rng(seed)
    header = StreamHeader(width, height, frames)
    ys = []
    def gen():
        for _ in range(frames):
            y = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
            u = rng.integers(0, 256, size=(height // 2, width // 2), dtype=np.uint8)
            v = rng.integers(0, 256, size=(height // 2, width // 2), dtype=np.uint8)
            ys.append(y)
            yield y, u, v
    write_stream(path_video, gen())
    if qps is None:
        qps = rng.integers(22, 42, size=frames)
    write_sidecar(path_sidecar, header, qps)
    return header, ys
