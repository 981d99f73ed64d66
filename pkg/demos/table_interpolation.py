#!/usr/bin/env python3
"""Walk through table construction and simplex interpolation.

Builds a small 2-D table from a closed-form oracle, queries it, and checks
the two properties everything else rests on: stored values come back exactly
at lattice points, and affine functions are reproduced everywhere (the
simplex weights are a barycentric partition, so any linear map survives the
round trip).  Ends with the storage arithmetic for the full-size tables.

Run: python3 demos/table_interpolation.py
"""

import numpy as np

from streamlut import LutSpec, build_lut, lut_size_bytes, query_simplex

rng = np.random.default_rng(7)

# --- a 2-D table from a closed-form oracle --------------------------------
# interval 64 -> 5 lattice points per axis (0, 64, 128, 192, 256)
spec = LutSpec(kind="s", dims=2, interval=64)


def saddle(pts):
    a, b = pts[:, 0] / 255.0, pts[:, 1] / 255.0
    return (a * a - b * b).astype(np.float32)


lut = build_lut(saddle, spec)
print(f"table: {spec.dims}-D, interval {spec.interval}, "
      f"{spec.side}^{spec.dims} = {spec.entries} entries")

# lattice points return the stored value with zero error
lattice = np.array([[0, 0], [64, 128], [192, 64]], np.int32)
stored = saddle(lattice.astype(np.float32))
queried = query_simplex(lut, lattice)
print("\nlattice queries (error must be exactly 0):")
for q, s, g in zip(lattice, stored, queried):
    print(f"  f({q[0]:3d},{q[1]:3d}) stored {s:+.6f}  queried {g:+.6f}  "
          f"err {abs(s - g):.1e}")

# off-lattice queries interpolate; the saddle is curved, so a coarse table
# is only an approximation there
off = rng.integers(0, 256, size=(5, 2)).astype(np.int32)
print("\noff-lattice queries (interpolation vs the true surface):")
for q in off:
    truth = float(saddle(q[None].astype(np.float32))[0])
    got = float(query_simplex(lut, q[None])[0])
    print(f"  f({q[0]:3d},{q[1]:3d}) true {truth:+.6f}  table {got:+.6f}  "
          f"err {abs(truth - got):.4f}")

# --- affine oracles interpolate exactly -----------------------------------
coef = rng.uniform(-0.01, 0.01, size=4)


def affine(pts):
    return (pts.astype(np.float64) @ coef + 0.125).astype(np.float32)


lut4 = build_lut(affine, LutSpec(kind="s", dims=4, interval=64))
queries = rng.integers(0, 256, size=(20_000, 4)).astype(np.int32)
err = np.abs(query_simplex(lut4, queries) - affine(queries)).max()
print(f"\n4-D affine oracle, 20k random queries: max |error| {err:.2e}")

# --- storage arithmetic for the shipping sizes ----------------------------
print("\nfull-size tables (interval 4 / 16 / 4):")
total = 0
for kind in ("s", "t1", "t2"):
    d = LutSpec.default(kind)
    nbytes = lut_size_bytes(d)
    total += nbytes
    print(f"  {kind:>2}: {d.side}^{d.dims} entries -> {nbytes:,} bytes "
          f"({nbytes / 2**20:.2f} MB)")
print(f"  total {total / 2**20:.2f} MB")
