import numpy as np
import pytest
import torch

from streamlut_trainer import (
    ClipPair,
    DataError,
    augment_pair,
    load_clip_dir,
    read_sidecar,
    sample_batch,
)

from helpers import make_pair, write_clip_files


def test_load_roundtrip(tmp_path):
    pair = make_pair(1, t=5, h=16, w=24)
    write_clip_files(tmp_path, pair)
    loaded = load_clip_dir(tmp_path)
    assert len(loaded) == 1
    got = loaded[0]
    assert got.name == pair.name
    assert np.array_equal(got.comp, pair.comp)
    assert np.array_equal(got.raw, pair.raw)
    assert got.qps == pair.qps


def test_load_multiple_sorted(tmp_path):
    for seed in (2, 1):
        write_clip_files(tmp_path, make_pair(seed, t=3, h=16, w=16))
    names = [p.name for p in load_clip_dir(tmp_path)]
    assert names == sorted(names)


def test_load_missing_dir():
    with pytest.raises(DataError):
        load_clip_dir("/nonexistent/clips")


def test_load_empty_dir(tmp_path):
    with pytest.raises(DataError, match="no clip pairs"):
        load_clip_dir(tmp_path)


def test_load_missing_stream(tmp_path):
    pair = make_pair(3, t=3, h=16, w=16)
    write_clip_files(tmp_path, pair)
    (tmp_path / f"{pair.name}.raw.yuv").unlink()
    with pytest.raises(DataError, match="missing"):
        load_clip_dir(tmp_path)


def test_load_size_mismatch(tmp_path):
    pair = make_pair(4, t=3, h=16, w=16)
    write_clip_files(tmp_path, pair)
    with open(tmp_path / f"{pair.name}.comp.yuv", "ab") as fh:
        fh.write(b"\x00")
    with pytest.raises(DataError, match="bytes"):
        load_clip_dir(tmp_path)


def test_sidecar_parse_errors(tmp_path):
    p = tmp_path / "bad.qp"
    p.write_text("")
    with pytest.raises(DataError, match="empty"):
        read_sidecar(p)
    p.write_text("16 16\n30\n")
    with pytest.raises(DataError, match="first line"):
        read_sidecar(p)
    p.write_text("16 16 two\n30\n30\n")
    with pytest.raises(DataError, match="non-integer"):
        read_sidecar(p)
    p.write_text("16 16 3\n30\n30\n")
    with pytest.raises(DataError, match="QP values"):
        read_sidecar(p)


def test_clip_pair_validation():
    a = np.zeros((3, 8, 8), dtype=np.float32)
    with pytest.raises(DataError, match="shapes differ"):
        ClipPair("x", a, np.zeros((3, 8, 10), dtype=np.float32), [1, 2, 3])
    with pytest.raises(DataError, match="QP values"):
        ClipPair("x", a, a, [1, 2])


def test_augment_closure():
    # Encode the input/target relation as an exact offset; any flip or
    # rotation must preserve it, since both sides get the same transform.
    rng = np.random.default_rng(5)
    comp = rng.uniform(0, 200, size=(3, 10, 10)).astype(np.float32)
    raw = comp + 7.0
    for k in range(4):
        for flip in (False, True):
            c2, r2 = augment_pair(comp, raw, k, flip)
            assert np.array_equal(r2, c2 + 7.0)


def test_augment_geometry():
    comp = np.arange(2 * 4 * 4, dtype=np.float32).reshape(2, 4, 4)
    c2, _ = augment_pair(comp, comp.copy(), 1, False)
    assert np.array_equal(c2, np.rot90(comp, 1, axes=(1, 2)))
    c3, _ = augment_pair(comp, comp.copy(), 0, True)
    assert np.array_equal(c3, comp[:, :, ::-1])


def test_sample_batch_shapes_and_crop_clamp():
    pairs = [make_pair(6, t=6, h=40, w=48)]
    rng = np.random.default_rng(0)
    comp, raw, qps = sample_batch(pairs, rng, crop=180, batch=3, frames=2)
    # configured crop exceeds the clip, so the side clamps to min(H, W)
    assert comp.shape == (3, 2, 40, 40)
    assert raw.shape == (3, 2, 40, 40)
    assert qps.shape == (3, 2)
    assert comp.dtype == torch.float32


def test_sample_batch_qps_follow_window():
    pair = make_pair(7, t=6, h=16, w=16)
    pair.qps = list(range(6))  # qp == frame index
    rng = np.random.default_rng(1)
    _, _, qps = sample_batch([pair], rng, crop=8, batch=8, frames=3)
    for row in qps:
        assert row[1] == row[0] + 1 and row[2] == row[0] + 2


def test_sample_batch_deterministic_under_seed():
    pairs = [make_pair(8, t=5, h=24, w=24), make_pair(9, t=5, h=24, w=24)]
    a = sample_batch(pairs, np.random.default_rng(42), crop=16, batch=4, frames=2)
    b = sample_batch(pairs, np.random.default_rng(42), crop=16, batch=4, frames=2)
    assert torch.equal(a[0], b[0]) and torch.equal(a[1], b[1])
    assert np.array_equal(a[2], b[2])


def test_sample_batch_needs_enough_frames():
    pairs = [make_pair(10, t=2, h=16, w=16)]
    with pytest.raises(DataError, match="frames"):
        sample_batch(pairs, np.random.default_rng(0), crop=8, batch=1, frames=3)
