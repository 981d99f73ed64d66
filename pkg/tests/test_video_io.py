"""Raw 4:2:0 stream and QP sidecar I/O."""

import numpy as np
import pytest

from streamlut import (
    DataError,
    StreamHeader,
    encode_y,
    read_sidecar,
    read_stream,
    write_sidecar,
    write_stream,
)

from helpers import toy_stream


def test_header_validation():
    StreamHeader(4, 4, 2)
    with pytest.raises(DataError):
        StreamHeader(5, 4, 2)  # odd width
    with pytest.raises(DataError):
        StreamHeader(4, 6, 0)
    with pytest.raises(DataError):
        StreamHeader(-4, 4, 1)
    with pytest.raises(DataError):
        StreamHeader(4, 4, 1, pixel_format="rgb24")


def test_frame_bytes_420_arithmetic():
    # 4x4 luma (16) + two 2x2 chroma planes (4 + 4)
    assert StreamHeader(4, 4, 2).frame_bytes == 24


def test_two_frame_stream_length(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=4, height=4, frames=2, seed=0)
    assert video.stat().st_size == 2 * (16 + 4 + 4)


def test_roundtrip_identity(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    header, ys = toy_stream(video, sidecar, width=6, height=4, frames=3, seed=1, qps=[30, 28, 35])
    frames = list(read_stream(video, sidecar))
    assert len(frames) == 3
    out = tmp_path / "copy.yuv"
    write_stream(out, ((encode_y(y), u, v) for y, u, v, _ in frames))
    assert out.read_bytes() == video.read_bytes()
    for (y, u, v, qp), want_qp, want_y in zip(frames, [30, 28, 35], ys):
        assert qp == want_qp
        assert y.dtype == np.float32
        np.testing.assert_array_equal(y, want_y)
        assert u.shape == (2, 3) and v.shape == (2, 3)


def test_sidecar_roundtrip_and_blank_lines(tmp_path):
    path = tmp_path / "s.qp"
    header = StreamHeader(4, 4, 2)
    write_sidecar(path, header, [37, 32])
    path.write_text("\n" + path.read_text() + "\n\n")
    got_header, qps = read_sidecar(path)
    assert got_header == header
    assert qps == [37, 32]


def test_sidecar_qp_count_mismatch(tmp_path):
    path = tmp_path / "s.qp"
    path.write_text("4 4 2\n30\n")
    with pytest.raises(DataError):
        read_sidecar(path)


def test_sidecar_parse_errors(tmp_path):
    path = tmp_path / "s.qp"
    path.write_text("")
    with pytest.raises(DataError):
        read_sidecar(path)
    path.write_text("4 4\n")
    with pytest.raises(DataError):
        read_sidecar(path)
    path.write_text("4 4 1\nthirty\n")
    with pytest.raises(DataError):
        read_sidecar(path)


def test_stream_size_mismatch(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=4, height=4, frames=2, seed=2)
    video.write_bytes(video.read_bytes()[:-1])
    with pytest.raises(DataError):
        list(read_stream(video, sidecar))


def test_write_stream_rejects_non_uint8(tmp_path):
    path = tmp_path / "v.yuv"
    y = np.zeros((4, 4), np.float32)
    c = np.zeros((2, 2), np.uint8)
    with pytest.raises(DataError):
        write_stream(path, [(y, c, c)])


def test_encode_y_rounds_and_clamps():
    y = np.array([-3.2, 0.4, 17.5, 254.5, 300.0], np.float32)
    got = encode_y(y)
    assert got.dtype == np.uint8
    np.testing.assert_array_equal(got, [0, 0, 18, 255, 255])


def test_encode_y_integer_passthrough():
    y = np.arange(256, dtype=np.float32).reshape(16, 16)
    np.testing.assert_array_equal(encode_y(y), y.astype(np.uint8))
