"""End-to-end streaming behavior, the latency bench and the command line."""

import numpy as np
import pytest

import streamlut.cli as cli
from streamlut import (
    ConfigError,
    DataError,
    Engine,
    EngineConfig,
    LatencyReport,
    bench,
    build_all_luts,
    enhance_stream,
    quant_params_from_weights,
    read_stream,
    save_weights,
)
from streamlut.enhancement import EnhancementNet

from helpers import TINY_SPECS, random_weights, toy_stream, zero_weights


def tiny_luts(weights):
    nets = {k: EnhancementNet.from_weights(k, weights) for k in ("s", "t1", "t2")}
    return build_all_luts(nets, specs=TINY_SPECS)


def run_stream(video, sidecar, weights, luts, **kw):
    return list(enhance_stream(read_stream(video, sidecar), weights, luts, **kw))


def test_identity_pipeline_byte_exact(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    _, ys = toy_stream(video, sidecar, width=12, height=10, frames=5, seed=0)
    weights = zero_weights()
    out = run_stream(video, sidecar, weights, tiny_luts(weights))
    assert len(out) == 5
    for (y_out, _, _), y_in in zip(out, ys):
        np.testing.assert_array_equal(y_out, y_in.astype(np.uint8))


def test_uv_passthrough_and_shapes(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=8, height=6, frames=4, seed=1)
    weights = random_weights(seed=2)
    out = run_stream(video, sidecar, weights, tiny_luts(weights))
    for (y_out, u_out, v_out), (_, u_in, v_in, _) in zip(out, read_stream(video, sidecar)):
        assert y_out.shape == (6, 8) and y_out.dtype == np.uint8
        np.testing.assert_array_equal(u_out, u_in)
        np.testing.assert_array_equal(v_out, v_in)


def test_end_to_end_determinism(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=10, height=8, frames=4, seed=3, qps=[37, 27, 42, 32])
    weights = random_weights(seed=4)
    luts = tiny_luts(weights)
    a = run_stream(video, sidecar, weights, luts)
    b = run_stream(video, sidecar, weights, luts)
    for fa, fb in zip(a, b):
        for pa, pb in zip(fa, fb):
            assert pa.tobytes() == pb.tobytes()


def test_single_frame_stream_self_reference(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=6, height=6, frames=1, seed=5)
    weights = random_weights(seed=6)
    out = run_stream(video, sidecar, weights, tiny_luts(weights))
    assert len(out) == 1
    assert out[0][0].shape == (6, 6)


def test_stream_is_lazy_and_causal(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=6, height=6, frames=5, seed=7)
    weights = zero_weights()
    consumed = []

    def recorder():
        for i, frame in enumerate(read_stream(video, sidecar)):
            consumed.append(i)
            yield frame

    out = enhance_stream(recorder(), weights, tiny_luts(weights))
    for i in range(5):
        next(out)
        # producing output i never touched any frame beyond i
        assert consumed == list(range(i + 1))


def test_frame_errors_carry_the_frame_index(tmp_path):
    weights = zero_weights()
    luts = tiny_luts(weights)
    good = np.zeros((6, 6), np.float32)
    bad = np.zeros((6, 7), np.float32)
    c = np.zeros((3, 3), np.uint8)
    stream = iter([(good, c, c, 30), (bad, c, c, 30)])
    out = enhance_stream(stream, weights, luts)
    next(out)
    with pytest.raises(DataError, match="frame 1:"):
        next(out)


def test_engine_validates_tables():
    weights = zero_weights()
    luts = tiny_luts(weights)
    with pytest.raises(ConfigError):
        Engine(weights, {"s": luts["s"], "t1": luts["t1"]})
    swapped = dict(luts)
    swapped["s"], swapped["t2"] = swapped["t2"], swapped["s"]
    with pytest.raises(ConfigError):
        Engine(weights, swapped)


def test_engine_config_validation():
    with pytest.raises(ConfigError):
        EngineConfig(window=0)


def test_quant_params_default_and_from_weights():
    config = EngineConfig()
    qi, qr = quant_params_from_weights(zero_weights(), config)
    assert qi.s == 1.0 and qr.s == 1.0
    qi, qr = quant_params_from_weights(random_weights(seed=8, s_input=0.5, s_ref=2.0), config)
    assert qi.s == 0.5 and qr.s == 2.0


def test_engine_cache_respects_window(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=6, height=6, frames=6, seed=9)
    weights = zero_weights()
    engine = Engine(weights, tiny_luts(weights), EngineConfig(window=2))
    for i, (y, _, _, qp) in enumerate(read_stream(video, sidecar)):
        engine.process(y, qp, i)
    entries = engine.window.entries
    assert [e.frame_index for e in entries] == [4, 5]


def test_direct_flag_switches_stage(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=6, height=6, frames=2, seed=10)
    weights = random_weights(seed=11)
    luts = tiny_luts(weights)
    via_tables = run_stream(video, sidecar, weights, luts)
    via_network = run_stream(video, sidecar, weights, luts, direct=True)
    assert via_network[0][0].shape == via_tables[0][0].shape
    # interval-64 tables are coarse, the two paths agree only approximately
    diff = via_tables[1][0].astype(np.float64) - via_network[1][0].astype(np.float64)
    assert np.abs(diff).mean() < 16.0


def test_latency_report_formulas():
    report = LatencyReport(t_process_ms=np.array([10.0, 20.0, 30.0, 40.0]), warmup=3)
    assert report.n_future == 0
    assert report.t_wait_ms == 0.0
    assert report.lt_ms == report.mean_ms == 25.0
    assert report.achieved_fps == pytest.approx(40.0)
    assert report.p95_ms == pytest.approx(np.percentile([10, 20, 30, 40], 95))
    assert report.stage_speedup is None
    assert LatencyReport.wait_ms(2, 30.0) == pytest.approx(66.67, abs=0.01)
    hypothetical = LatencyReport(t_process_ms=np.array([5.0]), warmup=0, n_future=2)
    assert hypothetical.lt_ms == pytest.approx(5.0 + 66.666667, abs=1e-3)


def test_latency_report_lines_mention_speedup():
    report = LatencyReport(
        t_process_ms=np.array([10.0]), warmup=0, lut_stage_ms=2.0, direct_stage_ms=10.0
    )
    assert report.stage_speedup == 5.0
    text = "\n".join(report.lines())
    assert "5.00x" in text
    assert "LT" in text


def test_bench_times_frames(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=6, height=6, frames=5, seed=12)
    weights = zero_weights()
    luts = tiny_luts(weights)
    report = bench(read_stream(video, sidecar), weights, luts, warmup=2)
    assert len(report.t_process_ms) == 3
    assert report.mean_ms > 0
    report = bench(read_stream(video, sidecar), weights, luts, warmup=1, compare_direct=True)
    assert report.stage_speedup is not None and report.stage_speedup > 0


def test_bench_needs_frames_beyond_warmup(tmp_path):
    video, sidecar = tmp_path / "v.yuv", tmp_path / "v.qp"
    toy_stream(video, sidecar, width=6, height=6, frames=2, seed=13)
    weights = zero_weights()
    with pytest.raises(ConfigError):
        bench(read_stream(video, sidecar), weights, tiny_luts(weights), warmup=3)


@pytest.fixture(scope="module")
def cli_assets(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    video, sidecar = root / "in.yuv", root / "in.qp"
    toy_stream(video, sidecar, width=16, height=12, frames=5, seed=14)
    weights_path = root / "w.stwt"
    save_weights(random_weights(seed=15), weights_path)
    luts_dir = root / "luts"
    rc = cli.main(
        [
            "build-luts",
            "--weights", str(weights_path),
            "--out", str(luts_dir),
            "--interval-s", "64",
            "--interval-t1", "64",
            "--interval-t2", "64",
        ]
    )
    assert rc == 0
    return {
        "root": root,
        "video": video,
        "sidecar": sidecar,
        "weights": weights_path,
        "luts": luts_dir,
    }


def test_cli_build_luts_writes_tables(cli_assets, capsys):
    for kind, entries in [("s", 5**4), ("t1", 5**6), ("t2", 5**4)]:
        path = cli_assets["luts"] / f"{kind}.stlt"
        assert path.stat().st_size == 12 + 4 * entries


def test_cli_enhance_and_metrics(cli_assets, capsys):
    out_path = cli_assets["root"] / "out.yuv"
    rc = cli.main(
        [
            "enhance",
            "--input", str(cli_assets["video"]),
            "--sidecar", str(cli_assets["sidecar"]),
            "--weights", str(cli_assets["weights"]),
            "--luts", str(cli_assets["luts"]),
            "--out", str(out_path),
        ]
    )
    assert rc == 0
    assert out_path.stat().st_size == cli_assets["video"].stat().st_size
    capsys.readouterr()

    rc = cli.main(
        [
            "metrics",
            "--ref", str(cli_assets["video"]),
            "--test", str(out_path),
            "--sidecar", str(cli_assets["sidecar"]),
        ]
    )
    assert rc == 0
    text = capsys.readouterr().out
    assert "psnr" in text.lower() and "mean" in text.lower()


def test_cli_metrics_csv_format(cli_assets, capsys):
    rc = cli.main(
        [
            "metrics",
            "--ref", str(cli_assets["video"]),
            "--test", str(cli_assets["video"]),
            "--sidecar", str(cli_assets["sidecar"]),
            "--csv",
        ]
    )
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "frame,psnr_db,ssim"
    assert len(lines) == 7  # header + 5 frames + mean row
    frame0 = lines[1].split(",")
    assert frame0[0] == "0"
    assert float(frame0[1]) == 99.0
    assert float(frame0[2]) == 1.0
    assert lines[-1].startswith("mean,")


def test_cli_enhance_deterministic_outputs(cli_assets):
    out_a = cli_assets["root"] / "a.yuv"
    out_b = cli_assets["root"] / "b.yuv"
    for out_path in (out_a, out_b):
        rc = cli.main(
            [
                "enhance",
                "--input", str(cli_assets["video"]),
                "--sidecar", str(cli_assets["sidecar"]),
                "--weights", str(cli_assets["weights"]),
                "--luts", str(cli_assets["luts"]),
                "--out", str(out_path),
            ]
        )
        assert rc == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_cli_bench_reports(cli_assets, capsys):
    rc = cli.main(
        [
            "bench",
            "--input", str(cli_assets["video"]),
            "--sidecar", str(cli_assets["sidecar"]),
            "--weights", str(cli_assets["weights"]),
            "--luts", str(cli_assets["luts"]),
            "--fps", "30",
            "--compare-direct",
        ]
    )
    assert rc == 0
    text = capsys.readouterr().out
    assert "T_process" in text and "LT" in text and "x)" in text


def test_cli_usage_errors_exit_1(capsys):
    assert cli.main([]) == 1
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["enhance", "--input", "x.yuv"]) == 1
    capsys.readouterr()


def test_cli_missing_file_exits_2(cli_assets, capsys):
    rc = cli.main(
        [
            "enhance",
            "--input", str(cli_assets["root"] / "missing.yuv"),
            "--sidecar", str(cli_assets["sidecar"]),
            "--weights", str(cli_assets["weights"]),
            "--luts", str(cli_assets["luts"]),
            "--out", str(cli_assets["root"] / "x.yuv"),
        ]
    )
    assert rc == 2
    capsys.readouterr()


def test_cli_bad_sidecar_exits_2(cli_assets, tmp_path, capsys):
    bad = tmp_path / "bad.qp"
    bad.write_text("12 10\n")
    rc = cli.main(
        [
            "metrics",
            "--ref", str(cli_assets["video"]),
            "--test", str(cli_assets["video"]),
            "--sidecar", str(bad),
        ]
    )
    assert rc == 2
    capsys.readouterr()


def test_cli_numeric_failure_exits_3(cli_assets, tmp_path, capsys):
    # weights huge enough to overflow float32 in the first convolution
    blown = random_weights(seed=16, scale=1e30)
    weights_path = tmp_path / "blown.stwt"
    save_weights(blown, weights_path)
    rc = cli.main(
        [
            "enhance",
            "--input", str(cli_assets["video"]),
            "--sidecar", str(cli_assets["sidecar"]),
            "--weights", str(weights_path),
            "--luts", str(cli_assets["luts"]),
            "--out", str(tmp_path / "x.yuv"),
        ]
    )
    assert rc == 3
    capsys.readouterr()


def test_cli_entry_point_installed():
    import shutil
    import subprocess

    exe = shutil.which("streamlut")
    assert exe, "console script not on PATH"
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("enhance", "build-luts", "metrics", "bench"):
        assert sub in proc.stdout
