"""Command-line front end: enhance, build-luts, metrics, bench.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .enhancement import NET_KINDS, EnhancementNet, build_all_luts
from .errors import NumericError, StreamLutError, UsageError
from .lut import LUT_FILENAMES, LutSpec, load_luts, lut_size_bytes, save_lut
from .metrics import psnr, ssim
from .nn import load_weights
from .pipeline import EngineConfig, bench, enhance_stream, quant_params_from_weights
from .video_io import read_sidecar, read_stream, write_stream


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; route through the
    # package's error mapping instead so usage errors exit with 1.
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="streamlut", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enhance", help="enhance a raw YUV420p stream")
    e.add_argument("--input", required=True, help="raw yuv420p 8-bit input file")
    e.add_argument("--sidecar", required=True, help="text sidecar: dims + per-frame QP")
    e.add_argument("--weights", required=True, help="weights file")
    e.add_argument("--luts", required=True, help="directory holding s/t1/t2 tables")
    e.add_argument("--out", required=True, help="output raw yuv420p file")
    e.add_argument("--window", type=int, default=7, help="reference window capacity")
    e.add_argument(
        "--direct",
        action="store_true",
        help="use the network path instead of table queries (reference mode)",
    )

    b = sub.add_parser("build-luts", help="enumerate the networks into table files")
    b.add_argument("--weights", required=True)
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--interval-s", type=int, default=4)
    b.add_argument("--interval-t1", type=int, default=16)
    b.add_argument("--interval-t2", type=int, default=4)

    m = sub.add_parser("metrics", help="PSNR/SSIM between two streams")
    m.add_argument("--ref", required=True, help="reference raw yuv420p file")
    m.add_argument("--test", required=True, help="test raw yuv420p file")
    m.add_argument("--sidecar", required=True, help="sidecar describing both streams")
    m.add_argument("--csv", action="store_true", help="machine-readable output")

    n = sub.add_parser("bench", help="per-frame latency benchmark")
    n.add_argument("--input", required=True)
    n.add_argument("--sidecar", required=True)
    n.add_argument("--weights", required=True)
    n.add_argument("--luts", required=True)
    n.add_argument("--fps", type=float, default=30.0, help="assumed stream rate")
    n.add_argument(
        "--compare-direct",
        action="store_true",
        help="also time the network path on identical inputs",
    )
    return p


def cmd_enhance(args) -> int:
    weights = load_weights(args.weights)
    luts = load_luts(args.luts)
    config = EngineConfig(window=args.window)
    frames = read_stream(args.input, args.sidecar)
    write_stream(args.out, enhance_stream(frames, weights, luts, config, direct=args.direct))
    header, _ = read_sidecar(args.sidecar)
    path = "network" if args.direct else "table"
    print(f"enhanced {header.frame_count} frames ({header.width}x{header.height}, {path} path) -> {args.out}")
    return 0


def cmd_build_luts(args) -> int:
    weights = load_weights(args.weights)
    qp_input, qp_ref = quant_params_from_weights(weights, EngineConfig())
    nets = {
        kind: EnhancementNet.from_weights(kind, weights, qp_input.s, qp_ref.s)
        for kind in NET_KINDS
    }
    specs = {
        "s": LutSpec("s", 4, args.interval_s),
        "t1": LutSpec("t1", 6, args.interval_t1),
        "t2": LutSpec("t2", 4, args.interval_t2),
    }
    os.makedirs(args.out, exist_ok=True)
    luts = build_all_luts(nets, specs)
    for kind in NET_KINDS:
        path = os.path.join(args.out, LUT_FILENAMES[kind])
        save_lut(luts[kind], path)
        print(f"{path}: {lut_size_bytes(luts[kind].spec)} payload bytes")
    return 0


def cmd_metrics(args) -> int:
    ref_frames = read_stream(args.ref, args.sidecar)
    test_frames = read_stream(args.test, args.sidecar)
    rows = []
    for i, ((ry, _, _, _), (ty, _, _, _)) in enumerate(zip(ref_frames, test_frames)):
        rows.append((i, psnr(ry, ty), ssim(ry, ty)))
    mean_psnr = sum(r[1] for r in rows) / len(rows)
    mean_ssim = sum(r[2] for r in rows) / len(rows)
    if args.csv:
        print("frame,psnr_db,ssim")
        for i, p, s in rows:
            print(f"{i},{p:.4f},{s:.6f}")
        print(f"mean,{mean_psnr:.4f},{mean_ssim:.6f}")
    else:
        for i, p, s in rows:
            print(f"frame {i}: psnr {p:.4f} dB  ssim {s:.6f}")
        print(f"mean: psnr {mean_psnr:.4f} dB  ssim {mean_ssim:.6f}")
    return 0


def cmd_bench(args) -> int:
    weights = load_weights(args.weights)
    luts = load_luts(args.luts)
    frames = read_stream(args.input, args.sidecar)
    report = bench(
        frames, weights, luts, fps=args.fps, compare_direct=args.compare_direct
    )
    for line in report.lines():
        print(line)
    return 0


_COMMANDS = {
    "enhance": cmd_enhance,
    "build-luts": cmd_build_luts,
    "metrics": cmd_metrics,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except (StreamLutError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
