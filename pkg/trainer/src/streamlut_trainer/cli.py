"""Command-line front end for training.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 numeric
failure.  These match the engine CLI's mapping.
"""

from __future__ import annotations

import argparse
import sys

from .config import TrainConfig
from .datasets import load_clip_dir
from .errors import ConfigError, NumericError, TrainerError
from .training import export_weights, train


class UsageError(TrainerError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; route through the
    # package's error mapping instead so usage errors exit with 1.
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="streamlut-trainer", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train on clip pairs and export engine weights")
    t.add_argument("--data", required=True, help="directory of *.comp.yuv/*.raw.yuv/*.qp triples")
    t.add_argument("--out", required=True, help="output weights file (.stwt)")
    t.add_argument("--stage1-iters", type=int, default=None, help="Charbonnier-stage iterations")
    t.add_argument("--stage2-iters", type=int, default=None, help="MSE fine-tune iterations")
    t.add_argument("--seed", type=int, default=None, help="deterministic run under this seed")
    return p


def cmd_train(args) -> int:
    overrides = {}
    if args.stage1_iters is not None:
        overrides["stage1_iters"] = args.stage1_iters
    if args.stage2_iters is not None:
        overrides["stage2_iters"] = args.stage2_iters
    if args.seed is not None:
        overrides["seed"] = args.seed
    config = TrainConfig(**overrides)
    pairs = load_clip_dir(args.data)

    def log(stage, it, value):
        if it % 50 == 0:
            print(f"{stage} iter {it}: loss {value:.6f}")

    model, history = train(pairs, config, log=log)
    export_weights(model, args.out)
    for stage in ("stage1", "stage2"):
        if history[stage]:
            print(
                f"{stage}: {len(history[stage])} iterations, "
                f"loss {history[stage][0]:.6f} -> {history[stage][-1]:.6f}"
            )
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return cmd_train(args)
    except (UsageError, ConfigError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except (TrainerError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
