"""Command-line entry point.

Subcommands:
  run       inference over a model and input images, optional oracle verify
  sweep     cycles and utilization across parallelization factors and
            input-threshold scalings
  genmodel  write a seeded random model file

Exit codes: 0 success / verified, 1 verification mismatch, 2 usage or
I/O error, 3 model validation error.
"""

import argparse
import random
import sys

from spikesim import model_io
from spikesim.encoder import ThresholdSchedule
from spikesim.errors import ModelFormatError, ModelValidationError, SpikesimError
from spikesim.metrics import report
from spikesim.model import NetworkSpec
from spikesim.scheduler import PARALLEL_FACTORS, RunPlan, run_network
from spikesim.verify import verify_against_dense

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_MODEL = 3


def _load_inputs(path: str, limit: int | None) -> list[list[list[int]]]:
    if path.endswith(".pgm"):
        frames = [model_io.load_pgm(path)]
    else:
        frames = model_io.load_idx_images(path)
    return frames[:limit] if limit else frames


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-m", "--model", required=True, help="model file (.ssnn)")
    p.add_argument("-i", "--input", required=True, help="IDX or PGM input file")
    p.add_argument("--limit", type=int, default=None, help="max images to process")
    p.add_argument("--parallel", type=int, default=1, choices=PARALLEL_FACTORS)
    p.add_argument("--clock", type=float, default=None, metavar="MHZ",
                   help="clock frequency for FPS estimates")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized fixtures")
    p.add_argument("--threads", type=int, default=1,
                   help="1 = fully sequential, bit-identical execution")
    p.add_argument("--format", choices=("text", "json"), default="text")


def cmd_run(args: argparse.Namespace) -> int:
    net = model_io.load_model(args.model)
    frames = _load_inputs(args.input, args.limit)
    trace = [] if args.trace else None
    plan = RunPlan(parallel=args.parallel, clock_mhz=args.clock, trace=trace)
    status = EXIT_OK
    for idx, frame in enumerate(frames):
        if args.verify:
            result = verify_against_dense(net, frame, plan)
            run = result.run
            if result.ok:
                print(f"image {idx}: label={run.label} verified: "
                      f"{len(net.layers)} layers x {net.timesteps} steps equal")
            else:
                status = EXIT_MISMATCH
                print(f"image {idx}: VERIFY FAILED")
                for line in result.mismatches:
                    print(f"  {line}")
        else:
            run = run_network(net, frame, plan)
            print(f"image {idx}: label={run.label}")
        print(report(run.stats, args.format))
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("\n".join(trace) + "\n")
    return status


def _scaled_schedule(net: NetworkSpec, factor: float) -> tuple[int, ...] | None:
    scaled = []
    for p in net.input_thresholds:
        v = max(1, min(255, round(p * factor)))
        if scaled and v <= scaled[-1]:
            return None
        scaled.append(v)
    return tuple(scaled)


def cmd_sweep(args: argparse.Namespace) -> int:
    net = model_io.load_model(args.model)
    frames = _load_inputs(args.input, args.limit or 1)
    frame = frames[0]
    print("parallel sweep:")
    print(f"{'P':>3} {'makespan':>10} {'conv_cycles':>12} {'pe_util':>8} {'label':>5}")
    for factor in PARALLEL_FACTORS:
        run = run_network(net, frame, RunPlan(parallel=factor, clock_mhz=args.clock))
        conv = sum(l.conv_total_cycles for l in run.stats.layers)
        util = (sum(l.conv_valid_cycles for l in run.stats.layers) / conv) if conv else 0.0
        print(f"{factor:>3} {run.stats.makespan_cycles:>10} {conv:>12} "
              f"{util:>8.4f} {run.label:>5}")
    print("sparsity sweep (input threshold scaling):")
    print(f"{'scale':>6} {'events':>8} {'conv_valid':>10} {'conv_cycles':>12}")
    for factor in (1.5, 1.25, 1.0, 0.75, 0.5):
        thresholds = _scaled_schedule(net, factor)
        if thresholds is None:
            continue
        ThresholdSchedule(thresholds)  # re-check monotonicity
        scaled = NetworkSpec(net.layers, net.classifier, net.timesteps,
                             thresholds, net.width, net.in_height, net.in_width)
        run = run_network(scaled, frame, RunPlan(parallel=args.parallel))
        events = sum(l.input_events for l in run.stats.layers)
        valid = sum(l.conv_valid_cycles for l in run.stats.layers)
        conv = sum(l.conv_total_cycles for l in run.stats.layers)
        print(f"{factor:>6.2f} {events:>8} {valid:>10} {conv:>12}")
    return EXIT_OK


def cmd_genmodel(args: argparse.Namespace) -> int:
    net = model_io.random_model(args.seed, args.shape, width=args.width,
                                timesteps=args.timesteps)
    model_io.save_model(net, args.out)
    print(f"wrote {args.out}: shape={args.shape} width={args.width} "
          f"T={args.timesteps} seed={args.seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikesim")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run inference")
    _add_common(p_run)
    p_run.add_argument("--verify", action="store_true",
                       help="check every layer/timestep against the dense oracle")
    p_run.add_argument("--trace", default=None, help="write pipeline trace file")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="parallelization and sparsity sweep")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("genmodel", help="generate a seeded random model")
    p_gen.add_argument("shape", help='e.g. "28x28-32C3-32C3-P3-10C3-F10"')
    p_gen.add_argument("-o", "--out", required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--width", type=int, default=8, choices=(8, 16))
    p_gen.add_argument("--timesteps", type=int, default=5)
    p_gen.set_defaults(func=cmd_genmodel)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(getattr(args, "seed", 0))
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelFormatError, ModelValidationError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpikesimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
