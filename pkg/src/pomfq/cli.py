"""Command-line entry point.

Subcommands: train, faceoff, ising, ablate, bounds. Exit codes: 0 on
success, 2 for configuration problems, 3 for runtime failures.
"""

import argparse
import sys
import time
from dataclasses import replace

from .checkpoint import CheckpointError
from .config import ConfigError, RunConfig, load_config
from .ising import IsingRunConfig
from .runner import run_ablation, run_bounds, run_faceoff, run_ising, run_training


def _add_common(parser):
    parser.add_argument("--config", metavar="PATH", help="run config file")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed")
    parser.add_argument("--out", default="out", metavar="DIR",
                        help="output directory")
    parser.add_argument("--replicas", type=int, metavar="N")
    parser.add_argument("--episodes", type=int, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pomfq",
        description="Mean-field Q-learning under partial observability: "
                    "training, faceoffs, the lattice benchmark, view-radius "
                    "ablation, and deviation-bound checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train both groups against each other")
    _add_common(p)
    p.add_argument("--resume", metavar="CKPT", help="continue from a checkpoint")
    p.add_argument("--timing", action="store_true",
                   help="record real wall time per episode (breaks bit-exact "
                        "reproducibility of the CSV)")

    p = sub.add_parser("faceoff", help="pit two trained checkpoints against "
                                       "each other")
    p.add_argument("checkpoint_a", metavar="CKPT_A")
    p.add_argument("checkpoint_b", metavar="CKPT_B")
    p.add_argument("--games", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1, metavar="U64")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--replica", type=int, default=0)

    p = sub.add_parser("ising", help="run the lattice benchmark")
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1, metavar="U64")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--samples", type=int, default=10000,
                   help="posterior draws per mean-action refresh")
    p.add_argument("--alpha", type=float, default=0.1, help="tabular step size")
    p.add_argument("--temperature", type=float, default=0.8)

    p = sub.add_parser("ablate", help="sweep the view radius")
    _add_common(p)
    p.add_argument("--radii", default="2,4,6,8,10",
                   help="comma-separated radii in cells")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("bounds", help="Monte Carlo check of the deviation bound")
    p.add_argument("--n", default="10,100,1000",
                   help="comma-separated sample counts")
    p.add_argument("--delta", type=float, default=0.9)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=1, metavar="U64")
    p.add_argument("--out", default="out", metavar="DIR")
    return parser


def _load_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if args.replicas is not None:
        overrides["replicas"] = args.replicas
    return replace(cfg, **overrides) if overrides else cfg


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = _load_run_config(args)
            timer = time.perf_counter if args.timing else None
            paths = run_training(cfg, args.out, resume=args.resume, timer=timer)
            print(f"wrote {paths['csv']} and {paths['checkpoint']}")
        elif args.command == "faceoff":
            result = run_faceoff(args.checkpoint_a, args.checkpoint_b,
                                 args.games, args.seed, out_dir=args.out,
                                 replica=args.replica)
            print(f"{result.pairing}: wins_a={result.wins_a} "
                  f"wins_b={result.wins_b} draws={result.draws} "
                  f"fisher_p={result.fisher_p:.4g}")
        elif args.command == "ising":
            config = IsingRunConfig(episodes=args.episodes,
                                    sample_count=args.samples,
                                    alpha=args.alpha,
                                    temperature=args.temperature)
            report = run_ising(args.episodes, args.seed, out_dir=args.out,
                               config=config)
            print(f"final D={report.d:.4g}; wrote {args.out}/ising.csv")
        elif args.command == "ablate":
            cfg = _load_run_config(args)
            timer = time.perf_counter if args.timing else None
            radii = _parse_int_list(args.radii)
            path = run_ablation(cfg, args.out, radii=radii, timer=timer)
            print(f"wrote {path}")
        elif args.command == "bounds":
            rows = run_bounds(_parse_int_list(args.n), args.delta, args.trials,
                              args.seed, out_dir=args.out)
            for row in rows:
                print(f"n={row['n']}: bound={row['bound']:.5f} "
                      f"coverage={row['coverage']:.4f}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
