"""Command-line interface.

Subcommands: pressure | spectrum | shadow | katok | crosscheck | selftest.
Exit codes: 0 success, 1 validation error, 2 budget/spacing refusal; errors
are reported as machine-readable JSON on stderr.
"""

import argparse
import sys

from .errors import BudgetExceeded, ConfigError, FiberdynError, SpacingTooSmall
from .harness import TASKS, error_json, load_config, parse_config, run


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fiberdyn",
        description="numerical thermodynamic formalism for skew product systems")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        if task != "selftest":
            p.add_argument("--config", required=True, help="config file path")
        else:
            p.add_argument("--config", required=False, help="optional config file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed override")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--budget", type=int, default=None,
                       help="fiber-evaluation budget per search")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for independent grid points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, seed=args.seed, out_dir=args.out,
                              budget=args.budget, threads=args.threads,
                              task_override=args.task)
        else:
            cfg = parse_config("[task]\nkind = selftest\n", seed=args.seed,
                               out_dir=args.out, budget=args.budget,
                               threads=args.threads, task_override=args.task)
        return run(cfg)
    except (BudgetExceeded, SpacingTooSmall) as exc:
        print(error_json(exc), file=sys.stderr)
        return 2
    except FiberdynError as exc:
        print(error_json(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
