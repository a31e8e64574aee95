"""Command-line front door.

Subcommands: toy-gms, ridge-demo, quantile-demo, mnist-demo, all.
Exit codes: 0 success, 1 result-check failure, 2 config error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, DataError, GentuneError
from .experiments import RUNNERS, run_all

_SUBCOMMANDS = {
    "toy-gms": "toy_gms",
    "ridge-demo": "ridge_demo",
    "quantile-demo": "quantile_demo",
    "mnist-demo": "mnist_demo",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gentune",
        description="Amortized hyper-parameter tuning experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in (*_SUBCOMMANDS, "all"):
        p = sub.add_parser(cmd)
        p.add_argument("--config", required=True,
                       help="config file (config directory for 'all')")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--reps", type=int, default=None,
                       help="replication-count override")
        p.add_argument("--threads", type=int, default=1,
                       help="concurrent replications")
    return parser


def _report(results) -> bool:
    ok = True
    for res in results:
        for path in res.csv_paths.values():
            print(f"[{res.name}] wrote {path}")
        for check in res.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"[{res.name}] {status} {check.name}: {check.detail}")
            ok = ok and check.passed
    return ok


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "all":
            results = run_all(Path(args.config), out=args.out, seed=args.seed,
                              reps=args.reps, threads=args.threads)
        else:
            name = _SUBCOMMANDS[args.command]
            cfg = load_config(args.config, name)
            results = [RUNNERS[name](cfg, seed=args.seed, reps=args.reps,
                                     out=args.out, threads=args.threads)]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except GentuneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if _report(results) else 1


if __name__ == "__main__":
    sys.exit(main())
