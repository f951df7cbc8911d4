"""Experiment CLI: run | convergence | cfl-scan | decay | topology.

Each subcommand reads a sectioned key-value config file, runs the matching
experiment, and writes a CSV result table.  Exit codes: 0 success, 2 bad
configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import BracketError, ConfigError, load_config, run_experiment, write_csv
from .linalg import SolverError

_SUBCOMMANDS = ("run", "convergence", "cfl-scan", "decay", "topology")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavesplit",
        description="Domain-splitting experiments for the acoustic wave equation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", default=None, help="output CSV path (overrides config)")
        p.add_argument("--threads", type=int, default=None,
                       help="subdomain solver threads (overrides config)")
        p.add_argument("--seed", type=int, default=None,
                       help="mesh perturbation seed (overrides config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides={
            "out_path": args.out,
            "threads": args.threads,
            "seed": args.seed,
        })
        cfg.kind = args.command
        cfg.validate()
        rows = run_experiment(cfg)
        write_csv(rows, cfg.out_path)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, BracketError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {len(rows)} rows to {cfg.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
