#!/usr/bin/env python3
"""Run the main regret comparison and print a quick per-cell summary.

Equivalent to `shufflebandit run --config ...` plus a console digest of the
final-checkpoint regrets.  Use scripts/configs/desk.cfg for a laptop-scale
run.
"""
from __future__ import annotations

import argparse

from shufflebandit.harness import parse_config, run_experiment


def main():
    ap = argparse.ArgumentParser(description="Run a regret experiment from config")
    ap.add_argument("--config", required=True)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--full-trace", action="store_true",
                    help="also write per-user regret traces")
    args = ap.parse_args()

    config = parse_config(args.config)
    result = run_experiment(config, threads=args.threads,
                            full_trace=args.full_trace)
    final = config.checkpoints[-1]
    print(f"wrote {config.output}/results.csv")
    for row in result.rows:
        if row.checkpoint != final:
            continue
        grid = "" if row.epsilon is None else \
            f" eps={row.epsilon} delta={row.delta}"
        print(f"[{row.variant}]{grid} T={final}: "
              f"regret {row.mean_regret:.1f} +- {row.stderr:.1f} "
              f"(violations {row.clean_violations})")


if __name__ == "__main__":
    main()
