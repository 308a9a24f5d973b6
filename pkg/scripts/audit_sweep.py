#!/usr/bin/env python3
"""Sweep the exact privacy audit over a batch-size / epsilon / delta grid.

Writes one CSV row per cell with both hockey-stick divergences and whether
the cell meets its delta target.  Batch sizes may be given as integers or as
`tau` / `4tau` to track the (delta-dependent) regime boundary.
"""
from __future__ import annotations

import argparse
import math
import sys

from shufflebandit.audit import hockey_stick
from shufflebandit.mechanism import derive_params


def resolve_m(token: str, tau: float) -> int:
    if token == "tau":
        return math.ceil(tau)
    if token == "4tau":
        return 4 * math.ceil(tau)
    return int(token)


def main():
    ap = argparse.ArgumentParser(description="Exact privacy audit sweep")
    ap.add_argument("--m", default="1,5,tau,4tau",
                    help="comma list of batch sizes (integers, tau, or 4tau)")
    ap.add_argument("--eps", default="0.3,0.9")
    ap.add_argument("--delta", default="1e-2,1e-5")
    args = ap.parse_args()

    print("m,epsilon,delta,div_forward,div_backward,pass")
    worst = True
    for eps in (float(t) for t in args.eps.split(",")):
        for delta in (float(t) for t in args.delta.split(",")):
            params = derive_params(eps, delta)
            for token in args.m.split(","):
                rep = hockey_stick(resolve_m(token.strip(), params.tau), params)
                worst = worst and rep.passed
                print(f"{rep.m},{eps},{delta},{rep.divergence_forward!r},"
                      f"{rep.divergence_backward!r},{rep.passed}")
    sys.exit(0 if worst else 1)


if __name__ == "__main__":
    main()
