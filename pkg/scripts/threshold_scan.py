#!/usr/bin/env python3
"""Scan the threshold region: pL(d, p) for d in {3,5,7} near p ~ 1%.

Emits one CSV row per (d, p) cell on stdout.  The threshold is where the
pL curves for different distances cross.

Usage:
    python3 scripts/threshold_scan.py --shots 50000
"""

import argparse

from corrsurf.cli import emit_row, CSV_HEADER
from corrsurf.montecarlo import RunConfig, estimate
from corrsurf.noise import NoiseModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", default="3,5,7")
    ap.add_argument("--p", default="4e-3,6e-3,8e-3,1e-2,1.2e-2")
    ap.add_argument("--shots", type=int, default=50_000)
    ap.add_argument("--target", type=int, default=400)
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()

    print(CSV_HEADER)
    for d in [int(s) for s in args.d.split(",")]:
        for p in [float(s) for s in args.p.split(",")]:
            cfg = RunConfig(
                d=d, p=p, model=NoiseModel(p=p), shots=args.shots,
                seed=args.seed, target_failures=args.target,
            )
            print(emit_row(estimate(cfg)), flush=True)


if __name__ == "__main__":
    main()
