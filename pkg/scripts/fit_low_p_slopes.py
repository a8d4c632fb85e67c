#!/usr/bin/env python3
"""Fit the low-p logical-error slopes for a list of distances.

For each distance, runs a small sweep in target-failures mode and fits
log pL vs log p.  The slope should approach ceil(d/2) well below
threshold.

Usage:
    python3 scripts/fit_low_p_slopes.py --d 3,5 --target 400
"""

import argparse
import sys

from corrsurf.cli import emit_row, CSV_HEADER
from corrsurf.montecarlo import RunConfig, estimate, fit_slope
from corrsurf.noise import NoiseModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", default="3,5")
    ap.add_argument("--p", default="1e-3,1.7e-3,3e-3")
    ap.add_argument("--target", type=int, default=400)
    ap.add_argument("--max-shots", type=int, default=2_000_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    ds = [int(s) for s in args.d.split(",")]
    ps = [float(s) for s in args.p.split(",")]

    print(CSV_HEADER)
    for d in ds:
        rows = []
        for p in ps:
            cfg = RunConfig(
                d=d, p=p, model=NoiseModel(p=p), shots=args.max_shots,
                seed=args.seed, target_failures=args.target,
            )
            row = estimate(cfg)
            rows.append(row)
            print(emit_row(row), flush=True)
        slope, err = fit_slope(rows)
        print(f"# d={d}: slope {slope:.3f} +- {err:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
