#!/usr/bin/env python3
"""Compare baseline and correlated noise models at a fixed physical rate.

Runs the same (d, p) cell under each model given on the command line and
prints one CSV row per model.

Usage:
    python3 scripts/compare_models.py --d 5 --p 1e-3 \
        --models none exp:10 exp:1000 pair:1,2 column:1
"""

import argparse
import dataclasses

from corrsurf.cli import emit_row, parse_model, CSV_HEADER
from corrsurf.montecarlo import RunConfig, estimate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--p", type=float, default=1e-3)
    ap.add_argument("--shots", type=int, default=200_000)
    ap.add_argument("--target", type=int, default=200)
    ap.add_argument("--seed", type=int, default=21)
    ap.add_argument("--models", nargs="+", default=["none", "exp:10", "pair:1,2"])
    args = ap.parse_args()

    print(CSV_HEADER)
    for spec in args.models:
        model = dataclasses.replace(parse_model(spec), p=args.p)
        cfg = RunConfig(
            d=args.d, p=args.p, model=model, shots=args.shots,
            seed=args.seed, target_failures=args.target,
        )
        print(emit_row(estimate(cfg)), flush=True)


if __name__ == "__main__":
    main()
