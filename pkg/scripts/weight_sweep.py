#!/usr/bin/env python3
"""Sweep the intra-county weight parameter and report county-split behavior.

Runs one chain per weight value on a synthetic county grid and prints the
mean counties_split / total_splits per weight, the experiment used to pick a
working weight for the main ensembles. Writes a CSV when --out is given.
"""

import argparse
import csv
import time

from districting.chain import ChainConfig, make_rng, run_chain
from districting.partition import BalanceSpec, seed_plan
from districting.synthetic import grid_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=10)
    ap.add_argument("--cols", type=int, default=10)
    ap.add_argument("--districts", type=int, default=4)
    ap.add_argument("--tol", type=float, default=0.05)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--rng-seed", type=int, default=0)
    ap.add_argument("--weights", default="1,5,10,15,20,25")
    ap.add_argument("--out", default=None, help="optional CSV of (weight, mean splits)")
    args = ap.parse_args()

    g = grid_graph(args.rows, args.cols, county_blocks=(2, 2))
    spec = BalanceSpec.for_graph(g, args.districts, args.tol)
    seed = seed_plan(g, args.districts, spec, make_rng(args.rng_seed))

    rows = []
    for weight in (float(w) for w in args.weights.split(",")):
        cfg = ChainConfig(
            weight=weight,
            tolerance=args.tol,
            steps=args.steps,
            rng_seed=args.rng_seed,
            k=args.districts,
        )
        started = time.time()
        split_total = 0
        splits_total = 0
        for record in run_chain(g, seed, cfg, validate=False):
            split_total += record.counties_split
            splits_total += record.total_splits
        rows.append(
            {
                "weight": weight,
                "mean_counties_split": split_total / args.steps,
                "mean_total_splits": splits_total / args.steps,
            }
        )
        print(
            f"w={weight:>5.1f}  counties_split={rows[-1]['mean_counties_split']:.3f}  "
            f"total_splits={rows[-1]['mean_total_splits']:.3f}  "
            f"({time.time() - started:.1f}s)"
        )

    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["weight", "mean_counties_split", "mean_total_splits"]
            )
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
