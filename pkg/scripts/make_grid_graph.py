#!/usr/bin/env python3
"""Emit a synthetic county-grid graph JSON for experiments and CLI runs."""

import argparse

from districting.graph import save_graph
from districting.synthetic import grid_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=10)
    ap.add_argument("--cols", type=int, default=10)
    ap.add_argument("--county-rows", type=int, default=2)
    ap.add_argument("--county-cols", type=int, default=2)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    g = grid_graph(args.rows, args.cols, county_blocks=(args.county_rows, args.county_cols))
    save_graph(g, args.out)
    print(f"wrote {len(g.nodes)} nodes / {len(g.edges)} edges "
          f"({len(g.counties)} counties) to {args.out}")


if __name__ == "__main__":
    main()
