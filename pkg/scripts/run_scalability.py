#!/usr/bin/env python3
"""Scalability of recursive runs: node/work growth vs wall time.

Sleep-simulated agents; work grows like K^n while wall time follows
n * T_A + ceil(K^n / P) * T_G. Prints the per-depth table with ratios.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from softprop.simlab import emit_plot_data, scalability_benchmark


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--branching", type=int, default=3)
    parser.add_argument("--max-depth", type=int, default=4)
    parser.add_argument("--grounder-latency", type=float, default=0.05)
    parser.add_argument("--analyzer-latency", type=float, default=0.02)
    parser.add_argument("--workers", type=int, default=64)
    parser.add_argument("--out", default="scalability.csv")
    args = parser.parse_args()

    rows = scalability_benchmark(
        branching=args.branching,
        depths=tuple(range(1, args.max_depth + 1)),
        grounder_latency_s=args.grounder_latency,
        workers=args.workers,
        analyzer_latency_s=args.analyzer_latency)
    Path(args.out).write_text(emit_plot_data(rows), encoding="utf-8")

    print(f"{'n':>3} {'nodes':>7} {'leaves':>7} {'grounds':>8} "
          f"{'wall_ms':>9} {'node x':>7} {'time x':>7}")
    prev = None
    for row in rows:
        node_ratio = f"{row.node_count / prev.node_count:.2f}" if prev else "-"
        time_ratio = f"{row.wall_ms / prev.wall_ms:.2f}" if prev else "-"
        print(f"{row.recursion_depth:>3} {row.node_count:>7} "
              f"{row.leaf_count:>7} {row.grounder_calls:>8} "
              f"{row.wall_ms:>9.1f} {node_ratio:>7} {time_ratio:>7}")
        prev = row
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
