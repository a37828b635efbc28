#!/usr/bin/env python3
"""Variance-shrink study: root variance vs leaf count under i.i.d. noise.

Depth-1 equal-weight trees with leaves at 0.5 and corruption noise whose
leaf variance is exactly alpha/12; empirical root variance should track
sigma^2 / K (log-log slope -1).
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from softprop.simlab import (NoiseModel, SyntheticTreeSpec,
                             monte_carlo_bias_variance)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha", type=float, default=0.48)
    parser.add_argument("--runs", type=int, default=100_000)
    parser.add_argument("--max-k", type=int, default=32)
    args = parser.parse_args()

    sigma2 = args.alpha / 12.0
    ks = [2 ** i for i in range(1, int(math.log2(args.max_k)) + 1)]
    print(f"leaf variance sigma^2 = {sigma2:.4f}")
    print(f"{'K':>4} {'empirical':>12} {'sigma^2/K':>12} {'ratio':>8}")
    variances = []
    for k in ks:
        spec = SyntheticTreeSpec(depth=1, branching=k, leaf_values=[0.5] * k)
        report = monte_carlo_bias_variance(
            spec, NoiseModel("uncertain", args.alpha), rule="linear",
            runs=args.runs, seed=k)
        variances.append(report.variance)
        print(f"{k:>4} {report.variance:>12.6f} {sigma2 / k:>12.6f} "
              f"{report.variance / (sigma2 / k):>8.3f}")
    slope = float(np.polyfit(np.log(ks), np.log(variances), 1)[0])
    print(f"log-log slope: {slope:.3f} (ideal -1)")


if __name__ == "__main__":
    main()
