#!/usr/bin/env python3
"""Tabulate the optimality/suboptimality regime over a (p, sigma) grid.

Prints a CSV to stdout: one row per grid point with the control value, the
explicit sandwich bounds, and the regime label.

Example:
    python scripts/regime_map.py --d 10000 > regime_map.csv
"""

import argparse
import csv
import sys

import numpy as np

from lpseq.rates import RateQuery, classify_regime


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=10_000)
    parser.add_argument("--p-grid", type=int, default=25)
    parser.add_argument("--sigma-grid", type=int, default=25)
    args = parser.parse_args()

    ps = np.concatenate([np.linspace(0.2, 1.95, args.p_grid // 2),
                         np.linspace(2.05, 4.0, args.p_grid - args.p_grid // 2)])
    sigmas = np.geomspace(1e-4, 10.0, args.sigma_grid)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["p", "sigma", "control_value", "lower_bound", "upper_bound",
                     "label", "subinterval"])
    for p in ps:
        for sigma in sigmas:
            rep = classify_regime(RateQuery(p=float(p), d=args.d, sigma=float(sigma)))
            writer.writerow([f"{p:.4f}", f"{sigma:.6g}", f"{rep.control_value:.6g}",
                             f"{rep.lower_bound:.6g}", f"{rep.upper_bound:.6g}",
                             rep.label.value, rep.subinterval])
    return 0


if __name__ == "__main__":
    sys.exit(main())
