"""Asymptotic variances by quasi-Monte Carlo plus the growing-window check.

Writes the limits for C = [0, 0.075] and the half-line, then the empirical
variance of the scaled weighted measure on windows [-n, n]^2, n = 1, 2, 4.

Usage: python3 scripts/run_variance.py [--reps 500] [--out results/variance.json]
"""

import sys

from spheregrains.cli import main

if __name__ == "__main__":
    sys.exit(main(["variance", "--gamma", "25", "--radius-dist", "uniform:0.05:0.1", "--epsilon", "0.05",
                   "--radius-set", "upto:0.075", "--reps", "500", "--seed", "20000",
                   "--out", "results/variance.json", *sys.argv[1:]]))
