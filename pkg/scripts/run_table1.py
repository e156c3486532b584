"""Distance table for intensity 25 with Uniform(0.05, 0.1) radii, compared with the published means.

Usage: python3 scripts/run_table1.py [--reps 100] [--workers 1] [--out results/table1]
"""

import sys

from spheregrains.cli import main

if __name__ == "__main__":
    sys.exit(main(["table", "--gamma", "25", "--radius-dist", "uniform:0.05:0.1", "--seed", "1000",
                   "--out", "results/table1", *sys.argv[1:]]))
