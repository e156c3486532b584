"""Distance table for intensity 100 with Uniform(0.05, 0.1) radii, compared with the published means.

Usage: python3 scripts/run_table2.py [--reps 100] [--workers 1] [--out results/table2]
"""

import sys

from spheregrains.cli import main

if __name__ == "__main__":
    sys.exit(main(["table", "--gamma", "100", "--radius-dist", "uniform:0.05:0.1", "--seed", "1000",
                   "--out", "results/table2", *sys.argv[1:]]))
