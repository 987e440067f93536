#!/usr/bin/env python3
"""Seeded random scan of the 1D sectional curvature sign for a polytropic
pressure law: nonnegative for gamma <= 3, sign-indefinite beyond.

Usage: run_curvature_scan.py [--gamma 2] [--trials 200] [--seed 7] [...]
"""

import sys

from baroflow.cli import main

if __name__ == "__main__":
    argv = ["curvature-scan", "--gamma", "2", "--trials", "200", "--seed", "7"]
    argv += sys.argv[1:]
    sys.exit(main(argv))
