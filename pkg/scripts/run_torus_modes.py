#!/usr/bin/env python3
"""Trace sup |j(t)| for a torus shear-flow perturbation and classify it as
bounded (gradient data) or linearly growing (divergence-free component).

Usage: run_torus_modes.py [--kind gradient|divfree|mixed] [--t-end 60] [...]
"""

import sys

from baroflow.cli import main

if __name__ == "__main__":
    argv = ["torus-modes", "--n-grid", "32", "--t-end", "60",
            "--n-samples", "300", "--kind", "gradient"]
    argv += sys.argv[1:]
    sys.exit(main(argv))
