#!/usr/bin/env python3
"""Detect zeros of the Jacobi field along the constant unit-speed flow and
compare them with the closed-form times 2 pi m / n.

Usage: run_conjugate.py [--n 2] [--m-max 3] [extra baroflow flags]
"""

import sys

from baroflow.cli import main

if __name__ == "__main__":
    argv = ["conjugate", "--n", "2", "--m-max", "3", "--n-grid", "128",
            "--dt", "0.005"]
    argv += sys.argv[1:]
    sys.exit(main(argv))
