#!/usr/bin/env python3
"""Tabulate the rotating-disc mode frequencies: Sturm-Liouville eigenvalues,
characteristic cubic roots, and the Rayleigh/downstream bound margins.

Usage: run_disc_spectrum.py [--omega 1] [--c 1] [--rho0 1] [...]
"""

import sys

from baroflow.cli import main

if __name__ == "__main__":
    argv = ["disc-spectrum", "--n-max", "16", "--k-max", "12",
            "--n-nodes", "400"]
    argv += sys.argv[1:]
    sys.exit(main(argv))
