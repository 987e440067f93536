#!/usr/bin/env python3
"""Integrate a sine-wave geodesic toward its gradient catastrophe and emit
energy, minimum density, and flow-map Jacobian diagnostics; exits 1 with a
machine-readable error once the shock is reached.

Usage: run_shock_portrait.py [--amplitude 0.5] [--t-end 1.9] [...]
"""

import sys

from baroflow.cli import main

if __name__ == "__main__":
    argv = ["geodesic", "--n-grid", "256", "--dt", "0.004", "--t-end", "1.9"]
    argv += sys.argv[1:]
    sys.exit(main(argv))
