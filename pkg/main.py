#!/usr/bin/env python3
"""
spindyn: Entanglement Dynamics of Two Interacting Spins.

Command-line entry point. Runs the two-qubit, environment and semiclassical
regimes, Poincare sections and Lyapunov estimates, writing CSV series, gnuplot
scripts and a manifest per job.

Usage:
    python main.py two-qubits --preset case_a --alpha 1 --out run1/
    python main.py semiclassical --preset all --jobs 3 --plots --out semi/
    python main.py poincare --point "1.0,0.0,1.0,0.0" --alpha 0 --crossings 10
    python main.py list-presets

Dependencies:
- numpy / scipy: linear algebra, special functions and root finding
- psutil: memory use recorded in manifests

License: MIT
Version: 1.0.0
"""

import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


def main():
    """Main entry point for the application."""
    try:
        from spindyn.cli.app import run_cli
    except ImportError as e:
        print(f"Error importing dependencies: {e}", file=sys.stderr)
        sys.exit(2)
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
