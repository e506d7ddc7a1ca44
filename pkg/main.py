"""
wavelab - stability laboratory for Nagumo travelling fronts

Source-checkout entry point; the installed package exposes the same command
as ``wavelab``.

Usage:
    python main.py constants                                # Derived constants
    python main.py verify --config configs/verify.cfg       # Inequality suite
    python main.py simulate-det --config configs/decay.cfg  # Deterministic run
    python main.py --help                                   # Show usage
"""

import sys

from wavelab.cli import main


if __name__ == "__main__":
    sys.exit(main())
