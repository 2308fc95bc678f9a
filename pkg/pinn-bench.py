#!/usr/bin/env python3
"""Command-line entry point: `./pinn-bench.py <run|sweep|gen-tableau|gen-reference|verify> ...`."""

import sys

from src.main import main

if __name__ == "__main__":
    sys.exit(main())
