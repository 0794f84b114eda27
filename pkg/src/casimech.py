#!/usr/bin/env python3
"""
casimech command line

Usage:
    python src/casimech.py resonance_scan --config configs/resonance_scan.toml --out results
"""
import os
import sys

# Add this directory to path to import our modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from sweeps.cli import main

if __name__ == "__main__":
    sys.exit(main())
