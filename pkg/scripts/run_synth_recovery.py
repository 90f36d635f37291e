#!/usr/bin/env python3
"""Run the synthetic loading-recovery experiment grid.

Thin wrapper over ``cca2d synth-recovery``; writes recovery_trials.csv and
recovery_summary.csv into --out-dir.
"""

import sys

from cca2d.cli import main

if __name__ == "__main__":
    sys.exit(main(["synth-recovery", *sys.argv[1:]]))
