#!/usr/bin/env python3
"""Run a recognition evaluation over a manifest-described image dataset.

Thin wrapper over ``cca2d evaluate``; writes accuracy.csv plus per-fit EM
trace tables into --out-dir.
"""

import sys

from cca2d.cli import main

if __name__ == "__main__":
    sys.exit(main(["evaluate", *sys.argv[1:]]))
