#!/usr/bin/env python3
"""Run the full scenario catalog at the default configuration.

Writes results.csv next to this script unless --out is given; any other
gexpect CLI flag is forwarded unchanged.
"""

import pathlib
import sys

from gexpect.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if "--out" not in argv:
        argv += ["--out", str(pathlib.Path(__file__).with_name("results.csv"))]
    sys.exit(main(["run", "--scenario", "all"] + argv))
