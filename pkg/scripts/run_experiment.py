#!/usr/bin/env python3
"""Thin wrapper so experiments can be run without installing the console script."""

import sys

from stmg.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", *sys.argv[1:]]))
