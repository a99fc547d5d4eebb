#!/usr/bin/env python3
"""GNAR-HARX Volatility Toolkit launcher."""

import sys

from cli.app import main


if __name__ == "__main__":
    sys.exit(main())
