#!/usr/bin/env python3
"""Build and verify the summary-table rows (same as `polarspread table`)."""

import sys

from polarspread.cli import main

if __name__ == "__main__":
    sys.exit(main(["table"] + sys.argv[1:]))
