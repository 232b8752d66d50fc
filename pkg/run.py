#!/usr/bin/env python3
"""
Main entry point for the Soliton Lab command line.
"""

import sys

from dotenv import load_dotenv


def main() -> int:
    """Load .env and hand the arguments to the lab CLI."""
    load_dotenv()

    from src.soliton_lab.cli import main as cli_main

    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
