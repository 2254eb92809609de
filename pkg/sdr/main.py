"""
Stochastic Douglas-Rachford CLI
Main entry point
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from sdr.core.config import settings
from sdr.core.errors import SdrError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdr",
        description=f"{settings.PROJECT_NAME} {settings.VERSION}",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include command modules
    from sdr.commands import benchmark, oracle, probe, prox_check, solve
    for command in (solve, benchmark, probe, prox_check, oracle):
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SdrError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
