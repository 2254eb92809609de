"""
Prox-Check Command
Validation suite of every prox against the brute-force oracle
"""

import argparse
from pathlib import Path

from sdr.commands.common import load_config
from sdr.core.config import settings
from sdr.services.reporting import write_prox_check, write_summary
from sdr.services.validation import run_prox_check


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("prox-check", help="validate proxes against the numerical oracle")
    parser.add_argument("--config", metavar="PATH", help="JSON experiment config (for output path)")
    parser.add_argument("--out", metavar="DIR")
    parser.add_argument("--seed", type=int, metavar="U64")
    parser.add_argument("--trials", type=int, default=100, metavar="COUNT")
    parser.add_argument("--pairs", type=int, default=1000, metavar="COUNT")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    rows = run_prox_check(seed=config.seed, trials=args.trials, pairs=args.pairs)

    out = Path(config.output)
    write_prox_check(out / "prox_check.csv", rows)
    write_summary(
        out / "prox_check.json",
        {
            "config": config.model_dump(),
            "version": settings.VERSION,
            "rows": [row.model_dump() for row in rows],
        },
    )

    failed = [row for row in rows if not row.passed]
    for row in failed:
        print(f"❌ {row.family}/{row.check}: max error {row.max_error:.3g} > {row.tolerance:.1g}")
    if failed:
        return 1
    print(f"✅ All {len(rows)} prox checks passed")
    return 0
