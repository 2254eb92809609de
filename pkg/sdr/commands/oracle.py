"""
Oracle Command
Compute and store a reference solution of the empirical problem
"""

import argparse
from pathlib import Path

from sdr.commands.common import add_common_arguments, load_config
from sdr.core.config import settings
from sdr.models.schemas import ReferenceSummary
from sdr.services.experiments import build_problem
from sdr.services.oracle import reference_solve
from sdr.services.reporting import write_summary


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("oracle", help="compute a reference solution")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    problem, _ = build_problem(config)
    reference = reference_solve(problem.data, problem.groups, config.reference_budget)
    summary = ReferenceSummary(**reference.model_dump(), config=config, version=settings.VERSION)
    path = write_summary(Path(config.output) / "reference.json", summary)
    print(f"✅ Reference objective {reference.objective:.8g} ({reference.method}), wrote {path}")
    return 0
