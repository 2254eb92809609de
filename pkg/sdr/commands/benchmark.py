"""
Benchmark Command
Paired fully versus partially stochastic DR on identical seeds
"""

import argparse
from pathlib import Path

from sdr.commands.common import add_common_arguments, load_config, load_reference
from sdr.services.experiments import build_problem, run_benchmark
from sdr.services.reporting import write_records, write_summary


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("benchmark", help="paired sdr vs psdr comparison")
    add_common_arguments(parser)
    parser.add_argument("--gamma", type=float, metavar="REAL")
    parser.add_argument("--iters", type=int, metavar="COUNT")
    parser.add_argument("--seeds", type=int, metavar="COUNT")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    problem, _ = build_problem(config)
    reference = load_reference(args.reference, problem, config.reference_budget)
    report, series = run_benchmark(config, problem=problem, reference=reference)

    out = Path(config.output)
    for name, trajectory in series.items():
        write_records(out / f"{name}.csv", trajectory.records)
    write_summary(out / "benchmark.json", report)

    print(f"✅ sdr reached F+G <= {report.threshold:.6g} first on {report.sdr_wins}/{len(report.seeds)} seeds")
    print(f"📊 Wrote {out / 'sdr.csv'}, {out / 'psdr.csv'} and {out / 'benchmark.json'}")
    return 0
