"""
Probe Command
Monte-Carlo estimate of how the ergodic averages concentrate as gamma shrinks
"""

import argparse
from pathlib import Path

import numpy as np

from sdr.commands.common import add_common_arguments, load_config, load_reference
from sdr.core.config import settings
from sdr.core.errors import ConfigError
from sdr.models.schemas import ProbeSummary
from sdr.services.experiments import build_problem
from sdr.services.oracle import concentration_probe
from sdr.services.reporting import write_csv, write_probe_table, write_summary


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("probe", help="P(d(xbar_n, argmin) >= eps) across step sizes")
    add_common_arguments(parser)
    parser.add_argument("--gammas", metavar="LIST", help="comma-separated step sizes")
    parser.add_argument("--iters", type=int, metavar="COUNT")
    parser.add_argument("--seeds", type=int, metavar="COUNT")
    parser.add_argument("--epsilon", type=float, metavar="REAL")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    problem, _ = build_problem(config)
    reference = load_reference(args.reference, problem, config.reference_budget)
    epsilon = config.epsilon
    if epsilon is None:
        reference_norm = float(np.linalg.norm(reference.vector()))
        if reference_norm == 0.0:
            raise ConfigError(
                "the reference solution is 0, so relative_epsilon gives epsilon = 0; pass --epsilon",
                field="epsilon",
            )
        epsilon = config.relative_epsilon * reference_norm

    report = concentration_probe(
        problem, config.gammas, config.n_iters, config.n_seeds, epsilon,
        reference=reference, base_seed=config.seed, record_every=config.record_every,
        init_scale=config.init_scale,
    )

    out = Path(config.output)
    write_probe_table(out / "probe.csv", report.rows)
    write_csv(
        out / "drift.csv",
        ["gamma", "iteration", "mean_drift"],
        ([float(gamma), int(n), value] for gamma, series in report.drift.items() for n, value in series),
    )
    write_summary(
        out / "probe.json",
        ProbeSummary(**report.model_dump(), epsilon=epsilon, config=config, version=settings.VERSION),
    )

    for row in report.rows:
        print(f"📊 gamma={row.gamma:g}: P(d >= {epsilon:.3g}) = {row.prob_final:.2f}, cesaro = {row.cesaro_mean:.3f}")
    print(f"✅ Wrote {out / 'probe.csv'}")
    return 0
