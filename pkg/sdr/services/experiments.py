"""
Experiments
Synthetic SVM + overlapping group lasso data and the paired benchmark of fully
versus partially stochastic DR
"""

import functools
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from sdr.core.config import settings
from sdr.core.linalg import Vector
from sdr.core.rng import DATASET_STREAM, SeededRng
from sdr.models.domain import Dataset, GroupSpec, Problem, Trajectory
from sdr.models.schemas import (
    BenchmarkReport,
    ExperimentConfig,
    HistogramData,
    ReferenceSolution,
    SeedComparison,
)
from sdr.services.oracle import reference_solve
from sdr.services.solvers import run_partially_stochastic_dr, run_stochastic_dr
from sdr.services.workers import map_cells

logger = logging.getLogger(__name__)

BENCHMARK_ALGORITHMS = ("sdr", "psdr")
HISTOGRAM_BINS = 30


def build_group_spec(config: ExperimentConfig) -> GroupSpec:
    if config.groups is not None:
        return GroupSpec.from_lists(config.groups, config.dimension)
    return GroupSpec.chain(config.dimension, config.group_count, config.group_size, config.group_overlap)


def generate_dataset(config: ExperimentConfig, rng: SeededRng) -> Tuple[Dataset, Vector]:
    """Labels from a planted group-sparse w, each flipped with probability `noise`"""
    groups = build_group_spec(config)
    weights = np.zeros(config.dimension)
    # capped at the group count
    active = np.sort(rng.choice(groups.count, size=min(config.active_groups, groups.count), replace=False))
    for j in active:
        group = groups[int(j)]
        weights[group] = rng.normal(group.shape[0])

    features = config.feature_scale * rng.normal((config.sample_count, config.dimension))
    clean = np.where(features @ weights >= 0.0, 1, -1)
    flips = rng.uniform(config.sample_count) < config.noise
    labels = np.where(flips, -clean, clean)
    logger.info(
        "Generated %d samples in dimension %d (%d flipped labels)",
        config.sample_count, config.dimension, int(flips.sum()),
    )
    return Dataset(features, labels), weights


def build_problem(config: ExperimentConfig) -> Tuple[Problem, Vector]:
    data, weights = generate_dataset(config, SeededRng(config.data_seed).derive(DATASET_STREAM))
    return Problem(data, build_group_spec(config)), weights


def time_to_threshold(trajectory: Trajectory, threshold: float) -> Optional[float]:
    """First recorded wall-clock time at which F+G(y_n) <= threshold"""
    for record in trajectory.records:
        if record.objective_y <= threshold:
            return record.wall_seconds
    return None


def _seconds_per_iteration(trajectory: Trajectory) -> float:
    last = trajectory.records[-1]
    return last.wall_seconds / max(last.iteration, 1)


def _benchmark_cell(
    problem: Problem,
    config: ExperimentConfig,
    reference: ReferenceSolution,
    cell: Tuple[str, int],
) -> Trajectory:
    algorithm, seed = cell
    if algorithm == "sdr":
        return run_stochastic_dr(
            problem, config.gamma, config.n_iters, seed, config.record_every,
            reference=reference, init_scale=config.init_scale, time_budget=config.time_budget,
        )
    return run_partially_stochastic_dr(
        problem, config.gamma, config.n_iters, seed, config.record_every, config.dykstra_tol,
        dykstra_max_iter=config.dykstra_max_iter, reference=reference, init_scale=config.init_scale,
        time_budget=config.time_budget,
    )


def _histograms(trajectories: Dict[str, Trajectory]) -> HistogramData:
    initial = trajectories["sdr"].initial_point
    columns = {"initial": initial}
    columns.update({f"{name}_last": t.final_point for name, t in trajectories.items()})
    edges = np.histogram_bin_edges(np.concatenate(list(columns.values())), bins=HISTOGRAM_BINS)
    counts = {name: np.histogram(values, bins=edges)[0].tolist() for name, values in columns.items()}
    return HistogramData(bin_edges=edges.tolist(), counts=counts)


def run_benchmark(
    config: ExperimentConfig,
    *,
    problem: Optional[Problem] = None,
    reference: Optional[ReferenceSolution] = None,
    threads: Optional[int] = None,
) -> Tuple[BenchmarkReport, Dict[str, Trajectory]]:
    """Paired runs of both algorithms on identical seeds and data.

    Each run stops at its first record after `config.time_budget` seconds of
    iterating. Returns the report and the two trajectories of the first seed
    (the series written to CSV).
    """
    if problem is None:
        problem, _ = build_problem(config)
    if reference is None:
        reference = reference_solve(problem.data, problem.groups, config.reference_budget)
    threshold = config.threshold_ratio * reference.objective

    seeds = [config.seed + i for i in range(config.n_seeds)]
    cells = [(algorithm, seed) for seed in seeds for algorithm in BENCHMARK_ALGORITHMS]
    worker = functools.partial(_benchmark_cell, problem, config, reference)
    trajectories = dict(zip(cells, map_cells(worker, cells, threads)))

    comparisons: List[SeedComparison] = []
    wins = 0
    for seed in seeds:
        pair = {algorithm: trajectories[(algorithm, seed)] for algorithm in BENCHMARK_ALGORITHMS}
        times = {name: time_to_threshold(t, threshold) for name, t in pair.items()}
        sdr_time = times["sdr"] if times["sdr"] is not None else math.inf
        psdr_time = times["psdr"] if times["psdr"] is not None else math.inf
        if sdr_time < psdr_time:
            wins += 1
        paired = pair["sdr"].draw_digest == pair["psdr"].draw_digest
        if not paired:
            logger.warning("seed %d: the two algorithms saw different data streams", seed)
        comparisons.append(
            SeedComparison(
                seed=seed,
                time_to_threshold=times,
                final_objective_ergodic={name: t.records[-1].objective_ergodic for name, t in pair.items()},
                iterations={name: t.n_iters for name, t in pair.items()},
                paired=paired,
            )
        )

    mean_iteration_seconds = {
        name: float(np.mean([_seconds_per_iteration(trajectories[(name, seed)]) for seed in seeds]))
        for name in BENCHMARK_ALGORITHMS
    }
    first = {name: trajectories[(name, seeds[0])] for name in BENCHMARK_ALGORITHMS}
    report = BenchmarkReport(
        gamma=config.gamma,
        reference_objective=reference.objective,
        threshold=threshold,
        seeds=comparisons,
        sdr_wins=wins,
        mean_iteration_seconds=mean_iteration_seconds,
        histograms=_histograms(first),
        config=config,
        version=settings.VERSION,
    )
    logger.info("Benchmark: sdr reached the threshold first on %d/%d seeds", wins, len(seeds))
    return report, first
