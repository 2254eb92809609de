"""
Reference Oracle
Empirical objective, a slow-but-sure reference minimiser, distances to it and
the Monte-Carlo probe of how the ergodic averages concentrate
"""

import functools
import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from sdr.core.config import settings
from sdr.core.errors import DimensionMismatchError, DivergenceError, InvalidParameterError
from sdr.core.linalg import Vector
from sdr.core.rng import SeededRng
from sdr.models.domain import Dataset, GroupSpec, Problem
from sdr.models.schemas import ProbeReport, ProbeRow, ReferenceSolution
from sdr.services.prox import minimize_convex_box, overlap_group_sum_value
from sdr.services.workers import map_cells

logger = logging.getLogger(__name__)

MIN_REFERENCE_BUDGET = 100_000
POLISH_MAX_DIMENSION = 3
# Equal objectives (within this) at points further apart than UNIQUE_DISTANCE
# mean the argmin is not a singleton
TIE_OBJECTIVE = 1e-9
UNIQUE_DISTANCE = 1e-4
_AVERAGE_CHECK_EVERY = 1000
SMOOTHING_SCHEDULE = (1e-2, 1e-4, 1e-6, 1e-8)
SMOOTHED_MAX_ITER = 5000


def empirical_objective(x: Vector, data: Dataset, groups: GroupSpec) -> float:
    """(1/m) sum_i max(0, 1 - eta_i <x, xi_i>) + sum_j ||x_{S_j}||"""
    if x.shape[0] != data.dimension or data.dimension != groups.dimension:
        raise DimensionMismatchError(
            "point, dataset and groups must share a dimension",
            point=x.shape[0],
            data=data.dimension,
            groups=groups.dimension,
        )
    margins = data.labels * (data.features @ x)
    return float(np.maximum(0.0, 1.0 - margins).mean()) + overlap_group_sum_value(x, groups)


def _objective_and_subgradient(x: Vector, data: Dataset, groups: GroupSpec) -> Tuple[float, Vector]:
    margins = data.labels * (data.features @ x)
    active = margins < 1.0
    value = float(np.maximum(0.0, 1.0 - margins).mean())
    subgradient = -(data.features.T @ (data.labels * active)) / data.size
    for group in groups.groups:
        block = x[group]
        norm = float(np.linalg.norm(block))
        value += norm
        if norm > 0.0:
            subgradient[group] += block / norm
    return value, subgradient


def _smoothed_objective(x: Vector, data: Dataset, groups: GroupSpec, mu: float) -> Tuple[float, Vector]:
    """Huber-smoothed hinge plus sqrt(||x_S||^2 + mu^2) - mu per group; within mu * (1/2 + g) of F + G"""
    slack = 1.0 - data.labels * (data.features @ x)
    slope = np.clip(slack / mu, 0.0, 1.0)
    loss = np.where(slack >= mu, slack - 0.5 * mu, np.where(slack > 0.0, 0.5 * slack * slack / mu, 0.0))
    value = float(loss.mean())
    gradient = -(data.features.T @ (data.labels * slope)) / data.size
    for group in groups.groups:
        block = x[group]
        radius = math.sqrt(float(np.dot(block, block)) + mu * mu)
        value += radius - mu
        gradient[group] += block / radius
    return value, gradient


def _smoothed_refine(start: Vector, data: Dataset, groups: GroupSpec) -> Vector:
    """L-BFGS on the smoothed objective, tightening the smoothing from a warm start"""
    x = start.copy()
    for mu in SMOOTHING_SCHEDULE:
        result = minimize(
            _smoothed_objective, x, args=(data, groups, mu), jac=True, method="L-BFGS-B",
            options={"maxiter": SMOOTHED_MAX_ITER, "ftol": 1e-15, "gtol": 1e-12},
        )
        x = np.asarray(result.x, dtype=np.float64)
    return x


def reference_solve(
    data: Dataset,
    groups: GroupSpec,
    budget: int = settings.REFERENCE_BUDGET,
    seed: Optional[int] = None,
) -> ReferenceSolution:
    """Minimise the empirical F + G by the averaged subgradient method.

    Steps c / sqrt(k) with c = 1 / (max_i ||xi_i|| + g); the best iterate (or the
    running average, checked every 1000 steps) is kept. L-BFGS on a smoothed
    objective then refines it, and for N <= 3 nested line searches polish it;
    each stage is kept only if it lowers the exact objective. `seed` randomises
    the start point.
    The residual is the best-objective improvement over the last 10% of iterations.
    """
    if budget < MIN_REFERENCE_BUDGET:
        raise InvalidParameterError(
            f"reference budget must be at least {MIN_REFERENCE_BUDGET}", budget=budget
        )
    if data.dimension != groups.dimension:
        raise DimensionMismatchError(
            "dataset and groups disagree on the dimension", data=data.dimension, groups=groups.dimension
        )

    c = 1.0 / (float(np.linalg.norm(data.features, axis=1).max()) + groups.count)
    if seed is None:
        x = np.zeros(data.dimension)
    else:
        x = 0.1 * SeededRng(seed).normal(data.dimension)
    average = np.zeros(data.dimension)
    best_point, best_value = x.copy(), math.inf
    mark_value = math.inf
    mark_at = int(0.9 * budget)

    for k in range(1, budget + 1):
        value, subgradient = _objective_and_subgradient(x, data, groups)
        if value < best_value:
            best_point, best_value = x.copy(), value
        x = x - (c / math.sqrt(k)) * subgradient
        average += (x - average) / k
        if k % _AVERAGE_CHECK_EVERY == 0:
            averaged_value = empirical_objective(average, data, groups)
            if averaged_value < best_value:
                best_point, best_value = average.copy(), averaged_value
        if k == mark_at:
            mark_value = best_value

    residual = max(mark_value - best_value, 0.0)
    method = "averaged-subgradient"
    unique = True

    refined = _smoothed_refine(best_point, data, groups)
    refined_value = empirical_objective(refined, data, groups)
    if refined_value < best_value:
        logger.info("smoothed refinement lowered the objective by %.3g", best_value - refined_value)
        best_point, best_value = refined, refined_value
        method += "+smoothed"

    if data.dimension <= POLISH_MAX_DIMENSION:
        def objective(y: Vector) -> float:
            return empirical_objective(y, data, groups)

        radius = 0.1 * (1.0 + float(np.abs(best_point).max()))
        polished, polished_value = minimize_convex_box(objective, best_point, radius, 1e-10)
        if polished_value < best_value:
            best_point, best_value = polished, polished_value
            method += "+polish"
        # a second polish from the running average checks for a non-singleton argmin
        other, other_value = minimize_convex_box(objective, average, radius, 1e-10)
        if abs(other_value - best_value) <= TIE_OBJECTIVE and np.linalg.norm(other - best_point) > UNIQUE_DISTANCE:
            unique = False
            logger.warning("argmin looks non-unique; distances are upper bounds")
        elif other_value < best_value:
            best_point, best_value = other, other_value

    point = np.asarray(best_point, dtype=np.float64)
    return ReferenceSolution(
        point=point.tolist(),
        objective=empirical_objective(point, data, groups),
        method=method,
        residual=residual,
        unique=unique,
    )


def distance_to_solution(x: Vector, ref: ReferenceSolution) -> float:
    """||x - x*||; an upper bound on d(x, argmin) when ref.unique is False"""
    return float(np.linalg.norm(x - ref.vector()))


def _probe_cell(
    problem: Problem,
    reference: ReferenceSolution,
    epsilon: float,
    n_iters: int,
    record_every: int,
    init_scale: float,
    cell: Tuple[float, int],
) -> Dict[str, object]:
    from sdr.services.solvers import run_stochastic_dr

    gamma, seed = cell
    try:
        trajectory = run_stochastic_dr(
            problem, gamma, n_iters, seed, record_every,
            reference=reference, epsilon=epsilon, init_scale=init_scale,
        )
    except DivergenceError as e:
        logger.warning("divergence at gamma=%g seed=%d: %s", gamma, seed, e)
        return {"gamma": gamma, "diverged": True}
    return {
        "gamma": gamma,
        "diverged": False,
        "dist_final": distance_to_solution(trajectory.ergodic.mean, reference),
        "cesaro": trajectory.cesaro_exceedance,
        "objective_ergodic": trajectory.records[-1].objective_ergodic,
        "sup_norm": trajectory.sup_norm,
        "drift": trajectory.drift,
    }


def concentration_probe(
    problem: Problem,
    gammas: Sequence[float],
    n_iters: int,
    n_seeds: int,
    epsilon: float,
    *,
    reference: Optional[ReferenceSolution] = None,
    base_seed: int = 0,
    record_every: int = settings.RECORD_EVERY,
    init_scale: float = 0.0,
    threads: Optional[int] = None,
) -> ProbeReport:
    """Estimate P(d(xbar_n, argmin) >= epsilon) and the Cesaro exceedance per gamma"""
    if len(gammas) < 2:
        raise InvalidParameterError("the probe needs at least two step sizes", gammas=list(gammas))
    if n_seeds < 10:
        raise InvalidParameterError("the probe needs at least ten seeds", n_seeds=n_seeds)
    if any(not gamma > 0 for gamma in gammas):
        raise InvalidParameterError("step sizes must be positive", gammas=list(gammas))
    if len({float(gamma) for gamma in gammas}) != len(gammas):
        raise InvalidParameterError("step sizes must be distinct", gammas=list(gammas))
    if not epsilon >= 0:
        raise InvalidParameterError("epsilon must be non-negative", epsilon=epsilon)

    if reference is None:
        reference = reference_solve(problem.data, problem.groups)

    cells = [(float(gamma), base_seed + i) for gamma in gammas for i in range(n_seeds)]
    worker = functools.partial(
        _probe_cell, problem, reference, epsilon, n_iters, record_every, init_scale
    )
    outcomes = map_cells(worker, cells, threads)

    by_gamma: Dict[float, List[Dict[str, object]]] = defaultdict(list)
    for outcome in outcomes:
        by_gamma[outcome["gamma"]].append(outcome)

    rows: List[ProbeRow] = []
    drift: Dict[str, List[List[float]]] = {}
    distances: Dict[str, List[Optional[float]]] = {}
    for gamma in gammas:
        results = by_gamma[float(gamma)]
        finished = [r for r in results if not r["diverged"]]
        diverged = len(results) - len(finished)
        # a diverged run counts as a run away from the solution
        far = sum(1 for r in finished if r["dist_final"] >= epsilon) + diverged
        cesaro = [r["cesaro"] for r in finished] + [1.0] * diverged
        rows.append(
            ProbeRow(
                gamma=float(gamma),
                epsilon=epsilon,
                n_seeds=n_seeds,
                n_iters=n_iters,
                prob_final=far / len(results),
                cesaro_mean=float(np.mean(cesaro)),
                sup_norm_max=max((r["sup_norm"] for r in finished), default=math.inf),
                min_objective_ergodic=min((r["objective_ergodic"] for r in finished), default=math.inf),
                divergences=diverged,
            )
        )
        distances[str(float(gamma))] = [None if r["diverged"] else r["dist_final"] for r in results]
        if finished:
            series = np.array([[value for _, value in r["drift"]] for r in finished])
            iterations = [n for n, _ in finished[0]["drift"]]
            drift[str(float(gamma))] = [
                [float(n), float(v)] for n, v in zip(iterations, series.mean(axis=0))
            ]
        logger.info("gamma=%g: P(d >= eps)=%.3f, cesaro=%.3f", gamma, rows[-1].prob_final, rows[-1].cesaro_mean)

    return ProbeReport(
        rows=rows,
        drift=drift,
        distances=distances,
        reference_objective=reference.objective,
        reference_norm=float(np.linalg.norm(reference.vector())),
    )
