"""
Douglas-Rachford Solvers
Deterministic, fully stochastic and partially stochastic DR with constant step,
ergodic averaging and piecewise-linear interpolation of the iterates
"""

import hashlib
import logging
import math
import time
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from sdr.core.config import settings
from sdr.core.errors import DivergenceError, InvalidParameterError, OutOfHorizonError
from sdr.core.linalg import Vector, as_vector
from sdr.core.rng import DATA_STREAM, GROUP_STREAM, INIT_STREAM, SeededRng, draw_index
from sdr.models.domain import (
    DrState,
    ErgodicAverage,
    GroupSpec,
    InterpolatedPath,
    Problem,
    Sample,
    Trajectory,
)
from sdr.models.schemas import ReferenceSolution, RunRecord
from sdr.services.prox import (
    OverlapGroupProx,
    ProxMap,
    prox_empirical_hinge,
    prox_group_norm,
    prox_hinge_affine,
)

logger = logging.getLogger(__name__)

# Advances a state by one iteration; draws whatever randomness it needs itself
Stepper = Callable[[DrState], DrState]


# Single steps
def dr_step_deterministic(state: DrState, prox_f: ProxMap, prox_g: ProxMap) -> DrState:
    """One DR iteration; prox_f and prox_g must already be bound to state.gamma"""
    y = prox_f(state.x)
    z = prox_g(2.0 * y - state.x)
    x = state.x + z - y
    return DrState(x=x, y=y, z=z, iter=state.iter + 1, gamma=state.gamma)


def dr_step_stochastic(state: DrState, sample: Sample, group_index: int, groups: GroupSpec) -> DrState:
    """DR iteration on the realisations f_n = h(eta <xi, .>) and g_n = g ||x_{S_j}||.

    The factor g (the group count) makes g_n an unbiased realisation of
    G = sum_j ||x_{S_j}|| when j is drawn uniformly.
    """
    if not 0 <= group_index < groups.count:
        raise InvalidParameterError(
            "group index out of range", group_index=group_index, groups=groups.count
        )
    gamma = state.gamma
    group = groups[group_index]
    weight = float(groups.count)
    return dr_step_deterministic(
        state,
        lambda v: prox_hinge_affine(v, sample, gamma).point,
        lambda v: prox_group_norm(v, group, weight, gamma).point,
    )


def dr_step_partially_stochastic(
    state: DrState,
    sample: Sample,
    groups: GroupSpec,
    dykstra_tol: float = settings.DYKSTRA_TOL,
    dykstra_max_iter: int = settings.DYKSTRA_MAX_ITER,
    group_prox: Optional[OverlapGroupProx] = None,
) -> DrState:
    """DR iteration sampling only the loss; the regulariser's full prox is computed.

    A runner passes one warm-started `group_prox` for the whole trajectory.
    """
    gamma = state.gamma
    if group_prox is None:
        group_prox = OverlapGroupProx(groups, 1.0, gamma, dykstra_tol, dykstra_max_iter)
    return dr_step_deterministic(
        state,
        lambda v: prox_hinge_affine(v, sample, gamma).point,
        lambda v: group_prox(v).point,
    )


# Ergodic average and interpolation
def update_ergodic(avg: ErgodicAverage, x: Vector) -> ErgodicAverage:
    if avg.mean.shape != x.shape:
        raise InvalidParameterError(
            "ergodic average and iterate differ in length", mean=avg.mean.shape[0], iterate=x.shape[0]
        )
    count = avg.count + 1
    return ErgodicAverage(mean=avg.mean + (x - avg.mean) / count, count=count)


def interpolate(iterates: Sequence[Vector], gamma: float, t: float) -> Vector:
    """Value at time t of the path through x_n at time n * gamma, affine in between"""
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive", gamma=gamma)
    horizon = (len(iterates) - 1) * gamma
    if not 0.0 <= t <= horizon or len(iterates) == 0:
        raise OutOfHorizonError("time outside the recorded horizon", t=t, horizon=horizon)

    nearest = int(round(t / gamma))
    if abs(t - nearest * gamma) <= 1e-12 * gamma and nearest < len(iterates):
        return np.array(iterates[nearest], dtype=np.float64)

    n = min(int(math.floor(t / gamma)), len(iterates) - 2)
    fraction = (t - n * gamma) / gamma
    return iterates[n] + fraction * (iterates[n + 1] - iterates[n])


def interpolate_path(iterates: Sequence[Vector], gamma: float, times: Sequence[float]) -> InterpolatedPath:
    values = np.stack([interpolate(iterates, gamma, t) for t in times])
    return InterpolatedPath(times=np.asarray(times, dtype=np.float64), values=values)


# Runners
def _initial_point(problem: Problem, seed: int, x0: Optional[Vector], init_scale: float) -> Vector:
    if x0 is not None:
        return as_vector(x0, problem.dimension)
    if init_scale == 0.0:
        return np.zeros(problem.dimension)
    return init_scale * SeededRng(seed).derive(INIT_STREAM).normal(problem.dimension)


def _drive(
    algorithm: str,
    problem: Problem,
    stepper: Stepper,
    gamma: float,
    n_iters: int,
    seed: int,
    record_every: int,
    digest: "hashlib._Hash",
    reference: Optional[ReferenceSolution],
    epsilon: Optional[float],
    x0: Optional[Vector],
    init_scale: float,
    snapshot_every: Optional[int],
    snapshot_limit: Optional[int] = None,
    time_budget: Optional[float] = None,
) -> Trajectory:
    """Iterate `stepper`, recording metrics outside the timed section.

    Snapshots of x_n are kept every `snapshot_every` iterations, up to iteration
    `snapshot_limit` when given. With `time_budget` (seconds) the run stops at the
    first record once the timed section has used up the budget.
    """
    # late import: the oracle's probe drives these runners
    from sdr.services.oracle import empirical_objective

    if n_iters < 1:
        raise InvalidParameterError("n_iters must be at least 1", n_iters=n_iters)
    if record_every < 1:
        raise InvalidParameterError("record_every must be at least 1", record_every=record_every)

    x_start = _initial_point(problem, seed, x0, init_scale)
    state = DrState.start(x_start, gamma)
    ergodic = ErgodicAverage.empty(problem.dimension)
    x_star = reference.vector() if reference is not None else None
    data, groups = problem.data, problem.groups

    def record(elapsed: float) -> RunRecord:
        averaged = ergodic.mean if ergodic.count else state.x
        objective_y = state.y if state.iter else state.x
        return RunRecord(
            iteration=state.iter,
            wall_seconds=elapsed,
            objective_y=empirical_objective(objective_y, data, groups),
            objective_ergodic=empirical_objective(averaged, data, groups),
            dist_ergodic=float(np.linalg.norm(averaged - x_star)) if x_star is not None else math.nan,
        )

    records: List[RunRecord] = [record(0.0)]
    snapshots: List[Tuple[int, Vector]] = [(0, x_start.copy())] if snapshot_every else []
    drift: List[Tuple[int, float]] = []
    sup_sq = float(np.dot(x_start, x_start))
    exceed = 0
    window_drift = 0.0
    dist_sq = float(np.sum((x_start - x_star) ** 2)) if x_star is not None else 0.0
    if x_star is not None and epsilon is not None and math.sqrt(dist_sq) > epsilon:
        exceed += 1

    logger.info("%s run: gamma=%g, n_iters=%d, seed=%d", algorithm, gamma, n_iters, seed)
    elapsed = 0.0
    tic = time.perf_counter()
    for n in range(1, n_iters + 1):
        state = stepper(state)
        x = state.x
        if not np.isfinite(x).all():
            raise DivergenceError(
                f"{algorithm} produced a non-finite iterate", iteration=n, gamma=gamma, seed=seed
            )
        ergodic = update_ergodic(ergodic, x)
        sup_sq = max(sup_sq, float(np.dot(x, x)))
        if x_star is not None:
            new_dist_sq = float(np.sum((x - x_star) ** 2))
            window_drift += new_dist_sq - dist_sq
            dist_sq = new_dist_sq
            if epsilon is not None and math.sqrt(dist_sq) > epsilon:
                exceed += 1

        if n % record_every == 0 or n == n_iters:
            elapsed += time.perf_counter() - tic
            records.append(record(elapsed))
            if x_star is not None:
                window = n - (drift[-1][0] if drift else 0)
                drift.append((n, window_drift / window))
                window_drift = 0.0
            logger.debug("%s iter %d: F+G(y)=%.6g", algorithm, n, records[-1].objective_y)
            if time_budget is not None and elapsed >= time_budget and n < n_iters:
                logger.info("%s stopped at iteration %d: time budget of %gs used", algorithm, n, time_budget)
                break
            tic = time.perf_counter()
        if snapshot_every and n % snapshot_every == 0 and (snapshot_limit is None or n <= snapshot_limit):
            snapshots.append((n, x.copy()))

    logger.info(
        "%s finished: F+G(xbar)=%.6g in %.2fs", algorithm, records[-1].objective_ergodic, elapsed
    )
    return Trajectory(
        algorithm=algorithm,
        gamma=gamma,
        seed=seed,
        n_iters=state.iter,
        records=records,
        final_state=state,
        ergodic=ergodic,
        initial_point=x_start,
        sup_norm=math.sqrt(sup_sq),
        draw_digest=digest.hexdigest(),
        cesaro_exceedance=exceed / (state.iter + 1) if (x_star is not None and epsilon is not None) else None,
        drift=drift,
        snapshots=snapshots,
    )


def _sample_stream(problem: Problem, seed: int, digest: "hashlib._Hash") -> Callable[[], Sample]:
    data_rng = SeededRng(seed).derive(DATA_STREAM)
    data = problem.data

    def next_sample() -> Sample:
        i = draw_index(data, data_rng)
        digest.update(i.to_bytes(8, "little"))
        return data.sample(i)

    return next_sample


def run_stochastic_dr(
    problem: Problem,
    gamma: float,
    n_iters: int,
    seed: int,
    record_every: int = settings.RECORD_EVERY,
    *,
    reference: Optional[ReferenceSolution] = None,
    epsilon: Optional[float] = None,
    x0: Optional[Vector] = None,
    init_scale: float = 0.0,
    snapshot_every: Optional[int] = None,
    snapshot_limit: Optional[int] = None,
    time_budget: Optional[float] = None,
) -> Trajectory:
    """Fully stochastic DR: one sample and one uniformly drawn group per iteration"""
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive", gamma=gamma)
    digest = hashlib.blake2b(digest_size=16)
    next_sample = _sample_stream(problem, seed, digest)
    group_rng = SeededRng(seed).derive(GROUP_STREAM)
    groups = problem.groups

    def stepper(state: DrState) -> DrState:
        sample = next_sample()
        return dr_step_stochastic(state, sample, group_rng.index(groups.count), groups)

    return _drive(
        "sdr", problem, stepper, gamma, n_iters, seed, record_every, digest,
        reference, epsilon, x0, init_scale, snapshot_every, snapshot_limit, time_budget,
    )


def run_partially_stochastic_dr(
    problem: Problem,
    gamma: float,
    n_iters: int,
    seed: int,
    record_every: int = settings.RECORD_EVERY,
    dykstra_tol: float = settings.DYKSTRA_TOL,
    *,
    dykstra_max_iter: int = settings.DYKSTRA_MAX_ITER,
    reference: Optional[ReferenceSolution] = None,
    epsilon: Optional[float] = None,
    x0: Optional[Vector] = None,
    init_scale: float = 0.0,
    snapshot_every: Optional[int] = None,
    snapshot_limit: Optional[int] = None,
    time_budget: Optional[float] = None,
) -> Trajectory:
    """Partially stochastic DR: sampled loss, full Dykstra prox of the regulariser"""
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive", gamma=gamma)
    digest = hashlib.blake2b(digest_size=16)
    next_sample = _sample_stream(problem, seed, digest)
    groups = problem.groups
    group_prox = OverlapGroupProx(groups, 1.0, gamma, dykstra_tol, dykstra_max_iter, warm_start=True)

    def stepper(state: DrState) -> DrState:
        return dr_step_partially_stochastic(state, next_sample(), groups, group_prox=group_prox)

    return _drive(
        "psdr", problem, stepper, gamma, n_iters, seed, record_every, digest,
        reference, epsilon, x0, init_scale, snapshot_every, snapshot_limit, time_budget,
    )


def run_deterministic_dr(
    problem: Problem,
    gamma: float,
    n_iters: int,
    seed: int = 0,
    record_every: int = settings.RECORD_EVERY,
    dykstra_tol: float = settings.DYKSTRA_TOL,
    *,
    dykstra_max_iter: int = settings.DYKSTRA_MAX_ITER,
    reference: Optional[ReferenceSolution] = None,
    epsilon: Optional[float] = None,
    x0: Optional[Vector] = None,
    init_scale: float = 0.0,
    snapshot_every: Optional[int] = None,
    snapshot_limit: Optional[int] = None,
    time_budget: Optional[float] = None,
) -> Trajectory:
    """Deterministic DR on the empirical problem with exact proxes of F and G.

    Both proxes are Dykstra solves (over the m samples and the g groups), so this
    is only practical for small problems; the seed only sets the initial point.
    """
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive", gamma=gamma)
    data, groups = problem.data, problem.groups

    def prox_f(v: Vector) -> Vector:
        return prox_empirical_hinge(v, data, gamma, dykstra_tol, dykstra_max_iter).point

    group_prox = OverlapGroupProx(groups, 1.0, gamma, dykstra_tol, dykstra_max_iter, warm_start=True)

    def prox_g(v: Vector) -> Vector:
        return group_prox(v).point

    return _drive(
        "dr", problem, lambda state: dr_step_deterministic(state, prox_f, prox_g),
        gamma, n_iters, seed, record_every, hashlib.blake2b(digest_size=16),
        reference, epsilon, x0, init_scale, snapshot_every, snapshot_limit, time_budget,
    )


RUNNERS = {
    "sdr": run_stochastic_dr,
    "psdr": run_partially_stochastic_dr,
    "dr": run_deterministic_dr,
}
