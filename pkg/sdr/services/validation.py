"""
Prox Validation Suite
Checks every implemented prox against the brute-force oracle, for
nonexpansiveness, and its Moreau gradient against finite differences
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from sdr.core.linalg import Vector
from sdr.core.rng import CHECK_STREAM, SeededRng
from sdr.models.domain import GroupSpec, ProxResult, Sample
from sdr.models.schemas import ProxCheckRow
from sdr.services.prox import (
    group_norm_value,
    hinge_value,
    logistic_value,
    moreau_eval,
    numerical_prox_oracle,
    overlap_group_sum_value,
    prox_group_norm,
    prox_hinge_affine,
    prox_logistic_affine,
    prox_overlap_group_sum,
)

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-6
NONEXPANSIVE_SLACK = 1e-10
MOREAU_TOLERANCE = 1e-4
FINITE_DIFFERENCE_STEP = 1e-5
# Tight inner tolerances so solver error stays far below the checked tolerances
DYKSTRA_CHECK_TOL = 1e-13
DYKSTRA_CHECK_MAX_ITER = 100_000
LOGISTIC_CHECK_TOL = 1e-14


@dataclass(frozen=True)
class ProxCase:
    """One random instance of a prox family: the prox map, its function and step"""

    prox: Callable[[Vector], ProxResult]
    phi: Callable[[Vector], float]
    gamma: float


def _random_sample(rng: SeededRng, dimension: int) -> Sample:
    return Sample(rng.normal(dimension), 1 if rng.uniform() < 0.5 else -1)


def _overlapping_pair(dimension: int) -> GroupSpec:
    if dimension == 1:
        return GroupSpec.from_lists([[0], [0]], 1)
    middle = dimension // 2
    return GroupSpec.from_lists([list(range(0, middle + 1)), list(range(middle, dimension))], dimension)


def group_norm_case(rng: SeededRng, dimension: int) -> ProxCase:
    size = 1 + rng.index(dimension)
    group = np.sort(rng.choice(dimension, size=size, replace=False))
    weight, gamma = 0.5 + 1.5 * rng.uniform(), 0.1 + 1.9 * rng.uniform()
    return ProxCase(
        prox=lambda v: prox_group_norm(v, group, weight, gamma),
        phi=lambda v: weight * group_norm_value(v, group),
        gamma=gamma,
    )


def hinge_case(rng: SeededRng, dimension: int) -> ProxCase:
    sample, gamma = _random_sample(rng, dimension), 0.1 + 1.9 * rng.uniform()
    return ProxCase(
        prox=lambda v: prox_hinge_affine(v, sample, gamma),
        phi=lambda v: hinge_value(v, sample),
        gamma=gamma,
    )


def logistic_case(rng: SeededRng, dimension: int) -> ProxCase:
    sample, gamma = _random_sample(rng, dimension), 0.1 + 1.9 * rng.uniform()
    return ProxCase(
        prox=lambda v: prox_logistic_affine(v, sample, gamma, tol=LOGISTIC_CHECK_TOL),
        phi=lambda v: logistic_value(v, sample),
        gamma=gamma,
    )


def overlap_group_sum_case(rng: SeededRng, dimension: int) -> ProxCase:
    groups = _overlapping_pair(dimension)
    weight, gamma = 0.5 + 1.5 * rng.uniform(), 0.1 + 1.9 * rng.uniform()
    return ProxCase(
        prox=lambda v: prox_overlap_group_sum(
            v, groups, weight, gamma, DYKSTRA_CHECK_TOL, DYKSTRA_CHECK_MAX_ITER
        ),
        phi=lambda v: overlap_group_sum_value(v, groups, weight),
        gamma=gamma,
    )


PROX_FAMILIES: Dict[str, Callable[[SeededRng, int], ProxCase]] = {
    "group_norm": group_norm_case,
    "hinge_affine": hinge_case,
    "logistic_affine": logistic_case,
    "overlap_group_sum": overlap_group_sum_case,
}


def oracle_error(case: ProxCase, x: Vector) -> float:
    expected = numerical_prox_oracle(case.phi, x, case.gamma)
    return float(np.abs(case.prox(x).point - expected).max())


def nonexpansive_excess(case: ProxCase, x: Vector, y: Vector) -> float:
    """||P(x) - P(y)|| - ||x - y||, at most 0 for a firmly nonexpansive map"""
    moved = np.linalg.norm(case.prox(x).point - case.prox(y).point)
    return float(moved - np.linalg.norm(x - y))


def envelope_value(case: ProxCase, x: Vector) -> float:
    result = case.prox(x)
    return moreau_eval(result, x, case.phi(result.point), case.gamma).value


def moreau_gradient_error(case: ProxCase, x: Vector, h: float = FINITE_DIFFERENCE_STEP) -> float:
    """Central-difference error of the envelope gradient, relative to max(||grad||_inf, 1)"""
    result = case.prox(x)
    analytic = moreau_eval(result, x, case.phi(result.point), case.gamma).gradient
    numeric = np.empty_like(x)
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        numeric[i] = (envelope_value(case, x + step) - envelope_value(case, x - step)) / (2.0 * h)
    return float(np.abs(numeric - analytic).max() / max(float(np.abs(analytic).max()), 1.0))


def run_prox_check(seed: int = 0, trials: int = 100, pairs: int = 1000) -> List[ProxCheckRow]:
    """Run the three checks on every prox family; one row per (family, check)"""
    rows: List[ProxCheckRow] = []
    for family, make_case in PROX_FAMILIES.items():
        rng = SeededRng(seed).derive(CHECK_STREAM)

        errors = []
        for _ in range(trials):
            dimension = 1 + rng.index(2)
            case = make_case(rng, dimension)
            errors.append(oracle_error(case, 2.0 * rng.normal(dimension)))
        rows.append(_row(family, "oracle_agreement", errors, ORACLE_TOLERANCE))

        excesses = []
        for _ in range(pairs):
            dimension = 1 + rng.index(10)
            case = make_case(rng, dimension)
            excesses.append(
                nonexpansive_excess(case, 2.0 * rng.normal(dimension), 2.0 * rng.normal(dimension))
            )
        rows.append(_row(family, "nonexpansive", excesses, NONEXPANSIVE_SLACK))

        gradient_errors = []
        for _ in range(trials):
            dimension = 1 + rng.index(4)
            case = make_case(rng, dimension)
            gradient_errors.append(moreau_gradient_error(case, 2.0 * rng.normal(dimension)))
        rows.append(_row(family, "moreau_gradient", gradient_errors, MOREAU_TOLERANCE))

    failed = [row for row in rows if not row.passed]
    logger.info("prox-check: %d/%d checks passed", len(rows) - len(failed), len(rows))
    return rows


def _row(family: str, check: str, values: List[float], tolerance: float) -> ProxCheckRow:
    worst = max(values) if values else 0.0
    return ProxCheckRow(
        family=family,
        check=check,
        trials=len(values),
        max_error=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
    )
