import numpy as np
import pytest

from sdr.core.errors import ConvergenceError, IndexRangeError, InvalidParameterError
from sdr.core.rng import SeededRng
from sdr.models.domain import Dataset, GroupSpec, Sample
from sdr.services.prox import (
    OverlapGroupProx,
    dykstra_prox_sum,
    group_norm_value,
    hinge_value,
    logistic_value,
    moreau_eval,
    numerical_prox_oracle,
    overlap_group_sum_value,
    prox_empirical_hinge,
    prox_group_norm,
    prox_hinge_affine,
    prox_logistic_affine,
    prox_overlap_group_sum,
)
from sdr.services.validation import (
    MOREAU_TOLERANCE,
    NONEXPANSIVE_SLACK,
    ORACLE_TOLERANCE,
    PROX_FAMILIES,
    moreau_gradient_error,
    nonexpansive_excess,
    oracle_error,
)

# Value-driven line searches resolve smooth minimisers only to about sqrt(machine epsilon)
ORACLE_SMOOTH_TOL = 1e-6


def prox_objective(point, x, gamma, phi):
    moved = point - x
    return 0.5 * float(np.dot(moved, moved)) + gamma * phi(point)


# Group norm
def test_group_norm_shrinks_block():
    result = prox_group_norm(np.array([3.0, 4.0]), [0, 1], 1.0, 1.0)
    np.testing.assert_allclose(result.point, [2.4, 3.2], atol=1e-15)
    expected = numerical_prox_oracle(lambda v: group_norm_value(v, [0, 1]), np.array([3.0, 4.0]), 1.0)
    np.testing.assert_allclose(result.point, expected, atol=ORACLE_SMOOTH_TOL)


def test_group_norm_zeroes_small_block():
    result = prox_group_norm(np.array([0.3, 0.4]), [0, 1], 1.0, 1.0)
    np.testing.assert_array_equal(result.point, [0.0, 0.0])


@pytest.mark.parametrize("threshold", [0.5, 2.0, 5.0])
def test_group_norm_leaves_other_coordinates(threshold):
    result = prox_group_norm(np.array([5.0, 7.0]), [0], 1.0, threshold)
    assert result.point[1] == 7.0


def test_group_norm_rejects_bad_group():
    with pytest.raises(IndexRangeError):
        prox_group_norm(np.zeros(2), [2], 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        prox_group_norm(np.zeros(2), [0], 1.0, 0.0)


# Hinge
def test_hinge_prox_keeps_satisfied_margin():
    sample = Sample(np.array([1.0, 0.0]), 1)
    x = np.array([2.0, -1.0])
    np.testing.assert_array_equal(prox_hinge_affine(x, sample, 1.0).point, x)


@pytest.mark.parametrize(
    "x, expected",
    [
        ([0.5, 0.0], [1.0, 0.0]),
        ([-10.0, 0.0], [-9.0, 0.0]),
    ],
)
def test_hinge_prox_examples(x, expected):
    sample = Sample(np.array([1.0, 0.0]), 1)
    x = np.array(x)
    result = prox_hinge_affine(x, sample, 1.0)
    np.testing.assert_allclose(result.point, expected, atol=1e-15)
    oracle = numerical_prox_oracle(lambda v: hinge_value(v, sample), x, 1.0)
    np.testing.assert_allclose(result.point, oracle, atol=ORACLE_SMOOTH_TOL)


def test_hinge_prox_zero_direction():
    sample = Sample(np.zeros(2), -1)
    x = np.array([0.2, 0.3])
    np.testing.assert_array_equal(prox_hinge_affine(x, sample, 1.0).point, x)


# Logistic
def test_logistic_prox_zero_direction():
    sample = Sample(np.zeros(3), 1)
    x = np.array([1.0, -2.0, 0.5])
    np.testing.assert_array_equal(prox_logistic_affine(x, sample, 1.0).point, x)


def test_logistic_prox_against_oracle():
    sample = Sample(np.array([1.0, 0.0]), 1)
    x = np.zeros(2)
    result = prox_logistic_affine(x, sample, 1.0)
    oracle = numerical_prox_oracle(lambda v: logistic_value(v, sample), x, 1.0)
    np.testing.assert_allclose(result.point, oracle, atol=ORACLE_SMOOTH_TOL)
    # fixed point s = sigmoid(-s) of the scalar step
    s = result.point[0]
    assert s == pytest.approx(1.0 / (1.0 + np.exp(s)), abs=1e-12)


def test_logistic_prox_identity_limit():
    sample = Sample(np.array([0.7, -1.2]), -1)
    x = np.array([0.3, 0.1])
    np.testing.assert_allclose(prox_logistic_affine(x, sample, 1e-8).point, x, atol=1e-6)


def test_logistic_prox_large_step():
    sample = Sample(np.array([0.5, -1.0, 2.0]), -1)
    x = np.array([0.8, -0.4, 1.1])
    result = prox_logistic_affine(x, sample, 5.0)
    a = sample.direction
    s = float(np.dot(result.point - x, a) / np.dot(a, a))
    assert 0.0 < s < 5.0
    assert s == pytest.approx(5.0 / (1.0 + np.exp(np.dot(a, x) + s * np.dot(a, a))), abs=1e-10)


def test_logistic_prox_converges_on_random_inputs():
    rng = SeededRng(11)
    for _ in range(1000):
        dimension = 1 + rng.index(10)
        sample = Sample(rng.normal(dimension), 1 if rng.uniform() < 0.5 else -1)
        gamma = 0.1 + 1.9 * rng.uniform()
        x = 2.0 * rng.normal(dimension)
        a = sample.direction
        s = float(np.dot(prox_logistic_affine(x, sample, gamma).point - x, a) / np.dot(a, a))
        assert 0.0 <= s <= gamma
        assert s == pytest.approx(gamma / (1.0 + np.exp(np.dot(a, x) + s * np.dot(a, a))), abs=1e-9)


def test_logistic_prox_reports_non_convergence():
    sample = Sample(np.array([3.0, 1.0]), 1)
    with pytest.raises(ConvergenceError) as info:
        prox_logistic_affine(np.array([0.4, -2.0]), sample, 5.0, tol=1e-300, max_iter=1)
    assert info.value.iterations == 1


# Overlapping group sum
def test_overlap_sum_separable_case_matches_blockwise():
    x = np.array([3.0, -1.0, 0.2, 4.0])
    groups = GroupSpec.from_lists([[0, 1], [2, 3]], 4)
    expected = prox_group_norm(prox_group_norm(x, [0, 1], 1.5, 0.5).point, [2, 3], 1.5, 0.5).point
    result = prox_overlap_group_sum(x, groups, 1.5, 0.5)
    np.testing.assert_allclose(result.point, expected, atol=1e-14)


def test_overlap_sum_against_oracle():
    groups = GroupSpec.from_lists([[0], [0, 1]], 2)
    x = np.array([3.0, 4.0])
    result = prox_overlap_group_sum(x, groups, 1.0, 1.0, tol=1e-13, max_iter=100_000)
    oracle = numerical_prox_oracle(lambda v: overlap_group_sum_value(v, groups), x, 1.0)
    np.testing.assert_allclose(result.point, oracle, atol=1e-6)


def test_overlap_sum_at_zero():
    groups = GroupSpec.chain(5, 2, 3, 1)
    np.testing.assert_array_equal(prox_overlap_group_sum(np.zeros(5), groups, 1.0, 1.0).point, np.zeros(5))


def test_dykstra_reports_cycle_budget():
    groups = GroupSpec.from_lists([[0], [0, 1]], 2)
    with pytest.raises(ConvergenceError) as info:
        prox_overlap_group_sum(np.array([3.0, 4.0]), groups, 1.0, 1.0, tol=1e-15, max_iter=1)
    assert info.value.iterations == 1
    assert info.value.residual > 0


def test_dykstra_with_single_summand_is_that_prox():
    x = np.array([1.0, 2.0])
    point, cycles, residual = dykstra_prox_sum(x, [lambda v: 0.5 * v])
    np.testing.assert_allclose(point, [0.5, 1.0])
    assert cycles == 2 and residual < 1e-8


def test_block_dykstra_matches_generic_splitting():
    groups = GroupSpec.chain(12, 4, 4, 1)
    x = SeededRng(2).normal(12) * 3.0
    summands = [(lambda v, s=group: prox_group_norm(v, s, 0.7, 0.4).point) for group in groups.groups]
    generic, _, _ = dykstra_prox_sum(x, summands, tol=1e-13, max_iter=100_000)
    blocks = OverlapGroupProx(groups, 0.7, 0.4, tol=1e-13, max_iter=100_000)(x)
    np.testing.assert_allclose(blocks.point, generic, atol=1e-11)


def test_warm_start_keeps_the_prox_and_saves_cycles():
    groups = GroupSpec.chain(12, 4, 4, 1)
    rng = SeededRng(5)
    warm = OverlapGroupProx(groups, 1.0, 0.3, tol=1e-12, max_iter=100_000, warm_start=True)
    x = 2.0 * rng.normal(12)
    warm(x)
    first_cycles = warm.last_cycles
    nearby = x + 1e-3 * rng.normal(12)
    cold = prox_overlap_group_sum(nearby, groups, 1.0, 0.3, tol=1e-12, max_iter=100_000)
    np.testing.assert_allclose(warm(nearby).point, cold.point, atol=1e-9)
    assert warm.last_cycles < first_cycles


def test_block_dykstra_rejects_wrong_dimension():
    groups = GroupSpec.chain(4, 2, 3, 1)
    with pytest.raises(InvalidParameterError):
        OverlapGroupProx(groups, 1.0, 1.0)(np.zeros(5))


def test_empirical_hinge_prox_optimality(rng):
    data = Dataset(rng.normal(size=(4, 2)), np.array([1, -1, 1, -1]))
    x = rng.normal(size=2)
    gamma = 0.7
    result = prox_empirical_hinge(x, data, gamma, tol=1e-13, max_iter=100_000)

    def phi(v):
        return float(np.maximum(0.0, 1.0 - data.labels * (data.features @ v)).mean())

    oracle = numerical_prox_oracle(phi, x, gamma)
    np.testing.assert_allclose(result.point, oracle, atol=1e-6)
    assert result.objective_value == pytest.approx(prox_objective(result.point, x, gamma, phi), rel=1e-12)


# Properties over every family
FAMILIES = sorted(PROX_FAMILIES)


@pytest.mark.parametrize("family", FAMILIES)
def test_oracle_agreement(family):
    rng = SeededRng(11)
    errors = []
    for _ in range(100):
        dimension = 1 + rng.index(2)
        case = PROX_FAMILIES[family](rng, dimension)
        errors.append(oracle_error(case, 2.0 * rng.normal(dimension)))
    assert max(errors) <= ORACLE_TOLERANCE


@pytest.mark.parametrize("family", FAMILIES)
def test_nonexpansive(family):
    rng = SeededRng(12)
    for _ in range(1000):
        dimension = 1 + rng.index(10)
        case = PROX_FAMILIES[family](rng, dimension)
        excess = nonexpansive_excess(case, 2.0 * rng.normal(dimension), 2.0 * rng.normal(dimension))
        assert excess <= NONEXPANSIVE_SLACK


@pytest.mark.parametrize("family", FAMILIES)
def test_prox_beats_nearby_points(family):
    rng = SeededRng(13)
    for _ in range(10):
        dimension = 1 + rng.index(4)
        case = PROX_FAMILIES[family](rng, dimension)
        x = 2.0 * rng.normal(dimension)
        result = case.prox(x)
        assert result.objective_value == pytest.approx(
            prox_objective(result.point, x, case.gamma, case.phi), rel=1e-12, abs=1e-14
        )
        for _ in range(100):
            direction = rng.normal(dimension)
            nearby = result.point + 1e-3 * direction / np.linalg.norm(direction)
            assert result.objective_value <= prox_objective(nearby, x, case.gamma, case.phi) + 1e-12


@pytest.mark.parametrize("family", FAMILIES)
def test_moreau_gradient_matches_finite_differences(family):
    rng = SeededRng(14)
    for _ in range(100):
        dimension = 1 + rng.index(4)
        case = PROX_FAMILIES[family](rng, dimension)
        assert moreau_gradient_error(case, 2.0 * rng.normal(dimension)) <= MOREAU_TOLERANCE


_SAMPLE = Sample(np.array([0.5, -1.0, 2.0]), -1)
_CHAIN = GroupSpec.from_lists([[0, 1], [1, 2]], 3)

# family -> (prox at a given gamma, function value)
STEP_CASES = {
    "group_norm": (
        lambda x, gamma: prox_group_norm(x, [0, 2], 1.3, gamma),
        lambda v: 1.3 * group_norm_value(v, [0, 2]),
    ),
    "hinge_affine": (
        lambda x, gamma: prox_hinge_affine(x, _SAMPLE, gamma),
        lambda v: hinge_value(v, _SAMPLE),
    ),
    "logistic_affine": (
        lambda x, gamma: prox_logistic_affine(x, _SAMPLE, gamma),
        lambda v: logistic_value(v, _SAMPLE),
    ),
    "overlap_group_sum": (
        lambda x, gamma: prox_overlap_group_sum(x, _CHAIN, 1.0, gamma, tol=1e-12),
        lambda v: overlap_group_sum_value(v, _CHAIN),
    ),
}


@pytest.mark.parametrize("family", sorted(STEP_CASES))
def test_identity_limit(family):
    prox, _ = STEP_CASES[family]
    x = np.array([0.8, -0.4, 1.1])
    moved = [np.linalg.norm(prox(x, gamma).point - x) for gamma in (1e-2, 1e-4, 1e-6)]
    assert moved[0] >= moved[1] >= moved[2]
    assert moved[2] < 1e-5


@pytest.mark.parametrize("family", sorted(STEP_CASES))
def test_envelope_below_function_and_decreasing_in_gamma(family):
    prox, phi = STEP_CASES[family]
    x = np.array([0.8, -0.4, 1.1])
    values = []
    for gamma in (0.05, 0.5, 5.0):
        result = prox(x, gamma)
        values.append(moreau_eval(result, x, phi(result.point), gamma).value)
    assert values[0] <= phi(x) + 1e-12
    assert values[0] >= values[1] >= values[2]


# Moreau envelope
def test_moreau_of_absolute_value():
    x = np.array([3.0])
    result = prox_group_norm(x, [0], 1.0, 1.0)
    envelope = moreau_eval(result, x, abs(result.point[0]), 1.0)
    assert envelope.value == pytest.approx(2.5)
    np.testing.assert_allclose(envelope.gradient, [1.0])


def test_moreau_gradient_vanishes_at_minimiser():
    x = np.zeros(2)
    result = prox_group_norm(x, [0, 1], 1.0, 0.5)
    np.testing.assert_array_equal(moreau_eval(result, x, 0.0, 0.5).gradient, [0.0, 0.0])


# Numerical oracle
def test_oracle_identity_and_quadratic():
    x = np.array([0.3, -1.2])
    np.testing.assert_array_equal(numerical_prox_oracle(lambda v: 0.0, x, 1.0), x)
    quadratic = numerical_prox_oracle(lambda v: 0.5 * float(np.dot(v, v)), np.array([2.0]), 1.0)
    np.testing.assert_allclose(quadratic, [1.0], atol=ORACLE_SMOOTH_TOL)


def test_oracle_rejects_high_dimension():
    with pytest.raises(InvalidParameterError):
        numerical_prox_oracle(lambda v: 0.0, np.zeros(5), 1.0)
