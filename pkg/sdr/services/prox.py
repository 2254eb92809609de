"""
Proximity Operators
Closed-form and iterative proxes for the SVM + overlapping group lasso problem,
Moreau envelopes, and a brute-force numerical prox used to validate them
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import expit

from sdr.core.config import settings
from sdr.core.errors import ConvergenceError, InvalidParameterError
from sdr.core.linalg import IndexSet, Vector, as_index_set, dot, restrict, scatter_add
from sdr.models.domain import Dataset, GroupSpec, MoreauEval, ProxResult, Sample

ProxMap = Callable[[Vector], Vector]

_GRID_POINTS = 9
_INNER_RELATIVE_TOL = 1e-13
_SCALAR_MAX_ITER = 500
_MAX_ORACLE_DIMENSION = 4


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise InvalidParameterError(f"{name} must be positive", **{name: value})


# Function values
def group_norm_value(x: Vector, s: Union[Sequence[int], IndexSet]) -> float:
    return float(np.linalg.norm(x[as_index_set(s, x.shape[0])]))


def overlap_group_sum_value(x: Vector, groups: GroupSpec, weight: float = 1.0) -> float:
    return weight * float(sum(np.linalg.norm(x[group]) for group in groups.groups))


def hinge_value(x: Vector, sample: Sample) -> float:
    return max(0.0, 1.0 - dot(sample.direction, x))


def logistic_value(x: Vector, sample: Sample) -> float:
    return float(np.logaddexp(0.0, -dot(sample.direction, x)))


# Proximity operators
def prox_group_norm(
    x: Vector, s: Union[Sequence[int], IndexSet], weight: float, gamma: float
) -> ProxResult:
    """Block soft-thresholding of x_S at threshold gamma * weight"""
    _require_positive(gamma=gamma, weight=weight)
    index = as_index_set(s, x.shape[0])
    block = restrict(x, index)
    shrunk = _shrink(block, gamma * weight)
    moved = shrunk - block
    point = scatter_add(x, index, moved)
    objective = 0.5 * dot(moved, moved) + gamma * weight * float(np.linalg.norm(shrunk))
    return ProxResult(point=point, objective_value=objective)


def _shrink(block: Vector, threshold: float) -> Vector:
    norm = float(np.linalg.norm(block))
    if norm <= threshold:
        return np.zeros_like(block)
    return block * (1.0 - threshold / norm)


def prox_hinge_affine(x: Vector, sample: Sample, gamma: float) -> ProxResult:
    """Prox of y -> max(0, 1 - eta <xi, y>); moves x along a = eta * xi"""
    _require_positive(gamma=gamma)
    a = sample.direction
    q = dot(a, a)
    margin = dot(a, x)
    if q == 0.0:
        return ProxResult(point=x.copy(), objective_value=gamma * max(0.0, 1.0 - margin))

    step = min(max((1.0 - margin) / q, 0.0), gamma)
    point = x + step * a
    objective = 0.5 * step * step * q + gamma * max(0.0, 1.0 - margin - step * q)
    return ProxResult(point=point, objective_value=objective)


def prox_logistic_affine(
    x: Vector,
    sample: Sample,
    gamma: float,
    tol: float = settings.LOGISTIC_TOL,
    max_iter: int = settings.LOGISTIC_MAX_ITER,
) -> ProxResult:
    """Prox of y -> log(1 + exp(-eta <xi, y>)).

    The output is x + s * a with a = eta * xi, where s solves
    s = gamma * sigmoid(-(<a, x> + s ||a||^2)). The left side minus the right is
    increasing in s, negative at 0 and non-negative at gamma, so Brent's method
    on [0, gamma] always brackets the root.
    """
    _require_positive(gamma=gamma, tol=tol)
    a = sample.direction
    q = dot(a, a)
    c = dot(a, x)
    if q == 0.0:
        return ProxResult(point=x.copy(), objective_value=gamma * float(np.logaddexp(0.0, -c)))

    def residual(s: float) -> float:
        return s - gamma * float(expit(-(c + s * q)))

    s, status = brentq(residual, 0.0, gamma, xtol=tol, maxiter=max_iter, full_output=True, disp=False)
    if not status.converged:
        raise ConvergenceError(
            "logistic prox did not converge", iterations=status.iterations, residual=abs(residual(s))
        )

    point = x + s * a
    objective = 0.5 * s * s * q + gamma * float(np.logaddexp(0.0, -(c + s * q)))
    return ProxResult(point=point, objective_value=objective)


def dykstra_prox_sum(
    x: Vector,
    summand_proxes: Sequence[ProxMap],
    tol: float = settings.DYKSTRA_TOL,
    max_iter: int = settings.DYKSTRA_MAX_ITER,
) -> Tuple[Vector, int, float]:
    """Prox of a sum from the proxes of its summands by cyclic Dykstra-like splitting.

    Each summand keeps an increment q_i; one cycle visits the summands in order,
    replacing the running point by prox_i(point + q_i) and q_i by what that prox
    removed. Stops once a full cycle moves the point by less than `tol`.

    Returns (point, cycles, residual).
    """
    _require_positive(tol=tol)
    point = x.copy()
    increments: List[Vector] = [np.zeros_like(x) for _ in summand_proxes]
    residual = math.inf
    for cycle in range(1, max_iter + 1):
        start = point
        for i, prox in enumerate(summand_proxes):
            shifted = point + increments[i]
            point = prox(shifted)
            increments[i] = shifted - point
        residual = float(np.linalg.norm(point - start))
        if residual < tol:
            return point, cycle, residual
    raise ConvergenceError(
        "Dykstra splitting reached max_iter", iterations=max_iter, residual=residual
    )


class OverlapGroupProx:
    """Prox of weight * sum_j ||x_{S_j}|| by Dykstra-like splitting over the group blocks.

    Index sets are validated once and each group keeps its increment as a block of
    length |S_j|. With `warm_start` the increments of the previous call seed the
    next one (a feasible dual start, so the limit is unchanged), which cuts the
    cycle count when consecutive inputs are close, as along a DR trajectory.
    """

    def __init__(
        self,
        groups: GroupSpec,
        weight: float,
        gamma: float,
        tol: float = settings.DYKSTRA_TOL,
        max_iter: int = settings.DYKSTRA_MAX_ITER,
        warm_start: bool = False,
    ):
        _require_positive(gamma=gamma, weight=weight, tol=tol)
        self.groups = groups
        self.weight = weight
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.warm_start = warm_start
        self.threshold = gamma * weight
        self._blocks: List[IndexSet] = list(groups.groups)
        self._increments: List[Vector] = [np.zeros(block.shape[0]) for block in self._blocks]
        self.last_cycles = 0

    def reset(self) -> None:
        for increment in self._increments:
            increment.fill(0.0)

    def __call__(self, x: Vector) -> ProxResult:
        if x.shape[0] != self.groups.dimension:
            raise InvalidParameterError(
                "point and groups differ in dimension", point=int(x.shape[0]), groups=self.groups.dimension
            )
        if not self.warm_start:
            self.reset()
        point = x.copy()
        for block, increment in zip(self._blocks, self._increments):
            point[block] -= increment

        residual = math.inf
        for cycle in range(1, self.max_iter + 1):
            start = point.copy()
            for j, block in enumerate(self._blocks):
                shifted = point[block] + self._increments[j]
                shrunk = _shrink(shifted, self.threshold)
                point[block] = shrunk
                self._increments[j] = shifted - shrunk
            residual = float(np.linalg.norm(point - start))
            if residual < self.tol:
                self.last_cycles = cycle
                moved = point - x
                objective = 0.5 * dot(moved, moved) + self.gamma * overlap_group_sum_value(
                    point, self.groups, self.weight
                )
                return ProxResult(point=point, objective_value=objective)
        self.reset()
        raise ConvergenceError(
            "Dykstra splitting reached max_iter", iterations=self.max_iter, residual=residual
        )


def prox_overlap_group_sum(
    x: Vector,
    groups: GroupSpec,
    weight: float,
    gamma: float,
    tol: float = settings.DYKSTRA_TOL,
    max_iter: int = settings.DYKSTRA_MAX_ITER,
) -> ProxResult:
    """Full prox of weight * sum_j ||x_{S_j}|| over possibly overlapping groups"""
    return OverlapGroupProx(groups, weight, gamma, tol, max_iter)(x)


def prox_empirical_hinge(
    x: Vector,
    data: Dataset,
    gamma: float,
    tol: float = settings.DYKSTRA_TOL,
    max_iter: int = settings.DYKSTRA_MAX_ITER,
) -> ProxResult:
    """Prox of the averaged hinge loss (1/m) sum_i h(eta_i <xi_i, .>)"""
    _require_positive(gamma=gamma)
    step = gamma / data.size
    samples = [data.sample(i) for i in range(data.size)]
    summands = [(lambda v, s=sample: prox_hinge_affine(v, s, step).point) for sample in samples]
    point, _, _ = dykstra_prox_sum(x, summands, tol=tol, max_iter=max_iter)
    margins = data.labels * (data.features @ point)
    moved = point - x
    objective = 0.5 * float(np.dot(moved, moved)) + gamma * float(np.maximum(0.0, 1.0 - margins).mean())
    return ProxResult(point=point, objective_value=objective)


# Moreau envelope
def moreau_eval(prox_output: ProxResult, x: Vector, phi_at_prox: float, gamma: float) -> MoreauEval:
    """Envelope value and gradient from a prox already computed at x"""
    _require_positive(gamma=gamma)
    p = prox_output.point
    moved = p - x
    value = phi_at_prox + float(np.dot(moved, moved)) / (2.0 * gamma)
    return MoreauEval(value=value, gradient=(x - p) / gamma)


# Brute-force minimisation
def line_search(
    profile: Callable[[float], Tuple[float, object]],
    lo: float,
    hi: float,
    tol: float,
) -> Tuple[float, object]:
    """Minimise a convex 1-D profile on [lo, hi]; returns the best (value, payload).

    A coarse grid picks the bracket around its best point (valid by convexity),
    then bounded Brent search shrinks it below `tol`. The best evaluation seen is
    returned, so the payload never needs recomputing.
    """
    if hi - lo <= tol:
        return profile(0.5 * (lo + hi))

    best: List[Tuple[float, object]] = []

    def value(t: float) -> float:
        evaluated = profile(float(t))
        if not best or evaluated[0] < best[0][0]:
            best[:] = [evaluated]
        return evaluated[0]

    ts = np.linspace(lo, hi, _GRID_POINTS)
    grid = [value(t) for t in ts]
    k = int(np.argmin(grid))
    a = float(ts[max(k - 1, 0)])
    b = float(ts[min(k + 1, _GRID_POINTS - 1)])
    minimize_scalar(
        value, bounds=(a, b), method="bounded", options={"xatol": tol, "maxiter": _SCALAR_MAX_ITER}
    )
    return best[0]


def minimize_convex_box(
    fun: Callable[[Vector], float], center: Vector, radius: float, tol: float
) -> Tuple[Vector, float]:
    """Minimise a convex function over the box center +- radius.

    Coordinate-wise line searches, nested: each evaluation of the search on
    coordinate k minimises over coordinates k+1.. first, so the outer searches see
    the (convex) partial minimum and cannot stall on kinks. The outermost
    coordinate is resolved to `tol`, inner ones as finely as the line search allows.
    """
    dimension = center.shape[0]
    lower = center - radius
    upper = center + radius
    inner_tol = _INNER_RELATIVE_TOL * (1.0 + float(np.abs(center).max()) + radius)
    outer_tol = max(tol, inner_tol)

    def search(fixed: Tuple[float, ...]) -> Tuple[float, Vector]:
        level = len(fixed)

        def profile(t: float) -> Tuple[float, Vector]:
            head = fixed + (t,)
            if level + 1 == dimension:
                point = np.array(head)
                return fun(point), point
            return search(head)

        level_tol = outer_tol if level == 0 else inner_tol
        return line_search(profile, float(lower[level]), float(upper[level]), level_tol)

    value, point = search(())
    return point, float(value)


def numerical_prox_oracle(
    phi: Callable[[Vector], float],
    x: Vector,
    gamma: float,
    resolution: float = settings.ORACLE_RESOLUTION,
    radius: Optional[float] = None,
) -> Vector:
    """Reference prox by brute force, for dimension <= 4 (test use only).

    The default search box has half-width sqrt(2 gamma phi(x)), which contains the
    prox point whenever phi >= 0. Kinked minimisers are resolved to about
    `resolution`; smooth ones only to about sqrt(machine epsilon) times their
    magnitude, the limit of any search driven by function values.
    """
    _require_positive(gamma=gamma, resolution=resolution)
    if x.shape[0] > _MAX_ORACLE_DIMENSION:
        raise InvalidParameterError(
            "numerical prox oracle supports at most 4 dimensions", dimension=int(x.shape[0])
        )
    if radius is None:
        radius = math.sqrt(2.0 * gamma * max(phi(x), 0.0))
    if radius == 0.0:
        return x.copy()

    def objective(y: Vector) -> float:
        moved = y - x
        return 0.5 * float(np.dot(moved, moved)) + gamma * phi(y)

    point, _ = minimize_convex_box(objective, x, radius, resolution)
    return point
