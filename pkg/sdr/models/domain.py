"""
Domain Types
Numeric types shared by the prox, solver and oracle services
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sdr.core.errors import DimensionMismatchError, IndexRangeError, InvalidParameterError
from sdr.core.linalg import IndexSet, Vector, as_index_set
from sdr.models.schemas import RunRecord


@dataclass(frozen=True)
class GroupSpec:
    """Possibly overlapping 0-based index sets S_0, ..., S_{g-1} of {0, ..., N-1}"""

    groups: Tuple[IndexSet, ...]
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidParameterError("dimension must be positive", dimension=self.dimension)
        if len(self.groups) == 0:
            raise IndexRangeError("a group specification needs at least one group")
        checked = tuple(as_index_set(group, self.dimension) for group in self.groups)
        object.__setattr__(self, "groups", checked)

    @classmethod
    def from_lists(cls, groups: Sequence[Sequence[int]], dimension: int) -> "GroupSpec":
        return cls(tuple(np.asarray(group, dtype=np.intp) for group in groups), dimension)

    @classmethod
    def chain(cls, dimension: int, count: int, size: int, overlap: int) -> "GroupSpec":
        """Consecutive blocks of `size` sharing `overlap` coordinates with their neighbour"""
        stride = size - overlap
        groups = []
        for j in range(count):
            start = min(j * stride, dimension - size)
            groups.append(np.arange(start, start + size, dtype=np.intp))
        return cls(tuple(groups), dimension)

    @property
    def count(self) -> int:
        return len(self.groups)

    def __getitem__(self, j: int) -> IndexSet:
        return self.groups[j]

    def __len__(self) -> int:
        return len(self.groups)

    def covers(self) -> bool:
        covered = np.zeros(self.dimension, dtype=bool)
        for group in self.groups:
            covered[group] = True
        return bool(covered.all())

    def is_disjoint(self) -> bool:
        seen = np.zeros(self.dimension, dtype=np.intp)
        for group in self.groups:
            np.add.at(seen, group, 1)
        return bool((seen <= 1).all())

    def to_lists(self) -> List[List[int]]:
        return [group.tolist() for group in self.groups]


@dataclass(frozen=True)
class Sample:
    features: Vector
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise InvalidParameterError("labels must be -1 or +1", label=self.label)

    @property
    def direction(self) -> Vector:
        """a = eta * xi, the direction the loss acts along"""
        return self.label * self.features


@dataclass(frozen=True)
class Dataset:
    """Finite sample whose uniform empirical distribution is the problem's distribution"""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels).astype(np.int64).reshape(-1)
        if features.ndim != 2 or features.shape[0] == 0 or features.shape[1] == 0:
            raise DimensionMismatchError("features must be a non-empty (m, N) matrix")
        if labels.shape[0] != features.shape[0]:
            raise DimensionMismatchError(
                "one label per sample is required", samples=features.shape[0], labels=labels.shape[0]
            )
        if not np.isin(labels, (-1, 1)).all():
            raise InvalidParameterError("labels must be -1 or +1")
        if not np.isfinite(features).all():
            raise InvalidParameterError("features must be finite")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "Dataset":
        if not samples:
            raise DimensionMismatchError("a dataset needs at least one sample")
        return cls(
            np.stack([np.asarray(s.features, dtype=np.float64) for s in samples]),
            np.array([s.label for s in samples]),
        )

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def sample(self, i: int) -> Sample:
        return Sample(self.features[i], int(self.labels[i]))

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return Dataset(self.features, labels)


@dataclass(frozen=True)
class Problem:
    """Empirical SVM problem regularised by the overlapping group lasso"""

    data: Dataset
    groups: GroupSpec

    def __post_init__(self):
        if self.data.dimension != self.groups.dimension:
            raise DimensionMismatchError(
                "dataset and groups disagree on the dimension",
                data=self.data.dimension,
                groups=self.groups.dimension,
            )

    @property
    def dimension(self) -> int:
        return self.data.dimension


@dataclass(frozen=True)
class ProxResult:
    point: Vector
    # 1/2 ||point - x||^2 + gamma * phi(point)
    objective_value: float


@dataclass(frozen=True)
class MoreauEval:
    value: float
    gradient: Vector


@dataclass(frozen=True)
class DrState:
    x: Vector
    y: Vector
    z: Vector
    iter: int
    gamma: float

    @classmethod
    def start(cls, x0: Vector, gamma: float) -> "DrState":
        if not gamma > 0:
            raise InvalidParameterError("gamma must be positive", gamma=gamma)
        return cls(x=x0, y=x0.copy(), z=x0.copy(), iter=0, gamma=float(gamma))


@dataclass(frozen=True)
class ErgodicAverage:
    mean: Vector
    count: int = 0

    @classmethod
    def empty(cls, dimension: int) -> "ErgodicAverage":
        return cls(np.zeros(dimension), 0)


@dataclass(frozen=True)
class InterpolatedPath:
    times: np.ndarray
    values: np.ndarray


@dataclass
class Trajectory:
    algorithm: str
    gamma: float
    seed: int
    n_iters: int
    records: List[RunRecord]
    final_state: DrState
    ergodic: ErgodicAverage
    initial_point: Vector
    sup_norm: float
    draw_digest: str
    # fraction of iterates x_0..x_n with d(x_k) > epsilon, when epsilon was given
    cesaro_exceedance: Optional[float] = None
    # (iteration, mean of ||x_{k+1}-x*||^2 - ||x_k-x*||^2 over the record window)
    drift: List[Tuple[int, float]] = field(default_factory=list)
    snapshots: List[Tuple[int, Vector]] = field(default_factory=list)

    @property
    def final_point(self) -> Vector:
        return self.final_state.x

    def series(self, with_wall: bool = True) -> List[tuple]:
        """Record tuples in column order; wall clock excluded when comparing runs"""
        rows = []
        for record in self.records:
            row = tuple(record.model_dump().values())
            rows.append(row if with_wall else row[:1] + row[2:])
        return rows
