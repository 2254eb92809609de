"""
Vector Arithmetic
Dense vectors over R^N and restriction / scatter on index sets
"""

from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from sdr.core.errors import DimensionMismatchError, IndexRangeError, InvalidParameterError

Vector = NDArray[np.float64]
IndexSet = NDArray[np.intp]


def as_vector(values: Union[Iterable[float], Vector], dimension: Optional[int] = None) -> Vector:
    """Copy `values` into a finite 1-D float vector, optionally of a fixed length"""
    vector = np.array(values, dtype=np.float64).reshape(-1)
    if vector.size == 0:
        raise DimensionMismatchError("vectors must have at least one entry")
    if dimension is not None and vector.size != dimension:
        raise DimensionMismatchError(
            "vector has the wrong length", expected=dimension, actual=int(vector.size)
        )
    if not np.isfinite(vector).all():
        raise InvalidParameterError("vector entries must be finite")
    return vector


def as_index_set(indices: Union[Sequence[int], IndexSet], dimension: int) -> IndexSet:
    """Validate a 0-based index set against a dimension"""
    index_set = np.asarray(indices, dtype=np.intp).reshape(-1)
    if index_set.size == 0:
        raise IndexRangeError("index set is empty")
    low, high = int(index_set.min()), int(index_set.max())
    if low < 0 or high >= dimension:
        raise IndexRangeError(
            "index out of range", dimension=dimension, low=low, high=high
        )
    return index_set


def dot(a: Vector, b: Vector) -> float:
    if a.shape != b.shape:
        raise DimensionMismatchError(
            "dot product of vectors with different lengths", left=a.shape[0], right=b.shape[0]
        )
    return float(np.dot(a, b))


def restrict(x: Vector, s: Union[Sequence[int], IndexSet]) -> Vector:
    """x_S: the sub-vector of x on s, in the order of s"""
    return x[as_index_set(s, x.shape[0])]


def scatter_add(x: Vector, s: Union[Sequence[int], IndexSet], v: Vector) -> Vector:
    """Adjoint of restrict: a copy of x with v added onto the coordinates in s"""
    index_set = as_index_set(s, x.shape[0])
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != index_set.shape[0]:
        raise DimensionMismatchError(
            "scatter block length differs from the index set size",
            block=int(v.shape[0]),
            indices=int(index_set.shape[0]),
        )
    out = x.copy()
    # repeated indices accumulate
    np.add.at(out, index_set, v)
    return out
