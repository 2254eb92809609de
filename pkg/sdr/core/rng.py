"""
Seeded Randomness
PCG64 streams derived from a 64-bit master seed by fixed offsets
"""

from typing import TYPE_CHECKING, Optional

import numpy as np

from sdr.core.errors import InvalidParameterError

if TYPE_CHECKING:
    from sdr.models.domain import Dataset, Sample

# Fixed stream offsets; the data and group streams are independent so that two
# algorithms run on one seed see the identical data sequence.
DATA_STREAM = 0
GROUP_STREAM = 1
INIT_STREAM = 2
DATASET_STREAM = 3
CHECK_STREAM = 4

_SEED_LIMIT = 2**64


class SeededRng:
    """Single-owner PCG64 generator; equal seeds give equal draws on every platform"""

    def __init__(self, seed: int, offset: Optional[int] = None):
        if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < _SEED_LIMIT:
            raise InvalidParameterError("seed must be an unsigned 64-bit integer", seed=seed)
        self.seed = int(seed)
        self.offset = offset
        spawn_key = () if offset is None else (int(offset),)
        sequence = np.random.SeedSequence(self.seed, spawn_key=spawn_key)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def derive(self, offset: int) -> "SeededRng":
        """Independent stream for the same master seed"""
        return SeededRng(self.seed, offset=offset)

    def index(self, n: int) -> int:
        return int(self.generator.integers(n))

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def choice(self, n: int, size: int, replace: bool = False):
        return self.generator.choice(n, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, offset={self.offset})"


def draw_index(data: "Dataset", rng: SeededRng) -> int:
    """Uniform index into the dataset; advances the generator by one draw"""
    return rng.index(data.size)


def draw_sample(data: "Dataset", rng: SeededRng) -> "Sample":
    """One i.i.d. draw from the empirical distribution of `data`"""
    return data.sample(draw_index(data, rng))
