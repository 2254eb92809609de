"""
Seed-Level Parallelism
Independent (algorithm, gamma, seed) cells fanned out over worker processes
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from sdr.core.config import settings

logger = logging.getLogger(__name__)

Cell = TypeVar("Cell")
Result = TypeVar("Result")


def map_cells(
    fn: Callable[[Cell], Result], cells: Sequence[Cell], threads: Optional[int] = None
) -> List[Result]:
    """Apply a picklable `fn` to every cell, preserving order; capped by SDR_THREADS"""
    workers = min(threads or settings.SDR_THREADS, len(cells))
    if workers <= 1:
        return [fn(cell) for cell in cells]
    logger.info("Running %d cells on %d workers", len(cells), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))
