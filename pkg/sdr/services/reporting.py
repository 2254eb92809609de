"""
Result Files
CSV time series and tables, JSON summaries
"""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
from pydantic import BaseModel

from sdr.models.schemas import (
    PROBE_COLUMNS,
    PROX_CHECK_COLUMNS,
    RUN_RECORD_COLUMNS,
    ProbeRow,
    ProxCheckRow,
    RunRecord,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """UTF-8, comma-separated, header row, one record per line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(value) for value in row])
    logger.debug("Wrote %s", path)
    return path


def write_records(path: PathLike, records: Sequence[RunRecord]) -> Path:
    return write_csv(
        path,
        RUN_RECORD_COLUMNS,
        ([getattr(record, column) for column in RUN_RECORD_COLUMNS] for record in records),
    )


def read_records(path: PathLike) -> List[RunRecord]:
    with Path(path).open(encoding="utf-8", newline="") as handle:
        return [RunRecord.model_validate(row) for row in csv.DictReader(handle)]


def write_probe_table(path: PathLike, rows: Sequence[ProbeRow]) -> Path:
    return write_csv(path, PROBE_COLUMNS, ([getattr(row, c) for c in PROBE_COLUMNS] for row in rows))


def write_prox_check(path: PathLike, rows: Sequence[ProxCheckRow]) -> Path:
    return write_csv(
        path, PROX_CHECK_COLUMNS, ([getattr(row, c) for c in PROX_CHECK_COLUMNS] for row in rows)
    )


def write_summary(path: PathLike, summary: Union[BaseModel, dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(summary, BaseModel):
        text = summary.model_dump_json(indent=2)
    else:
        text = json.dumps(summary, indent=2, default=str)
    path.write_text(text, encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path
