"""
Shared Command Helpers
Config loading with flag overrides and reference-solution files
"""

import argparse
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from sdr.core.config import parse_config, settings, validate_config
from sdr.core.errors import ConfigError, DimensionMismatchError
from sdr.models.domain import Problem
from sdr.models.schemas import ExperimentConfig, ReferenceSolution
from sdr.services.oracle import reference_solve

# flag attribute -> config field
_OVERRIDES = {
    "seed": "seed",
    "gamma": "gamma",
    "iters": "n_iters",
    "seeds": "n_seeds",
    "epsilon": "epsilon",
    "out": "output",
}


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON experiment config")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed")
    parser.add_argument("--reference", metavar="PATH", help="reference solution JSON from the oracle command")


def parse_gammas(raw: str) -> List[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--gammas must be a comma-separated list of numbers, got {raw!r}", field="gammas")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with command-line flags applied on top"""
    config = parse_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    overrides = {}
    for flag, field in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    if getattr(args, "gammas", None):
        overrides["gammas"] = parse_gammas(args.gammas)
    if "output" not in overrides and "output" not in config.model_fields_set:
        overrides["output"] = settings.OUTPUT_DIR
    if not overrides:
        return config
    return validate_config({**config.model_dump(), **overrides})


def load_reference(path: Optional[str], problem: Problem, budget: int) -> ReferenceSolution:
    """Read a stored reference solution, or compute one"""
    if not path:
        return reference_solve(problem.data, problem.groups, budget)
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"reference file not found: {file}", field="reference")
    try:
        reference = ReferenceSolution.model_validate_json(file.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigError(f"malformed reference file {file}: {e.errors()[0].get('msg')}", field="reference")
    if len(reference.point) != problem.dimension:
        raise DimensionMismatchError(
            "reference solution has the wrong dimension",
            expected=problem.dimension,
            actual=len(reference.point),
        )
    return reference
