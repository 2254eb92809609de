"""
Application Configuration
Environment settings plus loading and saving of the JSON experiment file
"""

import json
import os
from pathlib import Path
from typing import Union

from dotenv import load_dotenv
from pydantic import ValidationError

from sdr import __version__
from sdr.core.errors import ConfigError
from sdr.models.schemas import ExperimentConfig

# Load environment variables
load_dotenv()


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}", field=name)
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}", field=name)
    return value


class Config:
    # Parallelism
    SDR_THREADS = _int_env("SDR_THREADS", os.cpu_count() or 1)

    # Logging and output
    LOG_LEVEL = os.getenv("SDR_LOG_LEVEL", "INFO").upper()
    OUTPUT_DIR = os.getenv("SDR_OUTPUT_DIR", "results")

    # Numerical defaults
    DYKSTRA_TOL = 1e-8
    DYKSTRA_MAX_ITER = 10_000
    LOGISTIC_TOL = 1e-12
    LOGISTIC_MAX_ITER = 100
    RECORD_EVERY = 100
    REFERENCE_BUDGET = 100_000
    ORACLE_RESOLUTION = 1e-9

    # Application Settings
    PROJECT_NAME = "Stochastic Douglas-Rachford"
    VERSION = __version__


# Global settings instance
settings = Config()


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read, validate and default-fill an experiment config file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", field="path")

    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path}: {e.msg} at line {e.lineno}", field="path")

    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(raw).__name__}", field="path")

    return validate_config(raw)


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a config mapping; the first failing field is named in the error"""
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = [str(part) for part in first.get("loc", ())]
        field = loc[0] if loc else "config"
        where = ".".join(loc) if loc else "config"
        raise ConfigError(f"invalid config field '{where}': {first.get('msg')}", field=field)


def emit_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    """Write the full effective config so that parse_config reproduces it exactly"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    return path
