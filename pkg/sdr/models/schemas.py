"""
Pydantic Schemas
Config, record and report models for everything written to or read from disk
"""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from sdr.core.errors import ConfigError


# Config Models
class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(200, ge=1)
    # Explicit 0-based groups; when given, the chain layout fields are ignored
    groups: Optional[List[List[int]]] = None
    group_count: int = Field(10, ge=1)
    group_size: int = Field(30, ge=1)
    group_overlap: int = Field(10, ge=0)
    active_groups: int = Field(3, ge=1)

    sample_count: int = Field(1000, ge=1)
    noise: float = Field(0.05, ge=0.0, le=0.5)
    # Features are feature_scale * N(0, I); at scale 1 the regulariser dominates and
    # the minimiser of the default problem is exactly 0
    feature_scale: PositiveFloat = 6.0

    gamma: PositiveFloat = 0.05
    gammas: List[PositiveFloat] = Field(default_factory=lambda: [0.5, 0.05, 0.005], min_length=1)
    n_iters: int = Field(100_000, ge=1)
    n_seeds: int = Field(20, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    data_seed: int = Field(0, ge=0, lt=2**64)
    record_every: int = Field(100, ge=1)
    init_scale: float = Field(1.0, ge=0.0)

    dykstra_tol: PositiveFloat = 1e-8
    dykstra_max_iter: int = Field(10_000, ge=1)
    reference_budget: int = Field(100_000, ge=100_000)

    epsilon: Optional[float] = Field(None, ge=0.0)
    relative_epsilon: float = Field(0.1, ge=0.0)
    threshold_ratio: float = Field(1.05, ge=1.0)
    # Per-run wall-clock cap (seconds) in the benchmark; None runs every iteration
    time_budget: Optional[PositiveFloat] = 10.0

    output: str = "results"

    @model_validator(mode="after")
    def check_group_layout(self) -> "ExperimentConfig":
        if self.groups is not None:
            if len(self.groups) == 0:
                raise ConfigError("at least one group is required", field="groups")
            for j, group in enumerate(self.groups):
                if not group:
                    raise ConfigError(f"group {j} is empty", field="groups")
                if min(group) < 0 or max(group) >= self.dimension:
                    raise ConfigError(
                        f"group {j} has an index outside [0, {self.dimension})", field="groups"
                    )
        else:
            if self.group_size > self.dimension:
                raise ConfigError("group_size exceeds dimension", field="group_size")
            if self.group_overlap >= self.group_size:
                raise ConfigError("group_overlap must be smaller than group_size", field="group_overlap")
            stride = self.group_size - self.group_overlap
            if (self.group_count - 1) * stride + self.group_size < self.dimension:
                raise ConfigError(
                    "chain layout leaves coordinates uncovered; raise group_count or group_size",
                    field="group_count",
                )
        return self


# Record Models
class RunRecord(BaseModel):
    iteration: int
    wall_seconds: float
    objective_y: float
    objective_ergodic: float
    dist_ergodic: float


RUN_RECORD_COLUMNS = list(RunRecord.model_fields)


class ReferenceSolution(BaseModel):
    point: List[float]
    objective: float
    method: str
    residual: float
    # False when a point of equal objective was found far from `point`;
    # distances are then only upper bounds on d(x, argmin)
    unique: bool = True

    def vector(self) -> np.ndarray:
        return np.asarray(self.point, dtype=np.float64)


# Report Models
class RunSummary(BaseModel):
    algorithm: str
    seed: int
    gamma: float
    n_iters: int
    final_objective_y: float
    final_objective_ergodic: float
    final_dist_ergodic: float
    sup_norm: float
    wall_seconds: float
    draw_digest: str
    reference_objective: Optional[float] = None
    config: ExperimentConfig
    version: str


class HistogramData(BaseModel):
    bin_edges: List[float]
    counts: Dict[str, List[int]]


class SeedComparison(BaseModel):
    seed: int
    time_to_threshold: Dict[str, Optional[float]]
    final_objective_ergodic: Dict[str, float]
    # completed iterations; below n_iters when the time budget ran out
    iterations: Dict[str, int]
    paired: bool


class BenchmarkReport(BaseModel):
    gamma: float
    reference_objective: float
    threshold: float
    seeds: List[SeedComparison]
    sdr_wins: int
    mean_iteration_seconds: Dict[str, float]
    histograms: HistogramData
    config: ExperimentConfig
    version: str


class ProbeRow(BaseModel):
    gamma: float
    epsilon: float
    n_seeds: int
    n_iters: int
    prob_final: float
    cesaro_mean: float
    sup_norm_max: float
    # lowest final F+G(xbar_n) over the runs that finished
    min_objective_ergodic: float
    divergences: int


PROBE_COLUMNS = list(ProbeRow.model_fields)


class ProbeReport(BaseModel):
    rows: List[ProbeRow]
    # gamma -> (iteration, seed-averaged drift) pairs
    drift: Dict[str, List[List[float]]]
    # gamma -> final d(xbar_n, x*) per seed, in seed order; None for a diverged run
    distances: Dict[str, List[Optional[float]]]
    reference_objective: float
    reference_norm: float


class ProbeSummary(ProbeReport):
    epsilon: float
    config: ExperimentConfig
    version: str


class ReferenceSummary(ReferenceSolution):
    """reference.json: readable back as a plain ReferenceSolution"""

    config: ExperimentConfig
    version: str


class ProxCheckRow(BaseModel):
    family: str
    check: str
    trials: int
    max_error: float
    tolerance: float
    passed: bool


PROX_CHECK_COLUMNS = list(ProxCheckRow.model_fields)
