"""Deterministic parallel Monte Carlo engine."""

from .records import (
    DEFAULT_PATH_POINTS,
    EmpiricalDistribution,
    ExperimentConfig,
    InvariantViolation,
    RawResults,
    ReplicationResult,
    default_path_grid,
    write_distributions_json,
    write_paths_csv,
    write_replications_csv,
)
from .runner import (
    BACKEND,
    DiffusionPaths,
    aggregate,
    diffusion_paths,
    run_experiment,
    run_replication,
    run_replications_raw,
    z_statistic,
)

__all__ = [
    "BACKEND",
    "DEFAULT_PATH_POINTS",
    "DiffusionPaths",
    "EmpiricalDistribution",
    "ExperimentConfig",
    "InvariantViolation",
    "RawResults",
    "ReplicationResult",
    "aggregate",
    "default_path_grid",
    "diffusion_paths",
    "run_experiment",
    "run_replication",
    "run_replications_raw",
    "write_distributions_json",
    "write_paths_csv",
    "write_replications_csv",
    "z_statistic",
]
