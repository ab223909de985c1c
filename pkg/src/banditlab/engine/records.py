"""Result containers, experiment configuration, and CSV emission for the
Monte Carlo engine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..model import Instance, instance_from_json, instance_to_json
from ..policies import PolicySpec


class InvariantViolation(RuntimeError):
    """A simulation output broke a contract that should hold by construction."""


DEFAULT_PATH_POINTS = 101


def default_path_grid(points: int = DEFAULT_PATH_POINTS) -> tuple:
    """Evenly spaced time fractions 0, 1/(points-1), ..., 1."""
    if points < 2:
        raise ValueError("need at least 2 grid points")
    return tuple(np.linspace(0.0, 1.0, points))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a replication needs; a pure value, hashable to a manifest.

    ``path_grid`` is a tuple of time fractions t in [0, 1] at which the
    per-arm counts and reward sums are snapshotted (pull index floor(n*t)),
    or None to skip path recording. ``path_center_mean`` is the mean used to
    center snapshot reward sums; None centers each arm at its own mean.
    """

    instance: Instance
    policy: PolicySpec
    replications: int
    master_seed: int = 42
    path_grid: Optional[tuple] = None
    path_center_mean: Optional[float] = None
    record_z: bool = False
    z_arm: int = 1
    z_reference_mean: float = 0.5

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.instance.n_arms > 64:
            raise ValueError("the engine supports at most 64 arms")
        if self.policy.name == "ts_beta":
            bad = [i for i, a in enumerate(self.instance.arms) if not a.is_binary()]
            if bad:
                raise ValueError(
                    f"ts_beta needs arms with rewards in {{0,1}}; arms {bad} are not"
                )
        if self.path_grid is not None:
            grid = tuple(float(t) for t in self.path_grid)
            if len(grid) == 0:
                raise ValueError("path_grid must be non-empty or None")
            if any(not 0.0 <= t <= 1.0 for t in grid):
                raise ValueError("path_grid points must lie in [0,1]")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("path_grid must be strictly increasing")
            object.__setattr__(self, "path_grid", grid)
        if self.record_z and not 0 <= self.z_arm < self.instance.n_arms:
            raise ValueError(f"z_arm {self.z_arm} out of range")

    @property
    def horizon(self) -> int:
        return self.instance.horizon

    def snap_steps(self) -> Optional[np.ndarray]:
        """Pull indices floor(n*t) for the path grid, in grid order."""
        if self.path_grid is None:
            return None
        n = self.horizon
        return np.array([int(math.floor(n * t)) for t in self.path_grid], dtype=np.int64)

    def center_means(self) -> np.ndarray:
        """Per-arm centering means for snapshot reward sums."""
        if self.path_center_mean is not None:
            return np.full(self.instance.n_arms, self.path_center_mean, dtype=np.float64)
        return np.array(self.instance.means, dtype=np.float64)

    def to_json(self) -> dict:
        doc = {
            "instance": instance_to_json(self.instance),
            "policy": self.policy.to_json(),
            "replications": self.replications,
            "master_seed": self.master_seed,
        }
        record: dict = {}
        if self.path_grid is not None:
            record["paths"] = True
            record["path_points"] = len(self.path_grid)
            if self.path_center_mean is not None:
                record["path_center_mean"] = self.path_center_mean
        if self.record_z:
            record["z_stat"] = True
            record["z_arm"] = self.z_arm
            record["z_reference_mean"] = self.z_reference_mean
        if record:
            doc["record"] = record
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        try:
            instance = instance_from_json(doc["instance"])
            policy = PolicySpec.from_json(doc["policy"])
            replications = int(doc["replications"])
        except KeyError as exc:
            raise ValueError(f"experiment document missing field {exc}") from exc
        record = doc.get("record", {})
        path_grid = None
        if record.get("paths"):
            path_grid = default_path_grid(int(record.get("path_points", DEFAULT_PATH_POINTS)))
        return cls(
            instance=instance,
            policy=policy,
            replications=replications,
            master_seed=int(doc.get("master_seed", 42)),
            path_grid=path_grid,
            path_center_mean=record.get("path_center_mean"),
            record_z=bool(record.get("z_stat", False)),
            z_arm=int(record.get("z_arm", 1)),
            z_reference_mean=float(record.get("z_reference_mean", 0.5)),
        )


@dataclass(frozen=True)
class ReplicationResult:
    """Terminal state of one replication.

    path_samples, when recorded, is a list of (t, counts_vector,
    centered_reward_vector) triples along the configured grid, where the
    centered reward of arm i at pull m is S_i(m) - center_mean_i * N_i(m).
    """

    counts: np.ndarray
    reward_sums: np.ndarray
    stochastic_regret: float
    z_stat: Optional[float] = None
    path_samples: Optional[list] = None

    @property
    def n_pulls(self) -> int:
        return int(self.counts.sum())

    def share(self, arm: int = 0) -> float:
        return float(self.counts[arm]) / self.n_pulls


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample set with summary statistics."""

    samples: np.ndarray
    count: int
    mean: float
    variance: float

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        arr = np.sort(np.asarray(samples, dtype=np.float64))
        if len(arr) == 0:
            raise ValueError("need at least one sample")
        return cls(
            samples=arr,
            count=len(arr),
            mean=float(arr.mean()),
            variance=float(arr.var()),
        )

    def summary(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "min": float(self.samples[0]),
            "max": float(self.samples[-1]),
        }


@dataclass
class RawResults:
    """Dense per-replication arrays for a whole experiment.

    Shapes: counts (reps, K) int64; reward_sums (reps, K) float64;
    regrets (reps,); z_stats (reps,) or None; snap_counts / snap_sums
    (reps, G, K) or None.
    """

    config: ExperimentConfig
    counts: np.ndarray
    reward_sums: np.ndarray
    regrets: np.ndarray
    z_stats: Optional[np.ndarray] = None
    snap_counts: Optional[np.ndarray] = None
    snap_sums: Optional[np.ndarray] = None

    @property
    def replications(self) -> int:
        return self.counts.shape[0]

    @property
    def n_arms(self) -> int:
        return self.counts.shape[1]

    def shares(self) -> np.ndarray:
        """(reps, K) matrix of N_i(n)/n."""
        return self.counts / float(self.config.horizon)


def _fmt(x: float) -> str:
    # repr() round-trips doubles exactly and is stable across runs, which the
    # byte-identical CSV contract relies on.
    return repr(float(x))


def write_replications_csv(raw: RawResults, path) -> None:
    """One row per replication: rep_id, N_1..N_K, R_n and, when recorded,
    z_stat. Row order is replication order, independent of thread count."""
    k = raw.n_arms
    header = ["rep_id"] + [f"N_{i + 1}" for i in range(k)] + ["R_n"]
    with_z = raw.z_stats is not None
    if with_z:
        header.append("z_stat")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in range(raw.replications):
            row = [str(r)] + [str(int(c)) for c in raw.counts[r]] + [_fmt(raw.regrets[r])]
            if with_z:
                row.append(_fmt(raw.z_stats[r]))
            fh.write(",".join(row) + "\n")


def write_paths_csv(raw: RawResults, path) -> None:
    """Long-format path table: rep_id, t, arm (1-based), count,
    centered_reward."""
    if raw.snap_counts is None:
        raise ValueError("this experiment did not record paths")
    grid = raw.config.path_grid
    centers = raw.config.center_means()
    k = raw.n_arms
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rep_id,t,arm,count,centered_reward\n")
        for r in range(raw.replications):
            for j, t in enumerate(grid):
                for i in range(k):
                    c = int(raw.snap_counts[r, j, i])
                    centered = float(raw.snap_sums[r, j, i]) - centers[i] * c
                    fh.write(f"{r},{_fmt(t)},{i + 1},{c},{_fmt(centered)}\n")


def write_distributions_json(distributions: dict, path) -> None:
    import json

    doc = {name: dist.summary() for name, dist in distributions.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
