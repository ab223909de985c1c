"""Replication driver: backend selection, deterministic parallel execution,
and aggregation into empirical distributions.

Backend selection happens once at import. Set BANDITLAB_BACKEND=pure or
=compiled to force a kernel; the default (auto) prefers the compiled
extension and falls back to the pure-Python kernel. Both produce bit-identical
output for the same configuration, so the choice only affects speed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import Bernoulli, Deterministic, Gaussian, Instance
from .records import (
    EmpiricalDistribution,
    ExperimentConfig,
    InvariantViolation,
    RawResults,
    ReplicationResult,
)

__all__ = [
    "BACKEND",
    "run_replication",
    "run_replications_raw",
    "run_experiment",
    "aggregate",
    "z_statistic",
    "diffusion_paths",
    "DiffusionPaths",
    "simulate_fn",
]


def _select_backend():
    choice = os.environ.get("BANDITLAB_BACKEND", "auto")
    if choice not in ("auto", "compiled", "pure"):
        raise ValueError(
            f"BANDITLAB_BACKEND must be auto, compiled, or pure; got {choice!r}"
        )
    if choice in ("auto", "compiled"):
        try:
            from . import _kernels

            return _kernels.simulate, "compiled"
        except ImportError:
            if choice == "compiled":
                raise ImportError(
                    "BANDITLAB_BACKEND=compiled but the extension is not built; "
                    "reinstall the package or use BANDITLAB_BACKEND=pure"
                )
    from . import _pure

    return _pure.simulate, "pure"


simulate_fn, BACKEND = _select_backend()

_POLICY_CODES = {"ucb": 0, "ts_beta": 1, "ts_gaussian": 2}
_KIND_CODES = {Bernoulli: 0, Deterministic: 1, Gaussian: 2}


def _encode_instance(instance: Instance):
    k = instance.n_arms
    kinds = np.zeros(k, dtype=np.int64)
    p1 = np.zeros(k, dtype=np.float64)
    p2 = np.zeros(k, dtype=np.float64)
    for i, arm in enumerate(instance.arms):
        kinds[i] = _KIND_CODES[type(arm)]
        if isinstance(arm, Bernoulli):
            p1[i] = arm.q
        elif isinstance(arm, Deterministic):
            p1[i] = arm.v
        else:
            p1[i] = arm.mu
            p2[i] = arm.sigma
    return kinds, p1, p2


_EMPTY_SNAPS = np.zeros(0, dtype=np.int64)


def _make_bitgen(master_seed: int, stream_id: int):
    key = np.array([master_seed, stream_id], dtype=np.uint64)
    return np.random.Philox(key=key)


def _simulate_one(cfg: ExperimentConfig, rep_id: int, kinds, p1, p2, snaps):
    bitgen = _make_bitgen(cfg.master_seed, rep_id)
    rho = cfg.policy.rho if cfg.policy.rho is not None else 0.0
    return simulate_fn(
        _POLICY_CODES[cfg.policy.name], rho, kinds, p1, p2,
        cfg.horizon, snaps, bitgen,
    )


def z_statistic(result: ReplicationResult, reference_mean: float, arm: int = 1) -> float:
    """Gap-estimator statistic 2 sqrt(N_arm) (Xbar_arm - reference_mean).

    The factor 2 is 1/sqrt(q(1-q)) at q = 1/2, the variance normalization for
    the Bernoulli(1/2) sampled arm in the one-unknown-arm setup.
    """
    n_arm = int(result.counts[arm])
    if n_arm == 0:
        raise ValueError(f"arm {arm} was never pulled; the statistic is undefined")
    xbar = float(result.reward_sums[arm]) / n_arm
    return 2.0 * math.sqrt(n_arm) * (xbar - reference_mean)


def run_replication(cfg: ExperimentConfig, rep_id: int) -> ReplicationResult:
    """Play the policy for one full replication; a pure function of
    (cfg, rep_id)."""
    kinds, p1, p2 = _encode_instance(cfg.instance)
    snaps = cfg.snap_steps()
    counts, sums, snap_counts, snap_sums = _simulate_one(
        cfg, rep_id, kinds, p1, p2, snaps if snaps is not None else _EMPTY_SNAPS
    )
    n = cfg.horizon
    if int(counts.sum()) != n:
        raise InvariantViolation(
            f"replication {rep_id}: pulls sum to {int(counts.sum())}, expected {n}"
        )
    regret = n * cfg.instance.best_mean - float(sums.sum())
    z = None
    if cfg.record_z:
        probe = ReplicationResult(counts=counts, reward_sums=sums, stochastic_regret=regret)
        z = z_statistic(probe, cfg.z_reference_mean, cfg.z_arm)
    paths = None
    if cfg.path_grid is not None:
        centers = cfg.center_means()
        paths = []
        for j, t in enumerate(cfg.path_grid):
            c = snap_counts[j]
            centered = snap_sums[j] - centers * c
            paths.append((float(t), c.copy(), centered))
    return ReplicationResult(
        counts=counts,
        reward_sums=sums,
        stochastic_regret=regret,
        z_stat=z,
        path_samples=paths,
    )


def _default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def run_replications_raw(cfg: ExperimentConfig, threads: Optional[int] = None) -> RawResults:
    """Run every replication and collect dense arrays.

    Replication r always uses stream_id r regardless of scheduling, and each
    worker writes only its own rows, so the output is identical for any
    thread count.
    """
    threads = _default_threads() if threads is None else max(1, int(threads))
    kinds, p1, p2 = _encode_instance(cfg.instance)
    snaps = cfg.snap_steps()
    snaps_arr = snaps if snaps is not None else _EMPTY_SNAPS
    reps = cfg.replications
    k = cfg.instance.n_arms
    n = cfg.horizon

    counts = np.zeros((reps, k), dtype=np.int64)
    sums = np.zeros((reps, k), dtype=np.float64)
    record_paths = cfg.path_grid is not None
    g = len(snaps_arr)
    snap_counts = np.zeros((reps, g, k), dtype=np.int64) if record_paths else None
    snap_sums = np.zeros((reps, g, k), dtype=np.float64) if record_paths else None

    def work(lo: int, hi: int):
        for r in range(lo, hi):
            c, s, sc, ss = _simulate_one(cfg, r, kinds, p1, p2, snaps_arr)
            counts[r] = c
            sums[r] = s
            if record_paths:
                snap_counts[r] = sc
                snap_sums[r] = ss

    if threads == 1:
        work(0, reps)
    else:
        chunk = max(1, reps // (threads * 8))
        bounds = list(range(0, reps, chunk)) + [reps]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(work, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            for f in futures:
                f.result()

    if not np.all(counts.sum(axis=1) == n):
        bad = int(np.argmax(counts.sum(axis=1) != n))
        raise InvariantViolation(
            f"replication {bad}: pulls sum to {int(counts[bad].sum())}, expected {n}"
        )

    regrets = n * cfg.instance.best_mean - sums.sum(axis=1)
    z_stats = None
    if cfg.record_z:
        arm_counts = counts[:, cfg.z_arm]
        if np.any(arm_counts == 0):
            raise InvariantViolation(
                f"arm {cfg.z_arm} was never pulled in some replication; "
                "the z statistic is undefined"
            )
        xbar = sums[:, cfg.z_arm] / arm_counts
        z_stats = 2.0 * np.sqrt(arm_counts) * (xbar - cfg.z_reference_mean)

    return RawResults(
        config=cfg,
        counts=counts,
        reward_sums=sums,
        regrets=regrets,
        z_stats=z_stats,
        snap_counts=snap_counts,
        snap_sums=snap_sums,
    )


def aggregate(raw: RawResults) -> dict:
    """Order-insensitive empirical distributions of the standard statistics:
    per-arm pull shares and the two regret normalizations, plus the z
    statistic when recorded."""
    n = raw.config.horizon
    out = {}
    shares = raw.shares()
    for i in range(raw.n_arms):
        out[f"share_arm_{i + 1}"] = EmpiricalDistribution.from_samples(shares[:, i])
    out["regret_sqrt_n"] = EmpiricalDistribution.from_samples(raw.regrets / math.sqrt(n))
    if n >= 2:
        out["regret_sqrt_n_log_n"] = EmpiricalDistribution.from_samples(
            raw.regrets / math.sqrt(n * math.log(n))
        )
    if raw.z_stats is not None:
        out["z_stat"] = EmpiricalDistribution.from_samples(raw.z_stats)
    return out


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None) -> dict:
    """Map from statistic name to EmpiricalDistribution over all replications."""
    return aggregate(run_replications_raw(cfg, threads=threads))


@dataclass(frozen=True)
class DiffusionPaths:
    """Scaled process paths on the time grid.

    centered[i] has shape (reps, G): (S_i(floor(nt)) - mu N_i(floor(nt))) / sqrt(n).
    regret has shape (reps, G): R_{floor(nt)} / sqrt(n).
    """

    t_grid: np.ndarray
    centered: tuple
    regret: np.ndarray


def diffusion_paths(
    cfg: ExperimentConfig, mu: float, threads: Optional[int] = None
) -> DiffusionPaths:
    """Run the experiment and return diffusion-scaled paths centered at mu.

    The config must record paths; mu is the common base mean of the
    horizon-indexed instance family.
    """
    if cfg.path_grid is None:
        raise ValueError("diffusion paths need a config with path_grid set")
    raw = run_replications_raw(cfg, threads=threads)
    n = cfg.horizon
    root_n = math.sqrt(n)
    steps = cfg.snap_steps().astype(np.float64)
    centered = tuple(
        (raw.snap_sums[:, :, i] - mu * raw.snap_counts[:, :, i]) / root_n
        for i in range(raw.n_arms)
    )
    best = cfg.instance.best_mean
    regret = (steps[None, :] * best - raw.snap_sums.sum(axis=2)) / root_n
    return DiffusionPaths(
        t_grid=np.asarray(cfg.path_grid, dtype=np.float64),
        centered=centered,
        regret=regret,
    )
