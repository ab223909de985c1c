"""Arm-selection policies: UCB with exploration coefficient rho, Beta-prior
posterior sampling, and a Gaussian-prior posterior sampling variant.

Selection functions are pure given (state, rng) and consume random words in a
fixed, documented order; the simulation kernels in banditlab.engine replicate
these semantics instruction-for-instruction, and the test suite pins the two
implementations against each other draw-by-draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import RngStream

__all__ = [
    "UcbState",
    "TsBetaState",
    "TsGaussianState",
    "PolicySpec",
    "ucb_select",
    "ts_beta_select",
    "ts_gaussian_select",
    "policy_update",
]


@dataclass
class UcbState:
    """Pull counts, reward sums, and the number of completed pulls t."""

    counts: np.ndarray
    reward_sums: np.ndarray
    t: int = 0

    @classmethod
    def fresh(cls, n_arms: int) -> "UcbState":
        return cls(
            counts=np.zeros(n_arms, dtype=np.int64),
            reward_sums=np.zeros(n_arms, dtype=np.float64),
            t=0,
        )

    @property
    def n_arms(self) -> int:
        return len(self.counts)


@dataclass
class TsBetaState:
    """Success/failure counters; the posterior for arm i is Beta(S_i+1, F_i+1)."""

    successes: np.ndarray
    failures: np.ndarray

    @classmethod
    def fresh(cls, n_arms: int) -> "TsBetaState":
        return cls(
            successes=np.zeros(n_arms, dtype=np.int64),
            failures=np.zeros(n_arms, dtype=np.int64),
        )

    @property
    def counts(self) -> np.ndarray:
        return self.successes + self.failures

    @property
    def n_arms(self) -> int:
        return len(self.successes)


@dataclass
class TsGaussianState:
    """Counts and reward sums; the posterior for arm i is
    Normal(reward_sums_i / (N_i + 1), 1 / (N_i + 1))."""

    counts: np.ndarray
    reward_sums: np.ndarray

    @classmethod
    def fresh(cls, n_arms: int) -> "TsGaussianState":
        return cls(
            counts=np.zeros(n_arms, dtype=np.int64),
            reward_sums=np.zeros(n_arms, dtype=np.float64),
        )

    @property
    def n_arms(self) -> int:
        return len(self.counts)


def _break_ties(ties: list, rng: RngStream) -> int:
    # Consumes one word only when there is an actual tie.
    if len(ties) == 1:
        return ties[0]
    return ties[rng.uniform_index(len(ties))]


def ucb_select(state: UcbState, rho: float, rng: RngStream) -> int:
    """Pick an argmax of X_bar_i + sqrt(rho ln(t) / N_i) with t = completed pulls.

    Requires rho > 1 and a completed initialization phase (every arm pulled
    once, so t >= K). Exact index ties are broken uniformly at random.
    """
    if rho <= 1.0:
        raise ValueError(f"rho must be > 1, got {rho}")
    k = state.n_arms
    if state.t < k:
        raise ValueError(
            f"initialization incomplete: t={state.t} < {k}; play each arm once first"
        )
    log_t = math.log(state.t)
    best = -math.inf
    ties: list = []
    for i in range(k):
        nc = float(state.counts[i])
        xbar = float(state.reward_sums[i]) / nc
        idx = xbar + math.sqrt(rho * log_t / nc)
        if idx > best:
            best = idx
            ties = [i]
        elif idx == best:
            ties.append(i)
    return _break_ties(ties, rng)


def ts_beta_select(state: TsBetaState, rng: RngStream) -> int:
    """Draw Beta(S_i+1, F_i+1) per arm, in arm order, and return the argmax."""
    best = -math.inf
    ties: list = []
    for i in range(state.n_arms):
        d = rng.next_beta(float(state.successes[i]) + 1.0, float(state.failures[i]) + 1.0)
        if d > best:
            best = d
            ties = [i]
        elif d == best:
            ties.append(i)
    return _break_ties(ties, rng)


def ts_gaussian_select(state: TsGaussianState, rng: RngStream) -> int:
    """Draw Normal(reward_sums_i/(N_i+1), 1/(N_i+1)) per arm, return the argmax."""
    best = -math.inf
    ties: list = []
    for i in range(state.n_arms):
        z = rng.next_normal()
        nc = float(state.counts[i]) + 1.0
        mu = float(state.reward_sums[i]) / nc
        sd = 1.0 / math.sqrt(nc)
        d = mu + sd * z
        if d > best:
            best = d
            ties = [i]
        elif d == best:
            ties.append(i)
    return _break_ties(ties, rng)


PolicyState = Union[UcbState, TsBetaState, TsGaussianState]


def policy_update(state: PolicyState, arm: int, reward: float) -> PolicyState:
    """Record one pull: exactly one arm's counters advance.

    Beta-prior states accept only rewards in {0.0, 1.0}; anything else signals
    a misconfigured instance.
    """
    if not 0 <= arm < state.n_arms:
        raise ValueError(f"arm index {arm} out of range")
    if isinstance(state, UcbState):
        state.counts[arm] += 1
        state.reward_sums[arm] += reward
        state.t += 1
    elif isinstance(state, TsBetaState):
        if reward == 1.0:
            state.successes[arm] += 1
        elif reward == 0.0:
            state.failures[arm] += 1
        else:
            raise ValueError(
                f"Beta-prior posterior sampling needs rewards in {{0,1}}, got {reward}"
            )
    elif isinstance(state, TsGaussianState):
        state.counts[arm] += 1
        state.reward_sums[arm] += reward
    else:
        raise TypeError(f"unknown policy state: {state!r}")
    return state


_POLICY_NAMES = ("ucb", "ts_beta", "ts_gaussian")


@dataclass(frozen=True)
class PolicySpec:
    """Validated policy configuration as it appears in experiment JSON."""

    name: str
    rho: Optional[float] = None

    def __post_init__(self):
        if self.name not in _POLICY_NAMES:
            raise ValueError(f"unknown policy {self.name!r}; expected one of {_POLICY_NAMES}")
        if self.name == "ucb":
            if self.rho is None:
                raise ValueError("ucb requires rho")
            if self.rho <= 1.0:
                raise ValueError(f"ucb requires rho > 1, got {self.rho}")
        elif self.rho is not None:
            raise ValueError(f"policy {self.name!r} takes no rho")

    def fresh_state(self, n_arms: int) -> PolicyState:
        if self.name == "ucb":
            return UcbState.fresh(n_arms)
        if self.name == "ts_beta":
            return TsBetaState.fresh(n_arms)
        return TsGaussianState.fresh(n_arms)

    def to_json(self) -> dict:
        doc: dict = {"policy": self.name}
        if self.rho is not None:
            doc["rho"] = self.rho
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "PolicySpec":
        if "policy" not in doc:
            raise ValueError("policy document missing 'policy' field")
        return cls(name=doc["policy"], rho=doc.get("rho"))
