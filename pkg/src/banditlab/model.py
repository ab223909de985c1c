"""Reward distributions, bandit instances, gap-regime constructors, and the
deterministic RNG contract shared by every module.

All rewards are i.i.d. draws from per-arm distributions. Bernoulli and
deterministic rewards live in [0, 1]; Gaussian rewards are admitted only for
diffusion-scaled experiments. Randomness flows exclusively through
:class:`RngStream`, a counter-based stream keyed by (master_seed, stream_id),
so every replication replays bit-identically regardless of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import ndtri

__all__ = [
    "Bernoulli",
    "Deterministic",
    "Gaussian",
    "RewardDistribution",
    "RegimeKind",
    "RegimePrediction",
    "Instance",
    "RngStream",
    "make_moderate_gap_instance",
    "make_diffusion_instance",
    "sample_reward",
    "instance_to_json",
    "instance_from_json",
]

# Smallest positive double drawn by a 53-bit uniform; used to keep the
# inverse-CDF transform away from u = 0.
_U_FLOOR = 2.0 ** -53

GAP_TOL = 1e-12


@dataclass(frozen=True)
class RewardDistribution:
    """Base class for per-arm reward laws. Use the concrete subclasses."""

    kind = "abstract"

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def is_binary(self) -> bool:
        """True when every draw is exactly 0.0 or 1.0."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Bernoulli(RewardDistribution):
    q: float

    kind = "bernoulli"

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"Bernoulli q must lie in [0,1], got {self.q}")

    def mean(self) -> float:
        return self.q

    def variance(self) -> float:
        return self.q * (1.0 - self.q)

    def is_binary(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {"kind": "bernoulli", "q": self.q}


@dataclass(frozen=True)
class Deterministic(RewardDistribution):
    v: float

    kind = "deterministic"

    def __post_init__(self):
        if not 0.0 <= self.v <= 1.0:
            raise ValueError(f"Deterministic value must lie in [0,1], got {self.v}")

    def mean(self) -> float:
        return self.v

    def variance(self) -> float:
        return 0.0

    def is_binary(self) -> bool:
        return self.v in (0.0, 1.0)

    def to_json(self) -> dict:
        return {"kind": "deterministic", "v": self.v}


@dataclass(frozen=True)
class Gaussian(RewardDistribution):
    mu: float
    sigma: float

    kind = "gaussian"

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"Gaussian sigma must be >= 0, got {self.sigma}")

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.sigma * self.sigma

    def is_binary(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {"kind": "gaussian", "mean": self.mu, "sigma": self.sigma}


class RegimeKind(str, Enum):
    """Gap regime of an instance, which fixes the predicted limiting share of
    pulls on an optimal arm."""

    LARGE = "large"
    SMALL = "small"
    MODERATE = "moderate"
    ZERO = "zero"
    K_IDENTICAL = "k_identical"
    K_SEPARATED = "k_separated"


@dataclass(frozen=True)
class RegimePrediction:
    """Regime label plus its parameters.

    ``share`` is the predicted limiting fraction of pulls on an optimal arm
    when that number is determined by the regime alone. For the moderate
    regime it stays None: the limit depends on the exploration coefficient
    rho, which is chosen at experiment time (see
    :func:`banditlab.asymptotics.predicted_share`).
    """

    kind: RegimeKind
    c: Optional[float] = None       # small gap: gap = c / sqrt(n)
    theta: Optional[float] = None    # moderate gap: gap = sqrt(theta ln n / n)
    share: Optional[float] = None

    def __post_init__(self):
        if self.kind is RegimeKind.SMALL:
            if self.c is None or self.c < 0.0:
                raise ValueError("small-gap regime needs c >= 0")
        elif self.c is not None:
            raise ValueError("c is only meaningful for the small-gap regime")
        if self.kind is RegimeKind.MODERATE:
            if self.theta is None or self.theta < 0.0:
                raise ValueError("moderate-gap regime needs theta >= 0")
        elif self.theta is not None:
            raise ValueError("theta is only meaningful for the moderate-gap regime")
        if self.share is not None and not 0.0 <= self.share <= 1.0:
            raise ValueError(f"predicted share must lie in [0,1], got {self.share}")

    def declared_gap(self, n: int) -> Optional[float]:
        """The gap this regime pins down at horizon n, or None if unpinned."""
        if self.kind is RegimeKind.ZERO:
            return 0.0
        if self.kind is RegimeKind.SMALL:
            return self.c / math.sqrt(n)
        if self.kind is RegimeKind.MODERATE:
            return math.sqrt(self.theta * math.log(n) / n)
        return None

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind.value}
        if self.c is not None:
            doc["c"] = self.c
        if self.theta is not None:
            doc["theta"] = self.theta
        if self.share is not None:
            doc["share"] = self.share
        return doc


def _default_share(kind: RegimeKind, n_optimal: int) -> Optional[float]:
    if kind is RegimeKind.LARGE:
        return 1.0
    if kind in (RegimeKind.SMALL, RegimeKind.ZERO):
        return 0.5
    if kind in (RegimeKind.K_IDENTICAL, RegimeKind.K_SEPARATED):
        return 1.0 / n_optimal
    return None  # moderate: needs rho


@dataclass(frozen=True)
class Instance:
    """A bandit problem: K reward distributions, a horizon, and a regime tag."""

    arms: tuple
    horizon: int
    regime: RegimePrediction

    def __post_init__(self):
        arms = tuple(self.arms)
        object.__setattr__(self, "arms", arms)
        if len(arms) < 2:
            raise ValueError("an instance needs at least 2 arms")
        for a in arms:
            if not isinstance(a, RewardDistribution):
                raise TypeError(f"not a reward distribution: {a!r}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        declared = self.regime.declared_gap(self.horizon)
        if declared is not None and len(arms) == 2:
            if abs(self.gap - declared) > GAP_TOL:
                raise ValueError(
                    f"instance gap {self.gap} disagrees with the regime's "
                    f"declared gap {declared}"
                )
        if self.regime.kind is RegimeKind.K_IDENTICAL:
            if len(self.optimal_set) != len(arms):
                raise ValueError("k_identical regime requires all means equal")
        if self.regime.kind is RegimeKind.K_SEPARATED:
            if len(self.optimal_set) == len(arms):
                raise ValueError("k_separated regime requires a strict gap")
        if self.regime.share is None:
            share = _default_share(self.regime.kind, len(self.optimal_set))
            if share is not None:
                object.__setattr__(
                    self,
                    "regime",
                    RegimePrediction(
                        kind=self.regime.kind,
                        c=self.regime.c,
                        theta=self.regime.theta,
                        share=share,
                    ),
                )

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> tuple:
        return tuple(a.mean() for a in self.arms)

    @property
    def best_mean(self) -> float:
        return max(self.means)

    @property
    def optimal_set(self) -> tuple:
        """Indices of arms whose mean is within GAP_TOL of the maximum."""
        mu = self.means
        top = max(mu)
        return tuple(i for i, m in enumerate(mu) if top - m <= GAP_TOL)

    @property
    def gap(self) -> float:
        """|mu_1 - mu_2| for two-armed instances; best minus runner-up else."""
        mu = sorted(self.means, reverse=True)
        if len(mu) == 2:
            return mu[0] - mu[1]
        below = [m for m in mu if mu[0] - m > GAP_TOL]
        return mu[0] - below[0] if below else 0.0

    def to_json(self) -> dict:
        return instance_to_json(self)


class RngStream:
    """Counter-based random stream, a pure function of (master_seed, stream_id).

    Each replication owns one stream; distinct stream_ids give statistically
    independent sequences, and replaying the same pair reproduces the exact
    same draws on any machine, thread count, or backend.
    """

    __slots__ = ("master_seed", "stream_id", "_generator")

    def __init__(self, master_seed: int, stream_id: int):
        for name, v in (("master_seed", master_seed), ("stream_id", stream_id)):
            if not 0 <= int(v) < 2 ** 64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self._generator = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    @property
    def bit_generator(self):
        return self._generator.bit_generator

    def next_double(self) -> float:
        """One uniform draw on [0, 1); consumes exactly one 64-bit word."""
        return float(self._generator.random())

    def next_normal(self) -> float:
        return float(self._generator.standard_normal())

    def next_beta(self, a: float, b: float) -> float:
        return float(self._generator.beta(a, b))

    def uniform_index(self, m: int) -> int:
        """Uniform draw from {0, ..., m-1}; consumes one word."""
        i = int(self.next_double() * m)
        return m - 1 if i >= m else i

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def sample_reward(dist: RewardDistribution, rng: RngStream) -> float:
    """Draw one reward.

    Word consumption is fixed per distribution kind (0 for deterministic,
    1 otherwise); Gaussian draws go through the inverse CDF rather than a
    rejection sampler so that streams replay bit-identically.
    """
    if isinstance(dist, Deterministic):
        return dist.v
    if isinstance(dist, Bernoulli):
        return 1.0 if rng.next_double() < dist.q else 0.0
    if isinstance(dist, Gaussian):
        u = rng.next_double()
        if u <= 0.0:
            u = _U_FLOOR
        return dist.mu + dist.sigma * float(ndtri(u))
    raise TypeError(f"unknown reward distribution: {dist!r}")


def make_moderate_gap_instance(theta: float, n: int, base_mean: float) -> Instance:
    """Two Bernoulli arms with means base_mean and base_mean - sqrt(theta ln n / n).

    The gap is realized exactly as sqrt(theta ln n / n) (natural log).
    """
    if theta < 0.0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if not 0.0 < base_mean < 1.0:
        raise ValueError(f"base_mean must lie in (0,1), got {base_mean}")
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    gap = math.sqrt(theta * math.log(n) / n)
    low = base_mean - gap
    if low < 0.0:
        raise ValueError(
            f"gap {gap} pushes the second mean below 0 (base_mean={base_mean})"
        )
    regime = RegimePrediction(kind=RegimeKind.MODERATE, theta=theta)
    return Instance(arms=(Bernoulli(base_mean), Bernoulli(low)), horizon=n, regime=regime)


def make_diffusion_instance(
    mu: float,
    theta1: float,
    theta2: float,
    sigma1: float,
    sigma2: float,
    n: int,
) -> Instance:
    """Two Gaussian arms with means mu + theta_i / sqrt(n) and std devs sigma_i.

    The regime is small-gap with c = |theta1 - theta2|, so the gap is c/sqrt(n).
    """
    if theta1 < 0.0 or theta2 < 0.0:
        raise ValueError("theta1 and theta2 must be >= 0")
    if sigma1 < 0.0 or sigma2 < 0.0:
        raise ValueError("sigma must be >= 0")
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    root_n = math.sqrt(n)
    arms = (Gaussian(mu + theta1 / root_n, sigma1), Gaussian(mu + theta2 / root_n, sigma2))
    regime = RegimePrediction(kind=RegimeKind.SMALL, c=abs(theta1 - theta2))
    return Instance(arms=arms, horizon=n, regime=regime)


def _arm_from_json(doc: dict) -> RewardDistribution:
    kind = doc.get("kind")
    if kind == "bernoulli":
        return Bernoulli(float(doc["q"]))
    if kind == "deterministic":
        return Deterministic(float(doc["v"]))
    if kind == "gaussian":
        return Gaussian(float(doc["mean"]), float(doc["sigma"]))
    raise ValueError(f"unknown arm kind: {kind!r}")


def instance_to_json(instance: Instance) -> dict:
    return {
        "arms": [a.to_json() for a in instance.arms],
        "horizon": instance.horizon,
        "regime": instance.regime.to_json(),
    }


def instance_from_json(doc: dict) -> Instance:
    try:
        arms = tuple(_arm_from_json(a) for a in doc["arms"])
        rdoc = doc["regime"]
        regime = RegimePrediction(
            kind=RegimeKind(rdoc["kind"]),
            c=rdoc.get("c"),
            theta=rdoc.get("theta"),
            share=rdoc.get("share"),
        )
        return Instance(arms=arms, horizon=int(doc["horizon"]), regime=regime)
    except KeyError as exc:
        raise ValueError(f"instance document missing field {exc}") from exc
