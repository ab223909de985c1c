"""Exact (non-Monte-Carlo) analysis of Beta-prior posterior sampling when every
reward is a deterministic 0 or a deterministic 1.

Under all-zero or all-one rewards the pull counts (n1, n2) determine the
posterior parameters exactly, so the one-step probability of playing arm 1 is
a closed-form rational and the full law of N1(n) follows from a forward DP
over the count lattice. The DP is carried in exact rational arithmetic up to
n = 64 and in double precision beyond (budget n <= 10^4).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence, Union

import numpy as np

__all__ = [
    "CountState",
    "CountDistribution",
    "win_prob_all_failures",
    "win_prob_all_successes",
    "exact_count_distribution",
    "brute_force_count_distribution",
    "exact_variance_bound_check",
    "EXACT_MAX_N",
    "DP_MAX_N",
]

EXACT_MAX_N = 64
DP_MAX_N = 10_000
_BRUTE_FORCE_MAX_N = 20


@dataclass(frozen=True)
class CountState:
    """Pulls of each arm so far; under deterministic rewards this pins the
    posterior parameters of both arms."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def elapsed(self) -> int:
        return self.n1 + self.n2


def win_prob_all_failures(k: int, l: int) -> Fraction:
    """P(arm 1's posterior draw beats arm 2's) when arm 1 has k failures and
    arm 2 has l failures, no successes anywhere: exactly (l+1)/(k+l+2).

    The posteriors are Beta(1, k+1) and Beta(1, l+1); the deficit arm is the
    one pulled more, so repeated failures push play toward balance.
    """
    if k < 0 or l < 0:
        raise ValueError("failure counts must be nonnegative")
    return Fraction(l + 1, k + l + 2)


def win_prob_all_successes(k: int, l: int) -> Fraction:
    """P(arm 1's posterior draw beats arm 2's) when arm 1 has k successes and
    arm 2 has l successes, no failures anywhere: exactly (k+1)/(k+l+2).

    The posteriors are Beta(k+1, 1) and Beta(l+1, 1); successes are
    self-reinforcing, so the lead arm tends to keep the lead.
    """
    if k < 0 or l < 0:
        raise ValueError("success counts must be nonnegative")
    return Fraction(k + 1, k + l + 2)


MassVector = Union[Sequence[Fraction], np.ndarray]


@dataclass(frozen=True)
class CountDistribution:
    """Law of N1(n): mass[m] = P(N1(n) = m), m = 0..n."""

    n: int
    mass: MassVector
    exact: bool

    def __post_init__(self):
        if len(self.mass) != self.n + 1:
            raise ValueError(f"mass must have length n+1={self.n + 1}, got {len(self.mass)}")
        if self.exact:
            if any(p < 0 for p in self.mass):
                raise ValueError("negative probability mass")
            total = sum(self.mass, Fraction(0))
            if total != 1:
                raise ValueError(f"mass sums to {total}, not 1")
        else:
            arr = np.asarray(self.mass, dtype=np.float64)
            if np.any(arr < -1e-15):
                raise ValueError("negative probability mass")
            if abs(float(arr.sum()) - 1.0) > 1e-12:
                raise ValueError(f"mass sums to {float(arr.sum())}, not 1")

    def as_floats(self) -> np.ndarray:
        return np.array([float(p) for p in self.mass], dtype=np.float64)

    def mean_share(self) -> Union[Fraction, float]:
        """E[N1(n) / n]."""
        if self.exact:
            return sum(Fraction(m, self.n) * p for m, p in enumerate(self.mass))
        m = np.arange(self.n + 1, dtype=np.float64) / self.n
        return float(np.dot(m, np.asarray(self.mass)))

    def variance_share(self) -> Union[Fraction, float]:
        """Var(N1(n) / n)."""
        if self.exact:
            mean = self.mean_share()
            return sum((Fraction(m, self.n) - mean) ** 2 * p for m, p in enumerate(self.mass))
        shares = np.arange(self.n + 1, dtype=np.float64) / self.n
        mass = np.asarray(self.mass)
        mean = float(np.dot(shares, mass))
        return float(np.dot((shares - mean) ** 2, mass))


def _play_one_probability(n1: int, n2: int, q: int) -> Fraction:
    # q = 0: all failures so far; q = 1: all successes so far.
    if q == 0:
        return win_prob_all_failures(n1, n2)
    return win_prob_all_successes(n1, n2)


def _validate_dp_args(n: int, q: int) -> None:
    if q not in (0, 1):
        raise ValueError(f"q must be 0 or 1, got {q!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > DP_MAX_N:
        raise ValueError(f"n={n} exceeds the DP budget of {DP_MAX_N}")


def exact_count_distribution(n: int, q: int) -> CountDistribution:
    """Forward DP for the law of N1(n) under deterministic reward q on both arms.

    Transition from (n1, n2): play arm 1 with probability (n2+1)/(n1+n2+2)
    for q = 0 and (n1+1)/(n1+n2+2) for q = 1. Rational arithmetic for
    n <= 64, double precision for larger n.
    """
    _validate_dp_args(n, q)
    if n <= EXACT_MAX_N:
        mass = [Fraction(1)]
        for m in range(n):
            nxt = [Fraction(0)] * (m + 2)
            for n1, p in enumerate(mass):
                if p == 0:
                    continue
                p1 = _play_one_probability(n1, m - n1, q)
                nxt[n1 + 1] += p * p1
                nxt[n1] += p * (1 - p1)
            mass = nxt
        return CountDistribution(n=n, mass=tuple(mass), exact=True)

    mass = np.zeros(1, dtype=np.float64)
    mass[0] = 1.0
    for m in range(n):
        n1 = np.arange(m + 1, dtype=np.float64)
        if q == 0:
            p1 = (m - n1 + 1.0) / (m + 2.0)
        else:
            p1 = (n1 + 1.0) / (m + 2.0)
        nxt = np.zeros(m + 2, dtype=np.float64)
        nxt[1:] += mass * p1
        nxt[:-1] += mass * (1.0 - p1)
        mass = nxt
    return CountDistribution(n=n, mass=mass, exact=False)


def brute_force_count_distribution(n: int, q: int) -> CountDistribution:
    """Path-sum oracle: enumerate all 2^n arm sequences and add up exact path
    probabilities. Only feasible for small n; kept as an independent check on
    the DP recursion."""
    _validate_dp_args(n, q)
    if n > _BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {_BRUTE_FORCE_MAX_N}")
    mass = [Fraction(0)] * (n + 1)
    for path in product((0, 1), repeat=n):
        prob = Fraction(1)
        n1 = n2 = 0
        for arm in path:
            p1 = _play_one_probability(n1, n2, q)
            if arm == 0:
                prob *= p1
                n1 += 1
            else:
                prob *= 1 - p1
                n2 += 1
        mass[n1] += prob
    return CountDistribution(n=n, mass=tuple(mass), exact=True)


def exact_variance_bound_check(n: int) -> tuple:
    """Check Var(N1(n)/n) <= 1/(4n) for the all-failures chain.

    Returns (variance, bound, ok) with the comparison done exactly whenever
    the DP ran in rational arithmetic.
    """
    dist = exact_count_distribution(n, q=0)
    variance = dist.variance_share()
    if dist.exact:
        bound = Fraction(1, 4 * n)
        ok = variance <= bound
        return float(variance), float(bound), bool(ok)
    bound_f = 1.0 / (4.0 * n)
    return float(variance), bound_f, bool(variance <= bound_f)
