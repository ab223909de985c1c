"""Statistical verdicts over empirical samples: KS and chi-square tests
against reference laws, a two-sample KS for exchange-symmetry checks, the
two-sample Hoeffding tail bound, and normality reports for diffusion claims.

Verdicts are emitted as TestReport records carrying the raw statistic and the
threshold, never just a boolean, so tolerances can be revisited after the fact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2

__all__ = [
    "ReferenceLaw",
    "UniformUnit",
    "NormalLaw",
    "DiracAt",
    "DiscreteLaw",
    "TestReport",
    "ks_statistic",
    "ks_critical_value",
    "ks_two_sample",
    "ks_two_sample_critical",
    "chi_square_uniform",
    "hoeffding_two_sample_bound",
    "normality_report",
]

CHI_SQUARE_LEVEL = 0.01  # upper-tail quantile used for the uniform bin test


class ReferenceLaw:
    """A distribution we test samples against; subclasses implement cdf()."""

    def cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformUnit(ReferenceLaw):
    """Uniform distribution on [0, 1]."""

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


@dataclass(frozen=True)
class NormalLaw(ReferenceLaw):
    mean: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def cdf(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.sigma
        return ndtr(z)


@dataclass(frozen=True)
class DiracAt(ReferenceLaw):
    v: float

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) >= self.v).astype(np.float64)


@dataclass(frozen=True)
class DiscreteLaw(ReferenceLaw):
    """Point masses `mass[i]` at `values[i]`; values strictly increasing."""

    values: tuple
    mass: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        p = np.asarray(self.mass, dtype=np.float64)
        if len(v) != len(p) or len(v) == 0:
            raise ValueError("values and mass must be equal-length and non-empty")
        if np.any(np.diff(v) <= 0):
            raise ValueError("values must be strictly increasing")
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError("mass must be nonnegative and sum to 1")

    def cdf(self, x: np.ndarray) -> np.ndarray:
        v = np.asarray(self.values, dtype=np.float64)
        cum = np.concatenate([[0.0], np.cumsum(np.asarray(self.mass, dtype=np.float64))])
        idx = np.searchsorted(v, np.asarray(x, dtype=np.float64), side="right")
        return cum[idx]


@dataclass(frozen=True)
class TestReport:
    """Pass/fail verdict; passed is derived, always statistic <= threshold."""

    test: str
    statistic: float
    threshold: float
    sample_count: int
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.statistic <= self.threshold))

    def to_json(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "pass": self.passed,
            "sample_count": self.sample_count,
        }


def _as_sorted_samples(samples) -> np.ndarray:
    # Accepts an EmpiricalDistribution (has .samples, already sorted) or any
    # array-like of reals.
    if hasattr(samples, "samples"):
        return np.asarray(samples.samples, dtype=np.float64)
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    return arr


def ks_statistic(samples, law: ReferenceLaw) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the empirical CDF and a
    reference law, evaluated at the sample points."""
    x = _as_sorted_samples(samples)
    m = len(x)
    if m == 0:
        raise ValueError("need at least one sample")
    f = np.asarray(law.cdf(x), dtype=np.float64)
    k = np.arange(1, m + 1, dtype=np.float64)
    d_plus = float(np.max(k / m - f))
    d_minus = float(np.max(f - (k - 1.0) / m))
    return max(d_plus, d_minus)


def ks_critical_value(alpha: float, m: int) -> float:
    """Asymptotic one-sample KS critical value sqrt(-ln(alpha/2)/2) / sqrt(m)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if m < 1:
        raise ValueError("need m >= 1")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(m)


def ks_two_sample(a, b) -> float:
    """Two-sample KS statistic: sup |ECDF_a - ECDF_b|."""
    xa = _as_sorted_samples(a)
    xb = _as_sorted_samples(b)
    if len(xa) == 0 or len(xb) == 0:
        raise ValueError("need at least one sample on each side")
    pooled = np.concatenate([xa, xb])
    ca = np.searchsorted(xa, pooled, side="right") / len(xa)
    cb = np.searchsorted(xb, pooled, side="right") / len(xb)
    return float(np.max(np.abs(ca - cb)))


def ks_two_sample_critical(alpha: float, m1: int, m2: int) -> float:
    """Asymptotic two-sample KS critical value."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if m1 < 1 or m2 < 1:
        raise ValueError("need m1, m2 >= 1")
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    return c * math.sqrt((m1 + m2) / (m1 * m2))


def chi_square_uniform(samples, bins: int) -> TestReport:
    """Pearson test of samples in [0, 1] against equal-width uniform bins.

    The threshold is the upper 1% quantile of chi-square with bins-1 degrees
    of freedom.
    """
    if bins < 2:
        raise ValueError(f"need bins >= 2, got {bins}")
    x = _as_sorted_samples(samples)
    m = len(x)
    if m == 0:
        raise ValueError("need at least one sample")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("samples must lie in [0,1]")
    counts, _ = np.histogram(x, bins=bins, range=(0.0, 1.0))
    expected = m / bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    threshold = float(chi2.ppf(1.0 - CHI_SQUARE_LEVEL, bins - 1))
    return TestReport("chi_square_uniform", stat, threshold, m)


def hoeffding_two_sample_bound(alpha: float, m1: int, m2: int) -> float:
    """Tail bound exp(-2 alpha^2 m1 m2 / (m1 + m2)) on the probability that
    the difference of two bounded-sample means exceeds its expectation by
    alpha or more."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if m1 < 1 or m2 < 1:
        raise ValueError("need m1, m2 >= 1")
    return math.exp(-2.0 * alpha * alpha * m1 * m2 / (m1 + m2))


def normality_report(samples, mean: float, sigma: float, threshold: float) -> TestReport:
    """KS distance of samples to Normal(mean, sigma), judged against a
    caller-supplied threshold."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    x = _as_sorted_samples(samples)
    stat = ks_statistic(x, NormalLaw(mean, sigma))
    return TestReport("ks_normal", stat, threshold, len(x))
