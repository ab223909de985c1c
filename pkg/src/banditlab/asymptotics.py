"""Closed-form limit quantities for UCB arm-sampling behavior.

For a moderate gap parametrized by theta and an exploration coefficient
rho > 1, the limiting share of pulls on the better arm, lambda_star, is the
unique root in [1/2, 1) of

    1/sqrt(1 - lam) - 1/sqrt(lam) = sqrt(theta / rho),

with closed form  1/2 + sqrt(1/4 - 1/(1 + sqrt(1 + theta/rho))^2).  The
associated normalized-regret constant is h(theta) = sqrt(theta) * (1 - lambda_star),
whose unique interior maximizer over theta gives the minimax constant for a
given rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import RegimeKind, RegimePrediction

__all__ = [
    "LimitQuery",
    "MinimaxPoint",
    "lambda_star",
    "lambda_star_grid",
    "h_function",
    "h_grid",
    "verify_limit_equation",
    "theta_star",
    "predicted_share",
]

RESIDUAL_TOL = 1e-10

# Search ceiling for the minimax scan; h decays toward 0 well before this.
_THETA_MAX_FACTOR = 100.0
_GRID_STEP = 0.01
_REFINE_TOL = 1e-6
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LimitQuery:
    """A (theta, rho) pair with the validity constraints theta >= 0, rho > 1."""

    theta: float
    rho: float

    def __post_init__(self):
        if self.theta < 0.0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")
        if self.rho <= 1.0:
            raise ValueError(f"rho must be > 1, got {self.rho}")


@dataclass(frozen=True)
class MinimaxPoint:
    theta_star: float
    h_star: float


def lambda_star(q: LimitQuery) -> float:
    """Limiting share of pulls on the better arm; lies in [1/2, 1)."""
    r = 1.0 + math.sqrt(1.0 + q.theta / q.rho)
    return 0.5 + math.sqrt(0.25 - 1.0 / (r * r))


def lambda_star_grid(thetas: np.ndarray, rho: float) -> np.ndarray:
    """Vectorized lambda_star over a theta grid (single rho)."""
    if rho <= 1.0:
        raise ValueError(f"rho must be > 1, got {rho}")
    thetas = np.asarray(thetas, dtype=np.float64)
    if np.any(thetas < 0.0):
        raise ValueError("thetas must be >= 0")
    r = 1.0 + np.sqrt(1.0 + thetas / rho)
    return 0.5 + np.sqrt(0.25 - 1.0 / (r * r))


def h_function(q: LimitQuery) -> float:
    """Normalized-regret constant sqrt(theta) * (1 - lambda_star)."""
    return math.sqrt(q.theta) * (1.0 - lambda_star(q))


def h_grid(thetas: np.ndarray, rho: float) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=np.float64)
    return np.sqrt(thetas) * (1.0 - lambda_star_grid(thetas, rho))


def verify_limit_equation(lam: float, q: LimitQuery) -> float:
    """Signed residual 1/sqrt(1-lam) - 1/sqrt(lam) - sqrt(theta/rho).

    Rejects the singular endpoints lam in {0, 1}.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie strictly inside (0,1), got {lam}")
    return 1.0 / math.sqrt(1.0 - lam) - 1.0 / math.sqrt(lam) - math.sqrt(q.theta / q.rho)


def theta_star(rho: float) -> MinimaxPoint:
    """Maximize h over theta by a 0.01-step grid scan plus golden-section refine.

    The scan must find an interior, unimodal maximum; a boundary maximum or a
    multimodal profile raises instead of returning a silent wrong answer.
    """
    if rho <= 1.0:
        raise ValueError(f"rho must be > 1, got {rho}")
    theta_max = _THETA_MAX_FACTOR * rho
    grid = np.arange(0.0, theta_max + _GRID_STEP / 2, _GRID_STEP)
    values = h_grid(grid, rho)
    i = int(np.argmax(values))
    if i == 0 or i == len(grid) - 1:
        raise RuntimeError(
            f"h maximizer sits on the scan boundary (theta={grid[i]}); "
            f"the search window [0, {theta_max}] is unusable"
        )
    diffs = np.diff(values)
    signs = np.sign(diffs[diffs != 0.0])
    if int(np.sum(signs[:-1] != signs[1:])) != 1:
        raise RuntimeError("h is not unimodal on the scan grid")

    def h_of(theta: float) -> float:
        return h_function(LimitQuery(theta, rho))

    a, b = float(grid[i - 1]), float(grid[i + 1])
    while b - a > _REFINE_TOL:
        c = b - (b - a) * _INV_PHI
        d = a + (b - a) * _INV_PHI
        if h_of(c) < h_of(d):
            a = c
        else:
            b = d
    ts = 0.5 * (a + b)
    hs = h_of(ts)
    if h_of(theta_max) >= hs:
        raise RuntimeError("h at the scan ceiling is not below the located maximum")
    return MinimaxPoint(theta_star=ts, h_star=hs)


def predicted_share(
    regime: RegimePrediction,
    rho: float | None = None,
    n_arms: int | None = None,
    n_optimal: int | None = None,
) -> float:
    """Predicted limiting share of pulls on one optimal arm for a regime.

    Large gap -> 1; small/zero gap (two arms) -> 1/2; moderate gap ->
    lambda_star(theta, rho) (rho required, > 1); K-armed regimes -> 1/n_optimal.
    """
    kind = regime.kind
    if kind is RegimeKind.LARGE:
        return 1.0
    if kind in (RegimeKind.SMALL, RegimeKind.ZERO):
        return 0.5
    if kind is RegimeKind.MODERATE:
        if rho is None or rho <= 1.0:
            raise ValueError("moderate-gap prediction requires rho > 1")
        return lambda_star(LimitQuery(regime.theta, rho))
    if kind is RegimeKind.K_IDENTICAL:
        if n_arms is None:
            raise ValueError("k_identical prediction requires n_arms")
        return 1.0 / n_arms
    if kind is RegimeKind.K_SEPARATED:
        if n_optimal is None:
            raise ValueError("k_separated prediction requires n_optimal")
        return 1.0 / n_optimal
    raise ValueError(f"unknown regime kind: {kind!r}")
