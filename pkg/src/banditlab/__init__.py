"""banditlab: a simulation and verification lab for the limiting arm-sampling
behavior of multi-armed bandit policies.

The package couples exact small-horizon oracles and closed-form limit
predictions with a deterministic, parallel Monte Carlo engine, so every
distributional claim can be checked three ways: closed form, exact recursion,
and simulation.
"""

__version__ = "0.1.0"

from . import asymptotics, engine, exact_ts, model, policies, stats

__all__ = [
    "__version__",
    "asymptotics",
    "engine",
    "exact_ts",
    "model",
    "policies",
    "stats",
]
