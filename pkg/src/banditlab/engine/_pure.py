"""Pure-Python replication kernel.

This is the fallback when the compiled extension is unavailable, and the
readable reference for what the compiled kernel does. Both kernels draw from
the same underlying C generator functions in the same order, so for a given
bit generator state they produce bit-identical results; the test suite pins
that equivalence. Any edit here must be mirrored in _kernels.pyx.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

_U_FLOOR = 2.0 ** -53

# Arm encodings shared with the compiled kernel.
KIND_BERNOULLI = 0
KIND_DETERMINISTIC = 1
KIND_GAUSSIAN = 2

POLICY_UCB = 0
POLICY_TS_BETA = 1
POLICY_TS_GAUSSIAN = 2


def simulate(policy, rho, kinds, p1, p2, n, snaps, bit_generator):
    """Run one replication of n pulls.

    Parameters
    ----------
    policy : int
        POLICY_UCB, POLICY_TS_BETA, or POLICY_TS_GAUSSIAN.
    rho : float
        UCB exploration coefficient (ignored by the sampling policies).
    kinds, p1, p2 : arrays of length K
        Arm encodings: (KIND_BERNOULLI, q, -), (KIND_DETERMINISTIC, v, -),
        (KIND_GAUSSIAN, mean, sigma).
    n : int
        Horizon.
    snaps : int64 array, sorted nondecreasing, values in [0, n]
        Pull counts at which to snapshot (counts, reward sums); a value of 0
        snapshots the empty state.
    bit_generator : numpy BitGenerator
        Owned by this replication; consumed sequentially.

    Returns
    -------
    (counts[K] int64, reward_sums[K] float64,
     snap_counts[G, K] int64, snap_sums[G, K] float64)
    """
    gen = np.random.Generator(bit_generator)
    rand = gen.random
    kinds = np.asarray(kinds, dtype=np.int64)
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    snaps = np.asarray(snaps, dtype=np.int64)
    k = len(kinds)
    g = len(snaps)

    counts = [0] * k
    sums = [0.0] * k
    succ = [0] * k
    fail = [0] * k
    snap_counts = np.zeros((g, k), dtype=np.int64)
    snap_sums = np.zeros((g, k), dtype=np.float64)

    j = 0
    while j < g and snaps[j] == 0:
        j += 1  # zero-step snapshots are the already-zeroed rows

    for t in range(n):
        # ---- select an arm
        if policy == POLICY_UCB:
            if t < k:
                arm = t  # initialization: play arms in order
            else:
                log_t = math.log(t)
                best = -math.inf
                ties = []
                for i in range(k):
                    nc = float(counts[i])
                    xbar = sums[i] / nc
                    d = xbar + math.sqrt(rho * log_t / nc)
                    if d > best:
                        best = d
                        ties = [i]
                    elif d == best:
                        ties.append(i)
                arm = _pick(ties, rand)
        elif policy == POLICY_TS_BETA:
            best = -math.inf
            ties = []
            for i in range(k):
                d = float(gen.beta(succ[i] + 1.0, fail[i] + 1.0))
                if d > best:
                    best = d
                    ties = [i]
                elif d == best:
                    ties.append(i)
            arm = _pick(ties, rand)
        else:
            best = -math.inf
            ties = []
            for i in range(k):
                z = float(gen.standard_normal())
                nc = float(counts[i]) + 1.0
                mu = sums[i] / nc
                sd = 1.0 / math.sqrt(nc)
                d = mu + sd * z
                if d > best:
                    best = d
                    ties = [i]
                elif d == best:
                    ties.append(i)
            arm = _pick(ties, rand)

        # ---- draw the reward (fixed word consumption per kind)
        kd = kinds[arm]
        if kd == KIND_BERNOULLI:
            r = 1.0 if float(rand()) < p1[arm] else 0.0
        elif kd == KIND_DETERMINISTIC:
            r = float(p1[arm])
        else:
            u = float(rand())
            if u <= 0.0:
                u = _U_FLOOR
            r = float(p1[arm] + p2[arm] * ndtri(u))

        # ---- update
        counts[arm] += 1
        sums[arm] += r
        if policy == POLICY_TS_BETA:
            if r == 1.0:
                succ[arm] += 1
            elif r == 0.0:
                fail[arm] += 1
            else:
                raise ValueError(
                    "Beta-prior posterior sampling needs rewards in {0,1}; "
                    f"got {r} from arm {arm}"
                )
        while j < g and snaps[j] == t + 1:
            snap_counts[j, :] = counts
            snap_sums[j, :] = sums
            j += 1

    return (
        np.array(counts, dtype=np.int64),
        np.array(sums, dtype=np.float64),
        snap_counts,
        snap_sums,
    )


def _pick(ties, rand):
    # One extra word consumed only on an actual tie.
    m = len(ties)
    if m == 1:
        return ties[0]
    i = int(float(rand()) * m)
    if i >= m:
        i = m - 1
    return ties[i]
