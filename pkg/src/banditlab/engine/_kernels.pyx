# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled replication kernel.

Mirrors banditlab.engine._pure.simulate instruction-for-instruction: same
formulas, same evaluation order, same random-word consumption, drawing from
the same numpy C distribution functions. For a given bit generator state the
two kernels return bit-identical results (pinned by the test suite). Any edit
here must be mirrored in _pure.py.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, log, sqrt

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_beta,
    random_standard_normal,
    random_standard_uniform,
)
from scipy.special.cython_special cimport ndtri

import numpy as np

cdef double _U_FLOOR = 2.0 ** -53
cdef enum:
    MAX_ARMS = 64

KIND_BERNOULLI = 0
KIND_DETERMINISTIC = 1
KIND_GAUSSIAN = 2

POLICY_UCB = 0
POLICY_TS_BETA = 1
POLICY_TS_GAUSSIAN = 2


def simulate(int policy, double rho, kinds, p1, p2, long n, snaps, object bit_generator):
    """Run one replication of n pulls; see _pure.simulate for the contract."""
    kinds_arr = np.ascontiguousarray(kinds, dtype=np.int64)
    p1_arr = np.ascontiguousarray(p1, dtype=np.float64)
    p2_arr = np.ascontiguousarray(p2, dtype=np.float64)
    snaps_arr = np.ascontiguousarray(snaps, dtype=np.int64)
    cdef long k = len(kinds_arr)
    cdef long g = len(snaps_arr)
    if k > MAX_ARMS:
        raise ValueError(f"compiled kernel supports at most {MAX_ARMS} arms, got {k}")

    counts_out = np.zeros(k, dtype=np.int64)
    sums_out = np.zeros(k, dtype=np.float64)
    snap_counts = np.zeros((g, k), dtype=np.int64)
    snap_sums = np.zeros((g, k), dtype=np.float64)

    cdef long[::1] kv = kinds_arr
    cdef double[::1] p1v = p1_arr
    cdef double[::1] p2v = p2_arr
    cdef long[::1] sv = snaps_arr
    cdef long[::1] cov = counts_out
    cdef double[::1] sov = sums_out
    cdef long[:, ::1] scv = snap_counts
    cdef double[:, ::1] ssv = snap_sums

    capsule = bit_generator.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    if bg == NULL:
        raise ValueError("invalid bit generator capsule")

    cdef int status
    with nogil:
        status = _run(policy, rho, kv, p1v, p2v, n, k, sv, g, cov, sov, scv, ssv, bg)
    if status == 1:
        raise ValueError(
            "Beta-prior posterior sampling needs rewards in {0,1}; "
            "a non-binary reward was drawn"
        )
    return counts_out, sums_out, snap_counts, snap_sums


cdef int _run(int policy, double rho,
              long[::1] kinds, double[::1] p1, double[::1] p2,
              long n, long k, long[::1] snaps, long g,
              long[::1] counts_out, double[::1] sums_out,
              long[:, ::1] snap_counts, double[:, ::1] snap_sums,
              bitgen_t *bg) nogil:
    cdef long counts[MAX_ARMS]
    cdef double sums[MAX_ARMS]
    cdef long succ[MAX_ARMS]
    cdef long fail[MAX_ARMS]
    cdef long ties[MAX_ARMS]
    cdef long i, t, j, arm, nties, kd, pick
    cdef double log_t, nc, xbar, d, best, r, u, z, mu, sd

    for i in range(k):
        counts[i] = 0
        sums[i] = 0.0
        succ[i] = 0
        fail[i] = 0

    j = 0
    while j < g and snaps[j] == 0:
        j += 1  # zero-step snapshots are the already-zeroed rows

    for t in range(n):
        # ---- select an arm
        if policy == 0:  # UCB
            if t < k:
                arm = t  # initialization: play arms in order
            else:
                log_t = log(<double> t)
                best = -INFINITY
                nties = 0
                for i in range(k):
                    nc = <double> counts[i]
                    xbar = sums[i] / nc
                    d = xbar + sqrt(rho * log_t / nc)
                    if d > best:
                        best = d
                        ties[0] = i
                        nties = 1
                    elif d == best:
                        ties[nties] = i
                        nties += 1
                arm = _pick(ties, nties, bg)
        elif policy == 1:  # Beta-prior sampling
            best = -INFINITY
            nties = 0
            for i in range(k):
                d = random_beta(bg, succ[i] + 1.0, fail[i] + 1.0)
                if d > best:
                    best = d
                    ties[0] = i
                    nties = 1
                elif d == best:
                    ties[nties] = i
                    nties += 1
            arm = _pick(ties, nties, bg)
        else:  # Gaussian-prior sampling
            best = -INFINITY
            nties = 0
            for i in range(k):
                z = random_standard_normal(bg)
                nc = (<double> counts[i]) + 1.0
                mu = sums[i] / nc
                sd = 1.0 / sqrt(nc)
                d = mu + sd * z
                if d > best:
                    best = d
                    ties[0] = i
                    nties = 1
                elif d == best:
                    ties[nties] = i
                    nties += 1
            arm = _pick(ties, nties, bg)

        # ---- draw the reward (fixed word consumption per kind)
        kd = kinds[arm]
        if kd == 0:  # Bernoulli
            r = 1.0 if random_standard_uniform(bg) < p1[arm] else 0.0
        elif kd == 1:  # deterministic
            r = p1[arm]
        else:  # Gaussian via inverse CDF
            u = random_standard_uniform(bg)
            if u <= 0.0:
                u = _U_FLOOR
            r = p1[arm] + p2[arm] * ndtri(u)

        # ---- update
        counts[arm] += 1
        sums[arm] += r
        if policy == 1:
            if r == 1.0:
                succ[arm] += 1
            elif r == 0.0:
                fail[arm] += 1
            else:
                return 1  # binary-reward contract violated
        while j < g and snaps[j] == t + 1:
            for i in range(k):
                snap_counts[j, i] = counts[i]
                snap_sums[j, i] = sums[i]
            j += 1

    for i in range(k):
        counts_out[i] = counts[i]
        sums_out[i] = sums[i]
    return 0


cdef inline long _pick(long *ties, long nties, bitgen_t *bg) nogil:
    # One extra word consumed only on an actual tie.
    cdef long i
    if nties == 1:
        return ties[0]
    i = <long> (random_standard_uniform(bg) * nties)
    if i >= nties:
        i = nties - 1
    return ties[i]
