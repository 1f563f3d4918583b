# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics must match ``_kernels_py``."""

import numpy as np

from libc.stdint cimport uint64_t, int64_t


def sample_chains(const double[:, ::1] cum_p, const int64_t[::1] x0,
                  const double[:, ::1] u):
    """Walk R chains: next state is the first j with u < cum_p[x, j]."""
    cdef Py_ssize_t n = cum_p.shape[0]
    cdef Py_ssize_t n_paths = u.shape[0]
    cdef Py_ssize_t n_steps = u.shape[1]
    out = np.empty((n_paths, n_steps), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t r, k, j, lo, hi, mid
    cdef int64_t x
    cdef double v
    for r in range(n_paths):
        x = x0[r]
        for k in range(n_steps):
            v = u[r, k]
            if n <= 8:
                j = 0
                while j < n - 1 and v >= cum_p[x, j]:
                    j += 1
            else:
                lo = 0
                hi = n - 1
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if v >= cum_p[x, mid]:
                        lo = mid + 1
                    else:
                        hi = mid
                j = lo
            o[r, k] = j
            x = j
    return out


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix(uint64_t* state) nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _xoshiro(uint64_t* s) nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def race_up_counts(long bid_size, long ask_size, long trials,
                   unsigned long long seed, long max_steps):
    """Race two symmetric queues; count trials where the ask empties first.

    Each step moves one queue chosen uniformly by +/-1 with equal odds,
    which is the jump chain of two independent equal-rate continuous-time
    walks. Returns (up, undecided).
    """
    cdef uint64_t sm = seed
    cdef uint64_t s[4]
    cdef int i
    for i in range(4):
        s[i] = _splitmix(&sm)
    cdef long t, steps, a, b
    cdef long up = 0, undecided = 0
    cdef uint64_t bits = 0
    cdef int left = 0
    cdef unsigned int r
    with nogil:
        for t in range(trials):
            a = ask_size
            b = bid_size
            steps = 0
            while True:
                if left == 0:
                    bits = _xoshiro(s)
                    left = 32
                r = bits & 3
                bits >>= 2
                left -= 1
                if r == 0:
                    a += 1
                elif r == 1:
                    a -= 1
                    if a == 0:
                        up += 1
                        break
                elif r == 2:
                    b += 1
                else:
                    b -= 1
                    if b == 0:
                        break
                steps += 1
                if steps >= max_steps:
                    undecided += 1
                    break
    return up, undecided
