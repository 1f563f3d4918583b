"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

from bisect import bisect_right

import numpy as np


def _single_path(rows, x, u_row):
    last = len(rows) - 1
    states = [0] * len(u_row)
    for k, v in enumerate(u_row.tolist()):
        j = bisect_right(rows[x], v)
        x = j if j < last else last
        states[k] = x
    return states


def sample_chains(cum_p, x0, u):
    cum_p = np.ascontiguousarray(cum_p, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    n = cum_p.shape[0]
    n_paths, n_steps = u.shape
    out = np.empty((n_paths, n_steps), dtype=np.int64)
    if n_steps >= n_paths:
        # long paths: a scalar loop per path beats per-step numpy calls
        rows = [list(row) for row in cum_p]
        for r in range(n_paths):
            out[r] = _single_path(rows, int(x0[r]), u[r])
        return out
    x = np.asarray(x0, dtype=np.int64).copy()
    for k in range(n_steps):
        j = (u[:, k, None] >= cum_p[x]).sum(axis=1)
        np.minimum(j, n - 1, out=j)
        out[:, k] = j
        x = j
    return out


def race_up_counts(bid_size, ask_size, trials, seed, max_steps, chunk=200_000):
    rng = np.random.default_rng(seed)
    up = 0
    undecided = 0
    remaining = int(trials)
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        a = np.full(m, ask_size, dtype=np.int64)
        b = np.full(m, bid_size, dtype=np.int64)
        steps = 0
        while a.size:
            r = rng.integers(0, 4, a.size, dtype=np.int8)
            a += (r == 0).astype(np.int64) - (r == 1)
            b += (r == 2).astype(np.int64) - (r == 3)
            hit_a = a == 0
            done = hit_a | (b == 0)
            up += int(hit_a.sum())
            steps += 1
            if steps >= max_steps:
                undecided += int((~done).sum())
                break
            if done.any():
                keep = ~done
                a = a[keep]
                b = b[keep]
    return up, undecided
