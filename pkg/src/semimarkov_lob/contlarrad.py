"""Price-increase probability from queue sizes and the sqrt(lambda/D(f)) proxy."""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AccuracyError, DomainError
from .events import PriceChangeSeq
from .ingest import MidQuote

# Gauss-Kronrod 7/15 nodes on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.r_[-_XGK[:-1], _XGK[::-1]]
_KW = np.r_[_WGK[:-1], _WGK[::-1]]
# Gauss nodes are the odd-indexed Kronrod nodes
_GW = np.zeros(15)
_GW[1::2] = np.r_[_WG[:-1], _WG[::-1]]


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    x = lo + half * (_NODES + 1.0)
    y = f(x)
    k = half * (_KW @ y)
    g = half * (_GW @ y)
    return k, abs(k - g)


def adaptive_gk(f, lo, hi, atol=1e-12, max_intervals=2000):
    """Globally adaptive Gauss-Kronrod 7/15 on [lo, hi]; ``f`` is vectorized."""
    val, err = _gk15(f, lo, hi)
    heap = [(-err, lo, hi, val)]
    total, total_err = val, err
    while total_err > atol:
        if len(heap) >= max_intervals:
            raise AccuracyError(f"quadrature did not converge (error estimate {total_err:.2e})")
        e, a, b, v = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        total += v1 + v2 - v
        total_err += e1 + e2 + e
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
    # resum to shed accumulated rounding from the running total
    return math.fsum(item[3] for item in heap), total_err


def up_integrand(t, n, p):
    """Integrand of the up-probability integral; its t -> 0 limit is 2n."""
    t = np.asarray(t, dtype=float)
    c = 2.0 * np.sin(0.5 * t) ** 2  # 1 - cos t without cancellation
    base = 1.0 + c - np.sqrt(c * (2.0 + c))
    small = t < 1e-8
    ts = np.where(small, 1.0, t)
    ratio = np.sin(n * ts) * np.cos(0.5 * ts) / np.sin(0.5 * ts)
    ratio = np.where(small, 2.0 * n, ratio)
    return base**p * ratio


def prob_up_integral(n: int, p: int, atol: float = 1e-9) -> float:
    """Probability the ask queue (size p) empties before the bid queue (size n)."""
    if int(n) != n or int(p) != p or n < 1 or p < 1:
        raise DomainError("queue sizes must be integers >= 1")
    val, _ = adaptive_gk(lambda t: up_integrand(t, n, p), 0.0, math.pi, atol=atol * math.pi)
    return val / math.pi


def prob_up_fixed(n: int, p: int, nodes: int = 256) -> float:
    """Same integral on a fixed composite Gauss-Legendre grid (refinement checks)."""
    x, w = np.polynomial.legendre.leggauss(16)
    panels = max(nodes // 16, 1)
    edges = np.linspace(0.0, math.pi, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        total += half * (w @ up_integrand(a + half * (x + 1.0), n, p))
    return total / math.pi


@dataclass
class UpProbGrid:
    max_n: int
    max_p: int
    values: np.ndarray  # values[n-1, p-1]
    empirical_up: np.ndarray | None = None
    empirical_total: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "p", "model_prob", "emp_up", "emp_total"])
            for i in range(self.max_n):
                for j in range(self.max_p):
                    up = tot = ""
                    if self.empirical_total is not None and i + 1 < self.empirical_total.shape[0] \
                            and j + 1 < self.empirical_total.shape[1]:
                        up = int(self.empirical_up[i + 1, j + 1])
                        tot = int(self.empirical_total[i + 1, j + 1])
                    w.writerow([i + 1, j + 1, repr(float(self.values[i, j])), up, tot])


def up_prob_grid(max_n: int, max_p: int) -> UpProbGrid:
    vals = np.empty((max_n, max_p))
    for n in range(1, max_n + 1):
        for p in range(1, max_p + 1):
            vals[n - 1, p - 1] = prob_up_integral(n, p)
    return UpProbGrid(max_n, max_p, vals)


def depth_bucket(depth, lot: int = 100, cap: int = 20):
    """ceil(depth / lot), capped; bucket ``cap`` collects the overflow."""
    d = np.asarray(depth, dtype=np.int64)
    return np.minimum(-(-d // lot), cap)


@dataclass
class EmpiricalUpFrequency:
    up: np.ndarray  # indexed [bid bucket, ask bucket]
    total: np.ndarray

    @property
    def frequency(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.total > 0, self.up / np.maximum(self.total, 1), np.nan)


def empirical_up_frequency(quotes: Sequence[MidQuote], price_changes: PriceChangeSeq,
                           lot: int = 100, cap: int = 20) -> EmpiricalUpFrequency:
    """Fraction of next mid moves that are up, by (bid, ask) depth bucket.

    Uses one-tick-spread quotes only; the next move is the first price
    change strictly after the quote's timestamp. Cells never observed keep
    total 0 and show as NaN in ``frequency``.
    """
    up = np.zeros((cap + 1, cap + 1), dtype=np.int64)
    total = np.zeros_like(up)
    T = np.asarray(price_changes.change_times)
    jumps = np.asarray(price_changes.jumps)
    for q in quotes:
        if q.spread != 1:
            continue
        k = np.searchsorted(T, q.time, side="right")
        if k >= T.size:
            continue
        i = int(depth_bucket(q.bid_depth, lot, cap))
        j = int(depth_bucket(q.ask_depth, lot, cap))
        total[i, j] += 1
        up[i, j] += jumps[k] > 0
    return EmpiricalUpFrequency(up, total)


def trend_statistic(freq: EmpiricalUpFrequency) -> tuple[float, float]:
    """Count-weighted correlation of up-frequency with bid and with ask bucket.

    A surface that rises with bid depth and falls with ask depth gives a
    positive first and negative second value.
    """
    i, j = np.nonzero(freq.total)
    w = freq.total[i, j].astype(float)
    f = freq.up[i, j] / w

    def wcorr(x):
        x = x.astype(float)
        mx = np.average(x, weights=w)
        mf = np.average(f, weights=w)
        cov = np.average((x - mx) * (f - mf), weights=w)
        sx = math.sqrt(np.average((x - mx) ** 2, weights=w))
        sf = math.sqrt(np.average((f - mf) ** 2, weights=w))
        return cov / (sx * sf) if sx > 0 and sf > 0 else float("nan")

    return wcorr(i), wcorr(j)


def post_change_depths(quotes: Sequence[MidQuote], price_changes: PriceChangeSeq) -> np.ndarray:
    """(bid_depth, ask_depth) of the last quote at each price-change time."""
    times = np.array([q.time for q in quotes], dtype=float)
    out = []
    for t in price_changes.change_times:
        k = np.searchsorted(times, t, side="right") - 1
        if k >= 0:
            out.append((quotes[k].bid_depth, quotes[k].ask_depth))
    return np.asarray(out, dtype=float).reshape(-1, 2)


def cl_volatility_proxy(lambda_hat: float, depths) -> float:
    """sqrt(lambda / D(f)) with D(f) the squared mean post-change depth.

    ``depths`` is the average depth itself or an array of observed depths
    (both queues pooled).
    """
    if lambda_hat < 0:
        raise DomainError("lambda must be non-negative")
    avg = float(np.mean(depths))
    if avg <= 0:
        raise DomainError("average depth must be positive")
    return math.sqrt(lambda_hat / avg**2)


def race_prob_up_mc(n: int, p: int, trials: int = 1_000_000, seed: int = 0,
                    max_steps: int = 100_000, backend=None) -> tuple[float, float]:
    """Monte Carlo race of two symmetric queues started at n (bid) and p (ask).

    Returns (probability the ask empties first, fraction undecided). Trials
    still running after ``max_steps`` moves count as one half.
    """
    from .kernels import race_up_counts

    up, undecided = race_up_counts(n, p, trials, seed, max_steps, backend=backend)
    return (up + 0.5 * undecided) / trials, undecided / trials
