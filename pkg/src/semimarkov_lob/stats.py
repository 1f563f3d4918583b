"""Realized volatility, OLS with adjusted R^2, and joint queue densities."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .contlarrad import depth_bucket
from .errors import DataError, InsufficientDataError
from .events import PriceChangeSeq
from .ingest import MidQuote


def window_samples(times, mids, window: float = 600.0, start: float | None = None) -> np.ndarray:
    """Mid at each window boundary start + k*window, last observation carried forward."""
    t = np.asarray(times, dtype=float)
    m = np.asarray(mids, dtype=float)
    if t.size == 0:
        raise InsufficientDataError("empty mid series")
    start = t[0] if start is None else start
    n_bounds = int(math.floor((t[-1] - start) / window)) + 1
    bounds = start + window * np.arange(max(n_bounds, 0))
    idx = np.searchsorted(t, bounds, side="right") - 1
    if np.any(idx < 0):
        raise DataError("window start precedes the first observation")
    return m[idx]


def realized_std(times, mids, window: float = 600.0, start: float | None = None) -> float:
    """Sample std of mid changes over consecutive non-overlapping windows."""
    samples = window_samples(times, mids, window, start)
    if samples.size < 3:
        raise InsufficientDataError("series spans fewer than 2 full windows")
    return float(np.std(np.diff(samples), ddof=1))


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r2: float
    adj_r2: float
    n_points: int
    p_value: float
    fit_intercept: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def linear_fit_adjr2(x, y, fit_intercept: bool = True) -> RegressionResult:
    """OLS of y on x with R^2, adjusted R^2 and the slope's two-sided t-test.

    Without an intercept R^2 is uncentered and the residual degrees of
    freedom are n - 1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n != y.size:
        raise ValueError("x and y differ in length")
    if n < 3:
        raise InsufficientDataError("need at least 3 points")
    if fit_intercept:
        xm, ym = x.mean(), y.mean()
        sxx = np.sum((x - xm) ** 2)
        if sxx == 0:
            raise DataError("x has zero variance; fit is singular")
        slope = np.sum((x - xm) * (y - ym)) / sxx
        intercept = ym - slope * xm
        resid = y - intercept - slope * x
        tss = np.sum((y - ym) ** 2)
        dof = n - 2
        se = math.sqrt(np.sum(resid**2) / dof / sxx) if dof > 0 else float("nan")
    else:
        sxx = np.sum(x**2)
        if sxx == 0:
            raise DataError("x is identically zero; fit is singular")
        slope = np.sum(x * y) / sxx
        intercept = 0.0
        resid = y - slope * x
        tss = np.sum(y**2)
        dof = n - 1
        se = math.sqrt(np.sum(resid**2) / dof / sxx)
    rss = float(np.sum(resid**2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    if fit_intercept:
        adj = 1.0 - (1.0 - r2) * (n - 1) / (n - 2)
    else:
        adj = 1.0 - (1.0 - r2) * n / (n - 1)
    if se == 0:
        p_value = 0.0
    else:
        p_value = float(2 * sps.t.sf(abs(slope / se), dof))
    return RegressionResult(float(slope), float(intercept), float(r2), float(adj), n, p_value, fit_intercept)


@dataclass
class JointDensity:
    density: np.ndarray  # [bid bucket, ask bucket]
    n_observations: int

    def marginal_bid(self) -> np.ndarray:
        return self.density.sum(axis=1)

    def marginal_ask(self) -> np.ndarray:
        return self.density.sum(axis=0)


def post_change_observations(quotes: Sequence[MidQuote], price_changes: PriceChangeSeq,
                             direction: str = "up") -> np.ndarray:
    """(bid_depth, ask_depth) just after each change in ``direction`` at a one-tick spread."""
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    times = np.array([q.time for q in quotes], dtype=float)
    rows = []
    for t, a in zip(price_changes.change_times, price_changes.jumps):
        if (a > 0) != (direction == "up"):
            continue
        k = np.searchsorted(times, t, side="right") - 1
        if k < 0:
            continue
        q = quotes[k]
        if q.spread != 1:
            continue
        rows.append((q.bid_depth, q.ask_depth))
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2)


def density_from_depths(depths, lot: int = 1, cap: int = 50) -> JointDensity:
    d = np.asarray(depths, dtype=np.int64).reshape(-1, 2)
    if d.shape[0] == 0:
        raise InsufficientDataError("no qualifying observations for the joint density")
    bi = depth_bucket(d[:, 0], lot, cap)
    ai = depth_bucket(d[:, 1], lot, cap)
    counts = np.zeros((cap + 1, cap + 1), dtype=np.float64)
    np.add.at(counts, (bi, ai), 1.0)
    return JointDensity(counts / d.shape[0], d.shape[0])


def joint_queue_density(quotes: Sequence[MidQuote], price_changes: PriceChangeSeq,
                        direction: str = "up", lot: int = 1, cap: int = 50) -> JointDensity:
    """Normalized histogram of post-change queue sizes (f after ups, f~ after downs)."""
    return density_from_depths(post_change_observations(quotes, price_changes, direction), lot, cap)
