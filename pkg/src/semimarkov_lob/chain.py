"""Markov chain over price jumps: state values, P, pi* and sojourn means.

States are 0-based and ordered by decreasing jump value, so with two
states 0 is "up" and 1 is "down".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateBinningError,
    InsufficientDataError,
    IrreducibilityError,
    MissingStateError,
    SingularMatrixError,
    UndefinedRowError,
)


def two_state_values(jumps) -> tuple[float, float]:
    """(mean of upward jumps, mean of downward jumps)."""
    j = np.asarray(jumps, dtype=float)
    up = j[j > 0]
    down = j[j < 0]
    if up.size == 0 or down.size == 0:
        raise MissingStateError("need both upward and downward jumps")
    return float(up.mean()), float(down.mean())


def two_state_sequence(jumps) -> np.ndarray:
    j = np.asarray(jumps, dtype=float)
    return np.where(j > 0, 0, 1).astype(np.int64)


@dataclass(frozen=True)
class BinningSpec:
    n_requested: int
    negative_quantiles: tuple[float, ...]
    positive_quantiles: tuple[float, ...]
    n_effective: int


def _sign_bins(values: np.ndarray, n_bins: int):
    """Quantile-bin one sign's values into at most ``n_bins`` non-empty bins.

    Boundaries sit at levels k/n_bins (k = 1..n_bins-1) with linear
    interpolation; a value below the first boundary goes to the first bin,
    a value in [q_i, q_{i+1}) to bin i+1. Equal boundaries are merged and
    empty bins dropped.
    """
    levels = np.arange(1, n_bins) / n_bins
    bounds = np.unique(np.quantile(values, levels)) if n_bins > 1 else np.empty(0)
    raw = np.searchsorted(bounds, values, side="right")
    used = np.unique(raw)
    relabel = np.full(bounds.size + 1, -1, dtype=np.int64)
    relabel[used] = np.arange(used.size)
    labels = relabel[raw]
    means = np.array([values[labels == k].mean() for k in range(used.size)])
    # boundaries that actually separate two non-empty bins
    kept = tuple(float(bounds[u - 1]) for u in used[1:])
    return labels, means, kept


def quantile_binning(jumps, n_requested: int):
    """Bin jumps into up to ``n_requested`` states by per-sign quantiles.

    Negative jumps get n//2 bins and positive jumps the rest. Returns
    ``(spec, states, a)`` with states ordered by decreasing ``a``.
    """
    if n_requested < 2:
        raise ValueError("n_requested must be at least 2")
    j = np.asarray(jumps, dtype=float)
    if np.any(j == 0):
        raise ValueError("jumps must be nonzero")
    neg_mask = j < 0
    if neg_mask.all() or not neg_mask.any():
        raise MissingStateError("need both upward and downward jumps")
    n_neg = n_requested // 2
    n_pos = n_requested - n_neg
    neg_labels, neg_means, neg_q = _sign_bins(j[neg_mask], n_neg)
    pos_labels, pos_means, pos_q = _sign_bins(j[~neg_mask], n_pos)
    n_eff = neg_means.size + pos_means.size
    if n_eff < 2:
        raise DegenerateBinningError("fewer than 2 states after merging equal quantiles")
    # bins within a sign are already ascending; flip to decreasing order
    a = np.r_[pos_means[::-1], neg_means[::-1]]
    states = np.empty(j.size, dtype=np.int64)
    states[~neg_mask] = pos_means.size - 1 - pos_labels
    states[neg_mask] = pos_means.size + neg_means.size - 1 - neg_labels
    spec = BinningSpec(n_requested, neg_q, pos_q, n_eff)
    return spec, states, a


def distinct_value_states(jumps):
    """One state per distinct jump value, ordered by decreasing value."""
    j = np.asarray(jumps, dtype=float)
    values, inverse = np.unique(j, return_inverse=True)
    if values.size < 2:
        raise DegenerateBinningError("fewer than 2 distinct jump values")
    k = values.size
    return (k - 1 - inverse).astype(np.int64), values[::-1].copy()


def transition_counts(states, n: int) -> np.ndarray:
    s = np.asarray(states, dtype=np.int64)
    if s.size and (s.min() < 0 or s.max() >= n):
        raise ValueError(f"states must lie in 0..{n - 1}")
    flat = np.bincount(s[:-1] * n + s[1:], minlength=n * n) if s.size > 1 else np.zeros(n * n, np.int64)
    return flat.reshape(n, n)


def estimate_transition_matrix(states, n: int) -> np.ndarray:
    counts = transition_counts(states, n)
    totals = counts.sum(axis=1)
    for i in range(n):
        if totals[i] == 0:
            raise UndefinedRowError(i)
    return counts / totals[:, None]


def is_irreducible(P, atol: float = 0.0) -> bool:
    adj = np.asarray(P) > atol
    n_comp, _ = connected_components(adj, directed=True, connection="strong")
    return n_comp == 1


def check_stochastic(P, tol: float = 1e-12) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("P must be square")
    if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1) > tol):
        raise ValueError("P must be row-stochastic")
    return P


def stationary_distribution(P, tol: float = 1e-10) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 with the last balance row swapped for normalization."""
    P = check_stochastic(P)
    n = P.shape[0]
    if not is_irreducible(P):
        raise IrreducibilityError("transition matrix is reducible (closed classes present)")
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"stationary system is singular: {exc}") from None
    resid = np.max(np.abs(pi @ P - pi))
    if resid > tol or np.any(pi <= 0):
        raise SingularMatrixError(f"stationary solve inaccurate (residual {resid:.3g})",
                                  condition=np.linalg.cond(A))
    return pi


def conditional_sojourn_means(states, sojourns, n: int | None = None) -> np.ndarray:
    """m(i) = mean of tau_k over k with X_{k-1} = i.

    ``sojourns`` is either tau_1..tau_N aligned with ``states`` (tau_1 is
    then dropped, having no predecessor state) or already tau_2..tau_N.
    """
    s = np.asarray(states, dtype=np.int64)
    tau = np.asarray(sojourns, dtype=float)
    if tau.size == s.size:
        tau = tau[1:]
    elif tau.size != s.size - 1:
        raise ValueError("sojourns must have len(states) or len(states) - 1 entries")
    n = int(s.max()) + 1 if n is None else n
    prev = s[:-1]
    counts = np.bincount(prev, minlength=n)
    sums = np.bincount(prev, weights=tau, minlength=n)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise InsufficientDataError(f"state {int(missing[0])} never precedes a sojourn; m undefined")
    return sums / counts


@dataclass(frozen=True)
class StateModel:
    a: np.ndarray
    P: np.ndarray
    pi_star: np.ndarray
    m: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def a_star(self) -> float:
        return float(self.pi_star @ self.a)

    @property
    def m_tau(self) -> float:
        if self.m is None:
            raise ValueError("model has no sojourn means")
        return float(self.pi_star @ self.m)

    @classmethod
    def from_P(cls, a, P, m=None) -> "StateModel":
        P = np.asarray(P, dtype=float)
        pi = stationary_distribution(P)
        return cls(np.asarray(a, dtype=float), P, pi, None if m is None else np.asarray(m, dtype=float))

    @classmethod
    def two_state(cls, p_cont, p_cont_prime, a1, a2, m=None) -> "StateModel":
        P = [[p_cont, 1 - p_cont], [1 - p_cont_prime, p_cont_prime]]
        return cls.from_P([a1, a2], P, m)

    def permuted(self, perm) -> "StateModel":
        """Relabel so that new state k is old state perm[k]."""
        perm = np.asarray(perm)
        m = None if self.m is None else self.m[perm]
        return StateModel(self.a[perm], self.P[np.ix_(perm, perm)], self.pi_star[perm], m)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "a": self.a.tolist(),
            "P": self.P.tolist(),
            "pi_star": self.pi_star.tolist(),
            "m": None if self.m is None else self.m.tolist(),
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, d) -> "StateModel":
        m = d.get("m")
        model = cls(np.asarray(d["a"], float), np.asarray(d["P"], float),
                    np.asarray(d["pi_star"], float), None if m is None else np.asarray(m, float))
        if model.P.shape != (model.n, model.n) or model.pi_star.shape != (model.n,):
            raise ValueError("inconsistent model dimensions")
        return model

    @classmethod
    def from_json(cls, path) -> "StateModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def build_state_model(jumps, sojourns, n_states: int = 2, binning: str = "quantile"):
    """Estimate a :class:`StateModel` from a jump/sojourn sequence.

    ``binning`` is "quantile" (per-sign quantile bins, reducing to the
    up/down split for two states) or "distinct" (one state per value).
    Returns ``(model, states, spec)``; ``spec`` is None for "distinct".
    """
    jumps = np.asarray(jumps, dtype=float)
    if jumps.size < 2:
        raise InsufficientDataError("need at least 2 price changes")
    spec = None
    if binning == "quantile":
        spec, states, a = quantile_binning(jumps, n_states)
    elif binning == "distinct":
        states, a = distinct_value_states(jumps)
    else:
        raise ValueError(f"unknown binning {binning!r}")
    n = len(a)
    P = estimate_transition_matrix(states, n)
    pi = stationary_distribution(P)
    m = conditional_sojourn_means(states, sojourns, n)
    return StateModel(a, P, pi, m), states, spec
