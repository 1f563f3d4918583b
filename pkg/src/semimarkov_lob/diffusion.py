"""Diffusion-limit coefficients of the semi-Markov mid-price model."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .chain import StateModel, stationary_distribution
from .errors import DomainError, InsufficientDataError, SingularMatrixError

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class DiffusionEstimate:
    a_star: float
    sigma2: float
    tau_star: float
    m_tau: float
    coeff_balanced: float
    coeff_unbalanced: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_pair(p_cont, p_cont_prime):
    for p in (p_cont, p_cont_prime):
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"probability {p} outside [0, 1]")
    if p_cont + p_cont_prime - 2 == 0:
        raise SingularMatrixError("p_cont + p_cont' = 2: both states absorbing")


def two_state_pi(p_cont, p_cont_prime) -> tuple[float, float]:
    _check_pair(p_cont, p_cont_prime)
    pi1 = (1 - p_cont_prime) / (2 - p_cont - p_cont_prime)
    return pi1, 1 - pi1


def sigma2_two_state(p_cont, p_cont_prime, a1, a2, pi_star=None) -> float:
    """Closed-form sigma*^2 for two states (up value a1, down value a2)."""
    _check_pair(p_cont, p_cont_prime)
    if pi_star is None:
        pi_star = two_state_pi(p_cont, p_cont_prime)
    pi1, pi2 = pi_star
    p, q = p_cont, p_cont_prime
    s = p + q - 2
    a_star = pi1 * a1 + pi2 * a2
    return (
        pi1 * a1**2 + pi2 * a2**2
        + a_star * (-2 * a1 * pi1 - 2 * a2 * pi2 + a_star * (pi1 + pi2))
        + (pi1 * (1 - p) + pi2 * (1 - q)) * (a1 - a2) ** 2 / s**2
        + 2 * (a2 - a1) * (
            (pi2 * a2 * (1 - q) - pi1 * a1 * (1 - p)) / s
            + a_star * (pi1 - p * pi1 - pi2 + q * pi2) / s
        )
    )


def sigma2_one_tick(delta, p_cont, p_cont_prime, pi_star1=None) -> float:
    """sigma*^2 when the jumps are exactly +delta and -delta."""
    _check_pair(p_cont, p_cont_prime)
    if pi_star1 is None:
        pi_star1 = two_state_pi(p_cont, p_cont_prime)[0]
    p, q, pi = p_cont, p_cont_prime, pi_star1
    return 4 * delta**2 * ((1 - q + pi * (q - p)) / (p + q - 2) ** 2 - pi * (1 - pi))


def g_vector(P, pi_star, b) -> np.ndarray:
    """Solve (P + Pi* - I) g = b, Pi* having every row equal to pi*."""
    P = np.asarray(P, dtype=float)
    pi = np.asarray(pi_star, dtype=float)
    b = np.asarray(b, dtype=float)
    n = P.shape[0]
    A = P + np.tile(pi, (n, 1)) - np.eye(n)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(f"P + Pi* - I is ill-conditioned (cond={cond:.3g})", condition=cond)
    g = np.linalg.solve(A, b)
    bmax = np.max(np.abs(b)) if b.size else 0.0
    resid = np.max(np.abs(A @ g - b)) if b.size else 0.0
    if resid > 1e-10 * bmax:
        g = g + np.linalg.solve(A, b - A @ g)
    return g


def g_vector_two_state(p_cont, p_cont_prime, a1, a2, pi_star=None) -> np.ndarray:
    """Explicit 2x2 inverse for g, written out in closed form."""
    if pi_star is None:
        pi_star = two_state_pi(p_cont, p_cont_prime)
    pi1, pi2 = pi_star
    p, q = p_cont, p_cont_prime
    a_star = pi1 * a1 + pi2 * a2
    tot = pi1 + pi2
    s = p + q - 2
    g1 = (a1 * (q + pi2 - 1) + a2 * (p - pi2 - 1)) / (tot * s) - a_star / tot
    g2 = (a1 * (q - pi1 - 1) + a2 * (p + pi1 - 1)) / (tot * s) - a_star / tot
    return np.array([g1, g2])


def variance_terms(model: StateModel) -> np.ndarray:
    """Per-state v(i); sigma*^2 is their pi*-weighted sum."""
    a = np.asarray(model.a, dtype=float)
    P = np.asarray(model.P, dtype=float)
    b = a - model.pi_star @ a
    g = g_vector(P, model.pi_star, b)
    dg = g[None, :] - g[:, None]  # dg[i, j] = g(j) - g(i)
    return b**2 + (dg**2 * P).sum(axis=1) - 2 * b * (dg * P).sum(axis=1)


def sigma2_general(model: StateModel) -> float:
    return float(model.pi_star @ variance_terms(model))


def limit_time_scales(sojourns, pi_star=None, m=None) -> tuple[float, float | None]:
    """(tau*, m_tau): tau* = sum(tau_k) / (n ln n), m_tau = pi* . m."""
    tau = np.asarray(sojourns, dtype=float)
    n = tau.size
    if n < 2:
        raise InsufficientDataError("need at least 2 price changes for tau*")
    tau_star = float(tau.sum() / (n * math.log(n)))
    m_tau = None
    if pi_star is not None and m is not None:
        m_tau = float(np.dot(pi_star, m))
    return tau_star, m_tau


def diffusion_coefficients(sigma2, tau_star, m_tau) -> tuple[float, float]:
    if sigma2 < 0:
        raise DomainError(f"negative sigma^2 ({sigma2})")
    if tau_star <= 0 or m_tau <= 0:
        raise DomainError("time scales must be positive")
    sigma = math.sqrt(sigma2)
    return sigma / math.sqrt(tau_star), sigma / math.sqrt(m_tau)


def estimate_diffusion(model: StateModel, sojourns) -> DiffusionEstimate:
    sigma2 = max(sigma2_general(model), 0.0)
    tau_star, m_tau = limit_time_scales(sojourns, model.pi_star, model.m)
    if m_tau is None:
        raise ValueError("model needs sojourn means m(i)")
    cb, cu = diffusion_coefficients(sigma2, tau_star, m_tau)
    return DiffusionEstimate(model.a_star, sigma2, tau_star, m_tau, cb, cu)


def from_summary(p_cont, p_cont_prime, a1, a2, tau_star, m_tau) -> DiffusionEstimate:
    """Two-state estimate from already-aggregated inputs (one table row)."""
    pi = stationary_distribution([[p_cont, 1 - p_cont], [1 - p_cont_prime, p_cont_prime]])
    sigma2 = sigma2_two_state(p_cont, p_cont_prime, a1, a2, pi)
    cb, cu = diffusion_coefficients(sigma2, tau_star, m_tau)
    return DiffusionEstimate(float(pi @ [a1, a2]), sigma2, tau_star, m_tau, cb, cu)
