"""Semi-Markov mid-price model for limit order books.

Estimation from LOBSTER Level-1 data, diffusion-limit coefficients for the
two-state and n-state models, and a Markov renewal simulator to check them.
"""

__version__ = "0.1.0"

from .chain import StateModel, build_state_model, quantile_binning, stationary_distribution
from .diffusion import (
    DiffusionEstimate,
    estimate_diffusion,
    g_vector,
    sigma2_general,
    sigma2_one_tick,
    sigma2_two_state,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "DiffusionEstimate",
    "StateModel",
    "build_state_model",
    "estimate_diffusion",
    "g_vector",
    "quantile_binning",
    "sigma2_general",
    "sigma2_one_tick",
    "sigma2_two_state",
    "stationary_distribution",
]
