"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``SEMIMARKOV_LOB_PURE=1``
to force the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SEMIMARKOV_LOB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "cython"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def cumulative_rows(P):
    cum = np.cumsum(np.asarray(P, dtype=np.float64), axis=1)
    cum[:, -1] = 1.0
    return np.ascontiguousarray(cum)


def sample_chains(P, x0, u, backend=None):
    """Advance chains with transition matrix ``P`` using uniforms ``u`` (R x N).

    ``x0`` holds the state each chain starts from; the returned array holds
    the N states visited after it.
    """
    impl = get_backend(backend)
    u = np.ascontiguousarray(np.atleast_2d(u), dtype=np.float64)
    x0 = np.ascontiguousarray(np.atleast_1d(x0), dtype=np.int64)
    return impl.sample_chains(cumulative_rows(P), x0, u)


def race_up_counts(bid_size, ask_size, trials, seed, max_steps=100_000, backend=None):
    impl = get_backend(backend)
    return impl.race_up_counts(int(bid_size), int(ask_size), int(trials),
                               int(seed), int(max_steps))
