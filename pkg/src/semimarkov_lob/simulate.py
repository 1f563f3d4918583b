"""Markov renewal simulator and Monte Carlo checks of the diffusion limits.

Seeding: path ``i`` of a run with master seed ``s`` draws from
``PCG64(SeedSequence(s, spawn_key=(i,)))``, so any path can be regenerated
on its own and paths can be farmed out to workers in any order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as sps

from .chain import StateModel
from .diffusion import sigma2_general
from .errors import ConfigurationError
from .ingest import SessionConfig
from .kernels import sample_chains


def path_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True)
class SojournLaw:
    kind: str  # "exp", "det" or "pareto"
    params: tuple[float, ...]

    def __post_init__(self):
        expected = {"exp": 1, "det": 1, "pareto": 2}
        if self.kind not in expected:
            raise ConfigurationError(f"unknown sojourn law {self.kind!r}")
        if len(self.params) != expected[self.kind] or any(p <= 0 for p in self.params):
            raise ConfigurationError(f"bad parameters for {self.kind}: {self.params}")

    @property
    def mean(self) -> float:
        if self.kind == "exp":
            return 1.0 / self.params[0]
        if self.kind == "det":
            return self.params[0]
        alpha, scale = self.params
        return math.inf if alpha <= 1 else alpha * scale / (alpha - 1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "exp":
            return rng.exponential(1.0 / self.params[0], size)
        if self.kind == "det":
            return np.full(size, self.params[0])
        alpha, scale = self.params
        return scale * (1.0 - rng.random(size)) ** (-1.0 / alpha)

    def __str__(self):
        return ":".join([self.kind, *(repr(p) for p in self.params)])


@dataclass(frozen=True)
class SojournSpec:
    """Sojourn law per state; a single law is shared by every state."""

    laws: tuple[SojournLaw, ...]

    @classmethod
    def parse(cls, text: str) -> "SojournSpec":
        """``exp:RATE``, ``det:VALUE`` or ``pareto:ALPHA:SCALE``; comma-separate per state."""
        laws = []
        for part in text.split(","):
            kind, *params = part.strip().split(":")
            try:
                laws.append(SojournLaw(kind, tuple(float(p) for p in params)))
            except ValueError:
                raise ConfigurationError(f"cannot parse sojourn law {part!r}") from None
        return cls(tuple(laws))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "SojournSpec":
        return cls((SojournLaw("exp", (rate,)),))

    def law(self, state: int) -> SojournLaw:
        return self.laws[0] if len(self.laws) == 1 else self.laws[state]

    def check(self, n_states: int) -> None:
        if len(self.laws) not in (1, n_states):
            raise ConfigurationError(f"{len(self.laws)} sojourn laws for {n_states} states")

    def means(self, n_states: int) -> np.ndarray:
        return np.array([self.law(i).mean for i in range(n_states)])

    @property
    def infinite_mean(self) -> bool:
        return any(math.isinf(law.mean) for law in self.laws)

    def sample(self, prev_states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if len(self.laws) == 1:
            return self.laws[0].sample(rng, prev_states.size)
        out = np.empty(prev_states.size)
        for i, law in enumerate(self.laws):
            sel = np.flatnonzero(prev_states == i)
            out[sel] = law.sample(rng, sel.size)
        return out

    def __str__(self):
        return ",".join(str(law) for law in self.laws)


@dataclass
class SimulatedPath:
    times: np.ndarray  # T_k
    prices: np.ndarray  # s_k
    states: np.ndarray  # X_k, k = 1..n
    sojourns: np.ndarray  # tau_k, drawn from the law of X_{k-1}
    x0: int
    jumps: np.ndarray  # a(X_k), exact rather than differenced from prices


def _chain_chunk(model, rng, x_start, n, backend):
    u = rng.random(n)
    return sample_chains(model.P, [x_start], u[None, :], backend=backend)[0]


def simulate_path(model: StateModel, sojourns: SojournSpec, n_jumps: int, seed: int = 0,
                  index: int = 0, backend=None) -> SimulatedPath:
    """X_0 ~ pi*, X_k by P, tau_k from the law of X_{k-1}, s_k = sum a(X_j)."""
    sojourns.check(model.n)
    rng = path_rng(seed, index)
    x0 = int(rng.choice(model.n, p=model.pi_star))
    states = _chain_chunk(model, rng, x0, n_jumps, backend)
    prev = np.r_[x0, states[:-1]]
    tau = sojourns.sample(prev, rng)
    jumps = np.asarray(model.a, dtype=float)[states]
    return SimulatedPath(np.cumsum(tau), np.cumsum(jumps), states, tau, x0, jumps)


def _centered_at_horizon(model, sojourns, horizon, expected_jumps, rng, backend):
    """(sum of a(X_k) - a* over jumps with T_k <= horizon, N(horizon), sum of their tau)."""
    b = np.asarray(model.a, dtype=float) - model.a_star
    x = int(rng.choice(model.n, p=model.pi_star))
    chunk = max(int(expected_jumps * 1.05) + 1000, 1000)
    t0 = 0.0
    total = 0.0
    count = 0
    tau_sum = 0.0
    while True:
        states = _chain_chunk(model, rng, x, chunk, backend)
        prev = np.r_[x, states[:-1]]
        tau = sojourns.sample(prev, rng)
        times = t0 + np.cumsum(tau)
        k = int(np.searchsorted(times, horizon, side="right"))
        total += float(np.sum(b[states[:k]]))
        tau_sum += float(np.sum(tau[:k]))
        count += k
        if k < chunk:
            return total, count, tau_sum
        t0 = times[-1]
        x = int(states[-1])
        chunk = max(chunk // 4, 1000)


@dataclass
class SimulationReport:
    n_paths: int
    n_jumps: int
    t: float
    scaling: str
    sigma2: float
    time_scale: float
    predicted_coeff: float
    empirical_coeff: float
    relative_error: float
    ks_statistic: float
    mean_jump_count: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def clt_check(model: StateModel, sojourns: SojournSpec, n_paths: int = 200,
              n_jumps: int = 100_000, t: float = 1.0, seed: int = 0,
              scaling: str | None = None, backend=None) -> SimulationReport:
    """Compare the spread of (s_H - N_H a*)/sqrt(n) across paths with the limit.

    ``n_jumps`` plays the role of the scaling index n. Unbalanced scaling
    uses H = t n and predicts sigma* sqrt(t)/sqrt(m_tau); balanced scaling
    (infinite-mean sojourns) uses H = t n ln n and predicts
    sigma* sqrt(t)/sqrt(tau*) with tau* estimated from the simulated
    sojourns. The KS statistic compares the z-scored terminal values with
    a standard normal.
    """
    sojourns.check(model.n)
    infinite = sojourns.infinite_mean
    if scaling is None:
        scaling = "balanced" if infinite else "unbalanced"
    if scaling not in ("balanced", "unbalanced"):
        raise ConfigurationError(f"unknown scaling {scaling!r}")
    if scaling == "unbalanced" and infinite:
        raise ConfigurationError("unbalanced scaling needs finite-mean sojourns")
    if scaling == "balanced" and not infinite:
        raise ConfigurationError("balanced scaling needs infinite-mean (pareto alpha <= 1) sojourns")
    n = int(n_jumps)
    sigma2 = max(sigma2_general(model), 0.0)
    if scaling == "unbalanced":
        m_tau = float(model.pi_star @ sojourns.means(model.n))
        horizon = t * n
        expected = horizon / m_tau
    else:
        horizon = t * n * math.log(n)
        expected = n * t
    values = np.empty(n_paths)
    counts = np.empty(n_paths)
    tau_stars = np.empty(n_paths)
    for i in range(n_paths):
        rng = path_rng(seed, i)
        total, count, tau_sum = _centered_at_horizon(model, sojourns, horizon, expected, rng, backend)
        values[i] = total / math.sqrt(n)
        counts[i] = count
        tau_stars[i] = tau_sum / (count * math.log(count)) if count > 1 else math.nan
    time_scale = m_tau if scaling == "unbalanced" else float(np.nanmean(tau_stars))
    predicted = math.sqrt(sigma2 / time_scale)
    empirical = float(np.std(values, ddof=1)) / math.sqrt(t)
    if predicted > 0:
        rel = abs(empirical - predicted) / predicted
    else:
        rel = empirical
    sd = np.std(values, ddof=1)
    ks = float(sps.kstest((values - values.mean()) / sd, "norm").statistic) if sd > 0 else math.nan
    return SimulationReport(n_paths, n, t, scaling, sigma2, time_scale, predicted, empirical,
                            rel, ks, float(counts.mean()), seed)


def long_run_variance(model: StateModel, n_jumps: int = 1_000_000, n_paths: int = 1,
                      batch: int = 1000, seed: int = 0, backend=None) -> tuple[float, float]:
    """Batch-means estimate of Var[sum_k (a(X_k) - a*)] / n and its standard error.

    Each path starts from pi*; batches of ``batch`` consecutive jumps are
    centered at the exact a*.
    """
    b = np.asarray(model.a, dtype=float) - model.a_star
    n_batches = n_jumps // batch
    sums = []
    for i in range(n_paths):
        rng = path_rng(seed, i)
        x0 = int(rng.choice(model.n, p=model.pi_star))
        states = _chain_chunk(model, rng, x0, n_batches * batch, backend)
        sums.append(b[states].reshape(n_batches, batch).sum(axis=1))
    sq = np.concatenate(sums) ** 2 / batch
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(sq.size))


def write_synthetic_lobster(message_path, orderbook_path, path: SimulatedPath,
                            cfg: SessionConfig | None = None, start_price: float = 100.0,
                            depth: int = 500, seed: int = 0) -> int:
    """Render a simulated path as a LOBSTER Level-1 file pair.

    Jumps must be multiples of half a tick. Each jump is written as a limit
    submission that sets the new quotes; a cancel that leaves the mid
    unchanged is interleaved between jumps. Only jumps inside the trimmed
    session window are written. Returns the number of jumps written.
    """
    cfg = cfg or SessionConfig()
    units = cfg.price_units_per_tick
    half = np.round(2.0 * path.jumps / cfg.tick_size)
    if np.any(np.abs(half - 2.0 * path.jumps / cfg.tick_size) > 1e-6):
        raise ConfigurationError("jumps must be multiples of half a tick")
    lo, hi = cfg.window
    rng = np.random.default_rng(seed)
    mid2 = int(round(2 * start_price / cfg.tick_size))

    def quote(m2):
        if m2 % 2:
            bid = (m2 - 1) // 2
            return bid, bid + 1
        return m2 // 2 - 1, m2 // 2 + 1

    bid, ask = quote(mid2)
    msg_lines = []
    book_lines = []
    oid = 1
    prev_t = lo

    def emit(t, code, size, price, direction, bdepth, adepth):
        msg_lines.append(f"{t!r},{code},{oid},{size},{price * units},{direction}\n")
        book_lines.append(f"{ask * units},{adepth},{bid * units},{bdepth}\n")

    emit(lo, 1, 100, bid, 1, depth, depth)
    oid += 1
    written = 0
    for T, h in zip(path.times, half.astype(np.int64)):
        t = lo + float(T)
        if t > hi:
            break
        mid_t = 0.5 * (prev_t + t)
        if mid_t > prev_t:
            emit(mid_t, 2, 50, ask, -1, depth, depth - 50)
            oid += 1
        mid2 += int(h)
        bid, ask = quote(mid2)
        ad = int(rng.integers(1, 10)) * 100
        bd = int(rng.integers(1, 10)) * 100
        emit(t, 1, bd, bid, 1, bd, ad)
        oid += 1
        prev_t = t
        written += 1
    with open(message_path, "w") as fh:
        fh.writelines(msg_lines)
    with open(orderbook_path, "w") as fh:
        fh.writelines(book_lines)
    return written
