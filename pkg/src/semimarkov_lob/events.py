"""Primitive sequences derived from quotes and book events.

Covers mid-price jumps with sojourn times, the +/-1 queue-event chains and
their balance classification, spread statistics, order-flow intensities and
inter-arrival fits.
"""

from __future__ import annotations

import csv
import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, DomainError, InsufficientDataError
from .ingest import BookEvent, EventKind, MidQuote, MidSeries, Side


@dataclass
class PriceChangeSeq:
    jumps: np.ndarray
    sojourns: np.ndarray
    change_times: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        if not (len(self.jumps) == len(self.sojourns) == len(self.change_times)):
            raise ValueError("jumps, sojourns and change_times must have equal length")

    def __len__(self):
        return len(self.jumps)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["T_k", "tau_k", "a_k"])
            for t, tau, a in zip(self.change_times, self.sojourns, self.jumps):
                w.writerow([repr(float(t)), repr(float(tau)), repr(float(a))])


def _as_time_mid(mids, tick_size):
    """(times, values, scale); jumps are diff(values) * scale."""
    if isinstance(mids, MidSeries):
        # difference the integer half-tick series, scale afterwards
        scale = 0.5 if tick_size is None else tick_size / 2.0
        return mids.times.astype(float), mids.half_ticks.astype(float), scale
    arr = np.asarray(mids, dtype=float)
    if arr.size == 0:
        return np.empty(0), np.empty(0), 1.0
    return arr[:, 0], arr[:, 1], 1.0


def extract_price_changes(mids, tick_size: float | None = None) -> PriceChangeSeq:
    """Turn a mid series into jumps a_k and sojourns tau_k = T_k - T_{k-1}.

    ``mids`` is a :class:`MidSeries` (jumps come out in ticks, or in price
    units when ``tick_size`` is given) or a sequence of ``(time, mid)``
    pairs (jumps in the units of ``mid``). Updates sharing a timestamp are
    merged into one net change; zero changes are skipped. The first
    sojourn runs from the first observation.
    """
    times, values, scale = _as_time_mid(mids, tick_size)
    if times.size == 0:
        raise InsufficientDataError("empty mid series")
    # last value per timestamp
    last = np.r_[times[1:] != times[:-1], True]
    times = times[last]
    values = values[last]
    diffs = np.diff(values)
    moved = np.flatnonzero(diffs != 0) + 1
    if moved.size == 0:
        raise InsufficientDataError("fewer than two distinct mid prices")
    change_times = times[moved]
    prev = np.r_[times[0], change_times[:-1]]
    return PriceChangeSeq(
        jumps=diffs[moved - 1] * scale,
        sojourns=change_times - prev,
        change_times=change_times,
        start_time=float(times[0]),
    )


class Balance(str, enum.Enum):
    BALANCED = "balanced"
    UNBALANCED = "unbalanced"


@dataclass
class QueueEventChain:
    side: Side
    values: np.ndarray
    p11: float
    p_minus1_minus1: float

    @property
    def asymmetry(self) -> float:
        return self.p11 - self.p_minus1_minus1


def _at_best(event: BookEvent, before: MidQuote | None, after: MidQuote | None) -> bool:
    for q in (before, after):
        if q is None:
            continue
        best = q.best_bid if event.side is Side.BID else q.best_ask
        if best is not None and best == event.price:
            return True
    return False


def queue_event_values(events: Sequence[BookEvent], side: Side,
                       quotes: Sequence[MidQuote] | None = None) -> np.ndarray:
    """+1/-1 sequence for one side; level-1 only when aligned quotes are given.

    An event counts as level 1 when its price equals the side's best price
    either just before or just after it.
    """
    if quotes is not None and len(quotes) != len(events):
        raise DataError("events and quotes must be aligned 1:1")
    out = []
    for i, e in enumerate(events):
        if e.side is not side or e.sign == 0:
            continue
        if quotes is not None:
            before = quotes[i - 1] if i > 0 else None
            if not _at_best(e, before, quotes[i]):
                continue
        out.append(e.sign)
    return np.asarray(out, dtype=np.int8)


def chain_from_values(values, side: Side = Side.BID) -> QueueEventChain:
    v = np.asarray(values, dtype=np.int8)
    if v.size < 2:
        raise InsufficientDataError(f"need at least 2 queue events on the {side.name.lower()} side")
    src, dst = v[:-1], v[1:]
    n_up = int(np.sum(src == 1))
    n_down = int(np.sum(src == -1))
    if n_up == 0 or n_down == 0:
        raise InsufficientDataError(
            f"no transitions observed out of {'+1' if n_up == 0 else '-1'} "
            f"on the {side.name.lower()} side")
    p11 = np.sum((src == 1) & (dst == 1)) / n_up
    pmm = np.sum((src == -1) & (dst == -1)) / n_down
    return QueueEventChain(side, v, float(p11), float(pmm))


def queue_event_chain(events: Sequence[BookEvent], side: Side,
                      quotes: Sequence[MidQuote] | None = None) -> QueueEventChain:
    return chain_from_values(queue_event_values(events, side, quotes), side)


def classify_balance(chain_a: QueueEventChain, chain_b: QueueEventChain,
                     eps: float = 0.05) -> Balance:
    if all(abs(c.asymmetry) <= eps for c in (chain_a, chain_b)):
        return Balance.BALANCED
    return Balance.UNBALANCED


@dataclass
class SpreadStats:
    fraction_at_k_ticks: dict[int, float]
    avg_spread: float
    lifetimes_ms: dict[str, np.ndarray] = field(default_factory=dict)
    n_observations: int = 0

    def fraction_at_least(self, k: int) -> float:
        return sum(f for s, f in self.fraction_at_k_ticks.items() if s >= k)

    def short_lived_fraction(self, regime: str = "wider", threshold_ms: float = 5.0) -> float:
        lt = self.lifetimes_ms.get(regime)
        if lt is None or lt.size == 0:
            return float("nan")
        return float(np.mean(lt < threshold_ms))


def _regime(spread: int) -> str:
    if spread == 1:
        return "one_tick"
    if spread > 1:
        return "wider"
    return "locked"


def spread_statistics(quotes: Sequence[MidQuote]) -> SpreadStats:
    """Per-observation spread fractions and regime lifetimes in milliseconds.

    A lifetime is the span of a maximal run of quotes in one regime
    (one tick, wider, locked), ending at the first quote of the next regime
    or at the last quote.
    """
    two = [q for q in quotes if q.two_sided]
    if not two:
        return SpreadStats({}, float("nan"), {}, 0)
    spreads = np.array([q.spread for q in two], dtype=np.int64)
    times = np.array([q.time for q in two], dtype=float)
    counts = Counter(spreads.tolist())
    n = len(spreads)
    fractions = {int(k): v / n for k, v in sorted(counts.items())}
    lifetimes: dict[str, list[float]] = {"one_tick": [], "wider": [], "locked": []}
    start = 0
    for i in range(1, n + 1):
        if i == n or _regime(spreads[i]) != _regime(spreads[start]):
            end_t = times[i] if i < n else times[-1]
            lifetimes[_regime(spreads[start])].append(1000.0 * (end_t - times[start]))
            start = i
    return SpreadStats(
        fraction_at_k_ticks=fractions,
        avg_spread=float(spreads.mean()),
        lifetimes_ms={k: np.asarray(v) for k, v in lifetimes.items()},
        n_observations=n,
    )


@dataclass
class IntensityEstimate:
    lambda_hat: float
    mu_plus_theta_hat: float
    one_tick_time: float


_REMOVALS = (EventKind.CANCEL, EventKind.DELETE, EventKind.EXECUTE_VISIBLE, EventKind.EXECUTE_HIDDEN)


def estimate_intensities(events: Sequence[BookEvent], quotes: Sequence[MidQuote],
                         one_tick_only: bool = True) -> IntensityEstimate:
    """Share intensities at the best quotes while the spread is one tick.

    Quote i holds from its time to the next quote's time. Event i is
    attributed to the book state just before it (quote i-1). With
    ``one_tick_only=False`` every two-sided state counts, whatever the spread.
    """
    if len(events) != len(quotes):
        raise DataError("events and quotes must be aligned 1:1")
    def counts(q):
        return q.spread == 1 if one_tick_only else q.two_sided

    one_tick_time = 0.0
    for q, nxt in zip(quotes[:-1], quotes[1:]):
        if counts(q):
            one_tick_time += nxt.time - q.time
    if one_tick_time <= 0:
        raise DomainError("no time spent in qualifying book states; intensities undefined")
    limit = 0
    removed = 0
    for i in range(1, len(events)):
        before = quotes[i - 1]
        e = events[i]
        if not counts(before):
            continue
        best = before.best_bid if e.side is Side.BID else before.best_ask
        if e.price != best:
            continue
        if e.kind is EventKind.LIMIT_SUBMIT:
            limit += e.size
        elif e.kind in _REMOVALS:
            removed += e.size
    return IntensityEstimate(limit / one_tick_time, removed / one_tick_time, one_tick_time)


@dataclass
class InterarrivalFit:
    grid: np.ndarray
    ecdf: np.ndarray
    rate: float
    ks: float


def interarrival_fit(event_times, side: Side | None = None) -> InterarrivalFit:
    """Fit an exponential to inter-arrival times and report the KS distance.

    ``event_times`` is a sequence of times or of :class:`BookEvent`; with
    events, ``side`` filters to one side of the book.
    """
    items = list(event_times)
    if items and isinstance(items[0], BookEvent):
        items = [e.time for e in items if side is None or e.side is side]
    t = np.sort(np.asarray(items, dtype=float))
    if t.size < 2:
        raise InsufficientDataError("need at least 2 events for inter-arrival times")
    gaps = np.sort(np.diff(t))
    mean = gaps.mean()
    if mean <= 0:
        raise DataError("all inter-arrival times are zero")
    rate = 1.0 / mean
    n = gaps.size
    model = -np.expm1(-rate * gaps)
    # the empirical CDF steps at each sample; check both sides of the step
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    ks = float(max(np.max(upper - model), np.max(model - lower)))
    grid, counts = np.unique(gaps, return_counts=True)
    ecdf = np.cumsum(counts) / n
    return InterarrivalFit(grid, ecdf, rate, ks)


def write_spread_csv(path, stats: SpreadStats) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["spread_ticks", "fraction"])
        for k, f in stats.fraction_at_k_ticks.items():
            w.writerow([k, repr(f)])
