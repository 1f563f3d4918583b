"""LOBSTER Level-1 parsing, session trimming and mid-price series."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, CrossedBookError, OrderViolationError, ParseError

# LOBSTER prices are dollars * 10^4
PRICE_SCALE = 10_000
# placeholder prices LOBSTER writes for an empty level
EMPTY_ASK = 9_999_999_999
EMPTY_BID = -9_999_999_999
ORDER_TOLERANCE = 1e-9


class EventKind(enum.Enum):
    LIMIT_SUBMIT = 1
    CANCEL = 2
    DELETE = 3
    EXECUTE_VISIBLE = 4
    EXECUTE_HIDDEN = 5
    OTHER = 0

    @classmethod
    def from_code(cls, code: int) -> "EventKind":
        try:
            kind = cls(code)
        except ValueError:
            return cls.OTHER
        return kind


class Side(enum.Enum):
    BID = 1
    ASK = -1


@dataclass(frozen=True)
class BookEvent:
    time: float
    kind: EventKind
    size: int
    price: int  # ticks
    side: Side
    order_id: int = 0
    type_code: int = 0

    @property
    def sign(self) -> int:
        """Queue-event value: +1 for an arrival, -1 for an execution or cancel."""
        if self.kind is EventKind.LIMIT_SUBMIT:
            return 1
        if self.kind is EventKind.OTHER:
            return 0
        return -1


@dataclass(frozen=True)
class MidQuote:
    time: float
    best_bid: int | None  # ticks, None when the level is empty
    best_ask: int | None
    bid_depth: int
    ask_depth: int

    @property
    def two_sided(self) -> bool:
        return self.best_bid is not None and self.best_ask is not None

    @property
    def spread(self) -> int | None:
        if not self.two_sided:
            return None
        return self.best_ask - self.best_bid


@dataclass(frozen=True)
class SessionConfig:
    session_open: float = 34_200.0
    session_close: float = 57_600.0
    trim_head: float = 900.0
    trim_tail: float = 900.0
    tick_size: float = 0.01

    def __post_init__(self):
        if self.session_close <= self.session_open:
            raise ValueError("session_close must be after session_open")
        if self.trim_head < 0 or self.trim_tail < 0:
            raise ValueError("trim lengths must be non-negative")
        if self.trim_head + self.trim_tail >= self.session_close - self.session_open:
            raise ValueError("trim_head + trim_tail must be shorter than the session")
        if self.tick_size <= 0:
            raise ValueError("tick_size must be positive")

    @classmethod
    def from_minutes(cls, trim_minutes: float = 15.0, **kw) -> "SessionConfig":
        return cls(trim_head=60.0 * trim_minutes, trim_tail=60.0 * trim_minutes, **kw)

    @property
    def window(self) -> tuple[float, float]:
        return self.session_open + self.trim_head, self.session_close - self.trim_tail

    @property
    def price_units_per_tick(self) -> int:
        units = Decimal(str(self.tick_size)) * PRICE_SCALE
        if units != units.to_integral_value() or units <= 0:
            raise ValueError(f"tick size {self.tick_size} is not a multiple of $0.0001")
        return int(units)


@dataclass
class MidSeries:
    """Mid-prices in half-ticks (bid + ask) so odd spreads stay exact."""

    times: np.ndarray
    half_ticks: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def mid_ticks(self) -> np.ndarray:
        return self.half_ticks / 2.0

    def in_price_units(self, tick_size: float) -> np.ndarray:
        return self.half_ticks * (tick_size / 2.0)


def _rows(stream, name):
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream if isinstance(stream, str) else stream.decode())
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        yield lineno, row


def _to_ticks(raw: int, units: int, lenient: bool, lineno: int, stream: str) -> int:
    q, r = divmod(raw, units)
    if r == 0:
        return q
    if lenient:
        return int(math.floor(raw / units + 0.5))
    raise ParseError(f"price {raw} is not a multiple of the tick ({units})", lineno, stream)


def _parse_message(row, lineno, units):
    if len(row) < 6:
        raise ParseError(f"expected 6 fields, got {len(row)}", lineno, "message")
    try:
        time = float(row[0])
        code = int(row[1])
        order_id = int(row[2])
        size = int(row[3])
        raw_price = int(row[4])
        direction = int(row[5])
    except ValueError as exc:
        raise ParseError(f"malformed field ({exc})", lineno, "message") from None
    if not math.isfinite(time):
        raise ParseError("non-finite time", lineno, "message")
    kind = EventKind.from_code(code)
    if direction not in (1, -1):
        raise ParseError(f"direction must be 1 or -1, got {direction}", lineno, "message")
    if kind is EventKind.OTHER:
        if size < 0:
            raise ParseError("negative size", lineno, "message")
    elif size <= 0:
        raise ParseError(f"size must be positive, got {size}", lineno, "message")
    lenient = kind in (EventKind.OTHER, EventKind.EXECUTE_HIDDEN)
    price = _to_ticks(raw_price, units, lenient, lineno, "message")
    side = Side.BID if direction == 1 else Side.ASK
    return BookEvent(time, kind, size, price, side, order_id, code)


def _parse_book(row, lineno, units, time):
    if len(row) < 4 or len(row) % 4:
        raise ParseError(f"expected a multiple of 4 fields, got {len(row)}", lineno, "orderbook")
    try:
        ask_p, ask_s, bid_p, bid_s = (int(c) for c in row[:4])
    except ValueError as exc:
        raise ParseError(f"malformed field ({exc})", lineno, "orderbook") from None
    if ask_s < 0 or bid_s < 0:
        raise ParseError("negative depth", lineno, "orderbook")
    ask = None if ask_p >= EMPTY_ASK else _to_ticks(ask_p, units, False, lineno, "orderbook")
    bid = None if bid_p <= EMPTY_BID else _to_ticks(bid_p, units, False, lineno, "orderbook")
    return MidQuote(time, bid, ask, bid_s, ask_s)


def parse_lobster(
    message_stream: Iterable[str] | str,
    orderbook_stream: Iterable[str] | str,
    tick_size: float = 0.01,
    include_hidden: bool = True,
    tolerance: float = ORDER_TOLERANCE,
) -> tuple[list[BookEvent], list[MidQuote]]:
    """Parse an aligned LOBSTER message/orderbook pair.

    Streams may be open text files, iterables of lines, or whole strings.
    Row numbers in errors are 1-based line numbers of the offending stream.
    Hidden executions are dropped together with their book row when
    ``include_hidden`` is false.
    """
    units = SessionConfig(tick_size=tick_size).price_units_per_tick
    events: list[BookEvent] = []
    quotes: list[MidQuote] = []
    msg_rows = _rows(message_stream, "message")
    book_rows = _rows(orderbook_stream, "orderbook")
    jitter = False
    last_time = -math.inf
    while True:
        m = next(msg_rows, None)
        b = next(book_rows, None)
        if m is None and b is None:
            break
        if m is None or b is None:
            extra = "orderbook" if m is None else "message"
            lineno = (b or m)[0]
            raise AlignmentError(f"{extra} stream has more rows than its partner (row {lineno})")
        lineno, row = m
        event = _parse_message(row, lineno, units)
        if event.time < last_time - tolerance:
            raise OrderViolationError(
                f"time {event.time} precedes previous time {last_time}", lineno, "message")
        if event.time < last_time:
            jitter = True
        last_time = max(last_time, event.time)
        quote = _parse_book(b[1], b[0], units, event.time)
        if not include_hidden and event.kind is EventKind.EXECUTE_HIDDEN:
            continue
        events.append(event)
        quotes.append(quote)
    if jitter:
        order = sorted(range(len(events)), key=lambda i: events[i].time)
        events = [events[i] for i in order]
        quotes = [quotes[i] for i in order]
    return events, quotes


def read_lobster(message_path, orderbook_path, **kw):
    with open(message_path, newline="") as mf, open(orderbook_path, newline="") as bf:
        return parse_lobster(mf, bf, **kw)


def _fmt_time(t: float) -> str:
    return repr(float(t))


def format_lobster(events: Sequence[BookEvent], quotes: Sequence[MidQuote],
                   tick_size: float = 0.01) -> tuple[str, str]:
    """Serialize back to LOBSTER text (Level 1 only)."""
    units = SessionConfig(tick_size=tick_size).price_units_per_tick
    msg = io.StringIO()
    book = io.StringIO()
    mw = csv.writer(msg, lineterminator="\n")
    bw = csv.writer(book, lineterminator="\n")
    for e in events:
        code = e.type_code or e.kind.value
        mw.writerow([_fmt_time(e.time), code, e.order_id, e.size, e.price * units, e.side.value])
    for q in quotes:
        ask = EMPTY_ASK if q.best_ask is None else q.best_ask * units
        bid = EMPTY_BID if q.best_bid is None else q.best_bid * units
        bw.writerow([ask, q.ask_depth, bid, q.bid_depth])
    return msg.getvalue(), book.getvalue()


def _time_of(item) -> float:
    t = getattr(item, "time", None)
    return item[0] if t is None else t


def trim_session(items: Sequence, cfg: SessionConfig) -> list:
    """Keep items whose time lies in [open + trim_head, close - trim_tail]."""
    lo, hi = cfg.window
    return [it for it in items if lo <= _time_of(it) <= hi]


def midprice_series(quotes: Sequence[MidQuote]) -> MidSeries:
    """One mid point per two-sided quote; one-sided books carry no mid."""
    times = []
    mids = []
    for q in quotes:
        if not q.two_sided:
            continue
        if q.best_ask < q.best_bid:
            raise CrossedBookError(f"crossed book at t={q.time}: bid {q.best_bid} > ask {q.best_ask}")
        times.append(q.time)
        mids.append(q.best_bid + q.best_ask)
    return MidSeries(np.asarray(times, dtype=float), np.asarray(mids, dtype=np.int64))


def write_mid_csv(path, quotes: Sequence[MidQuote]) -> None:
    """Normalized quote export: time, bid, ask, mid (ticks)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "bid", "ask", "mid"])
        for q in quotes:
            if not q.two_sided:
                continue
            mid2 = q.best_bid + q.best_ask
            mid = str(mid2 // 2) if mid2 % 2 == 0 else f"{mid2 // 2}.5"
            w.writerow([_fmt_time(q.time), q.best_bid, q.best_ask, mid])
