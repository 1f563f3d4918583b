"""Regenerate the 1000-row LOBSTER excerpt used by the parser golden tests.

Run from this directory: ``python make_golden.py``. The book evolves as a
coherent Level-1 state; prices are in dollars * 10^4 like the real files.
"""

import random

N_ROWS = 1000
SYMBOL = "GOLD_2012-06-21_34200000_57600000"


def main(seed=20120621):
    rng = random.Random(seed)
    t = 34200.0
    bid, ask = 58590, 58592  # ticks
    bid_d, ask_d = 300, 200
    oid = 1000
    msgs = []
    books = []
    for _ in range(N_ROWS):
        t += rng.expovariate(5.0)
        t = round(t, 9)
        side = rng.choice((1, -1))
        r = rng.random()
        if r < 0.45:
            code = 1
            # occasional improvement inside the spread
            if ask - bid > 1 and rng.random() < 0.3:
                if side == 1:
                    bid += 1
                    bid_d = 0
                else:
                    ask -= 1
                    ask_d = 0
            size = rng.choice((100, 100, 200, 50, 300))
            price = bid if side == 1 else ask
            if side == 1:
                bid_d += size
            else:
                ask_d += size
        elif r < 0.75:
            code = rng.choice((2, 3))
            size = rng.choice((50, 100))
            price = bid if side == 1 else ask
            if side == 1:
                bid_d -= size
            else:
                ask_d -= size
        elif r < 0.95:
            code = 4
            size = rng.choice((100, 100, 25))
            price = bid if side == 1 else ask
            if side == 1:
                bid_d -= size
            else:
                ask_d -= size
        else:
            code = 5
            size = rng.choice((10, 100))
            # hidden fills may print between ticks
            price = None
        if bid_d <= 0:
            bid -= rng.choice((1, 1, 2))
            bid_d = rng.choice((100, 200, 400))
        if ask_d <= 0:
            ask += rng.choice((1, 1, 2))
            ask_d = rng.choice((100, 200, 400))
        if price is None:
            raw = (bid * 100 + ask * 100) // 2
        else:
            raw = price * 100
        oid += 1
        msgs.append(f"{t:.9f},{code},{oid},{size},{raw},{side}\n")
        books.append(f"{ask * 100},{ask_d},{bid * 100},{bid_d}\n")
    with open(f"{SYMBOL}_message_1.csv", "w") as fh:
        fh.writelines(msgs)
    with open(f"{SYMBOL}_orderbook_1.csv", "w") as fh:
        fh.writelines(books)


if __name__ == "__main__":
    main()
