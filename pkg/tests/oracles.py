"""Independent brute-force oracles used to cross-check the implementation.

Everything here is deliberately written the slow, obvious way (explicit
loops, boolean masks, per-candidate recounts) and shares no code with the
package under test.
"""

import math
from decimal import Decimal


# --- labeling ----------------------------------------------------------------

def brute_force_labels(closes, horizons, up=1.01, down=0.99):
    """Per-day label list: 2 buy, 0 sell, 1 hold, None past the series end."""
    n = len(closes)
    table = []
    for i in range(n):
        row = []
        for h in horizons:
            j = i + h
            if j >= n:
                row.append(None)
            elif closes[j] >= up * closes[i]:
                row.append(2)
            elif closes[j] <= down * closes[i]:
                row.append(0)
            else:
                row.append(1)
        table.append(row)
    return table


# --- split search --------------------------------------------------------------

def _impurity(counts, criterion):
    total = sum(counts)
    if criterion == "gini":
        acc = 0.0
        for c in counts:
            p = c / total
            acc += p * p
        return 1.0 - acc
    acc = 0.0
    for c in counts:
        if c:
            p = c / total
            acc -= p * math.log2(p)
    return acc


def brute_force_best_split(X, y, criterion):
    """Exhaustive search over every (feature, midpoint) candidate.

    Returns (feature, threshold, gain) for the positive-gain maximum, ties
    broken by lower feature then lower threshold, or None.
    """
    n = len(y)
    parent_counts = [0, 0, 0]
    for label in y:
        parent_counts[int(label)] += 1
    parent = _impurity(parent_counts, criterion)
    best = None
    n_features = len(X[0])
    for f in range(n_features):
        values = sorted({float(row[f]) for row in X})
        for lo, hi in zip(values, values[1:]):
            threshold = (lo + hi) / 2.0
            left = [0, 0, 0]
            right = [0, 0, 0]
            for row, label in zip(X, y):
                if row[f] <= threshold:
                    left[int(label)] += 1
                else:
                    right[int(label)] += 1
            nl, nr = sum(left), sum(right)
            weighted = (nl * _impurity(left, criterion) + nr * _impurity(right, criterion)) / n
            gain = parent - weighted
            if gain > 0.0 and (best is None or gain > best[2]):
                best = (f, threshold, gain)
    return best


# --- gaussian density ------------------------------------------------------------

def gaussian_log_posterior(prior, means, variances, x):
    """Log prior plus independent Gaussian log densities, the slow way."""
    acc = math.log(prior)
    for value, mu, var in zip(x, means, variances):
        acc += -0.5 * math.log(2.0 * math.pi * var) - (value - mu) ** 2 / (2.0 * var)
    return acc


# --- backtest ---------------------------------------------------------------------

def simulate_backtest(closes, signals, fee="0.01", tp="0.01", sl="0.01", liquidate=True):
    """Straight-line hand-rule simulator.

    closes: list of (date, price); signals: list of (date, label int).
    Returns a list of trade tuples
    (open_date, close_date, side, entry, exit, reason, pnl) with Decimals.
    """
    fee = Decimal(fee)
    tp = Decimal(tp)
    sl = Decimal(sl)
    one = Decimal(1)
    side = None  # "long" / "short"
    entry = None
    entry_date = None
    trades = []

    def close_position(price, date, reason):
        nonlocal side, entry, entry_date
        if side == "long":
            pnl = price - entry - 2 * fee
        else:
            pnl = entry - price - 2 * fee
        trades.append((entry_date, date, side, entry, price, reason, pnl))
        side, entry, entry_date = None, None, None

    for (date, raw_price), (_, signal) in zip(closes, signals):
        price = Decimal(str(raw_price)).quantize(Decimal("0.0001"))
        if side == "long":
            if price >= entry * (one + tp):
                close_position(price, date, "take_profit")
            elif price <= entry * (one - sl):
                close_position(price, date, "stop_loss")
        elif side == "short":
            if price <= entry * (one - tp):
                close_position(price, date, "take_profit")
            elif price >= entry * (one + sl):
                close_position(price, date, "stop_loss")
        if signal == 2:  # buy
            if side is None:
                side, entry, entry_date = "long", price, date
            elif side == "short":
                close_position(price, date, "signal_reversal")
                side, entry, entry_date = "long", price, date
        elif signal == 0:  # sell
            if side is None:
                side, entry, entry_date = "short", price, date
            elif side == "long":
                close_position(price, date, "signal_reversal")
                side, entry, entry_date = "short", price, date
    if liquidate and side is not None:
        date, raw_price = closes[-1]
        close_position(Decimal(str(raw_price)).quantize(Decimal("0.0001")), date, "end_of_data")
    return trades
