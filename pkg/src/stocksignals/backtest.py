"""Daily-bar long/short backtesting with 1% stops and per-transaction fees.

Bar order is stops first, then the day's signal at the same close, so a
stop that flattens the position can be followed by a same-bar re-entry.
Exits execute at the close (the data has no intraday prices). Money is
tracked in exact decimals quantized to $0.0001 so the pnl identities hold
without float drift. At most one share is ever held.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

from stocksignals.errors import (
    EmptyDataset,
    MisalignedSeries,
    NonPositiveInitialPrice,
    UsageError,
)
from stocksignals.labels import Label

PRICE_QUANTUM = Decimal("0.0001")

LONG = "long"
SHORT = "short"

TAKE_PROFIT = "take_profit"
STOP_LOSS = "stop_loss"
SIGNAL_REVERSAL = "signal_reversal"
END_OF_DATA = "end_of_data"


def to_price(value) -> Decimal:
    """Exact decimal for a price or fee, quantized to $0.0001."""
    return Decimal(str(value)).quantize(PRICE_QUANTUM)


def _fraction(value) -> Decimal:
    return Decimal(str(value))


@dataclass(frozen=True)
class BacktestConfig:
    fee_per_transaction: float = 0.01
    take_profit_fraction: float = 0.01
    stop_loss_fraction: float = 0.01
    signal_horizon: int = 10
    liquidate_at_end: bool = True

    def __post_init__(self):
        if self.fee_per_transaction < 0:
            raise UsageError("fee_per_transaction must be >= 0")
        if self.take_profit_fraction <= 0 or self.stop_loss_fraction <= 0:
            raise UsageError("stop fractions must be positive")
        if self.signal_horizon < 1:
            raise UsageError("signal_horizon must be >= 1")


@dataclass(frozen=True)
class Position:
    side: str  # LONG or SHORT
    entry_price: Decimal
    entry_date: dt.date


@dataclass(frozen=True)
class Trade:
    open_date: dt.date
    close_date: dt.date
    side: str
    entry_price: Decimal
    exit_price: Decimal
    exit_reason: str
    pnl: Decimal


@dataclass(frozen=True)
class BacktestReport:
    trades: tuple[Trade, ...]
    total_profit: Decimal
    initial_price: Decimal
    return_percentage: float


def check_stops(
    position: Position | None, close, cfg: BacktestConfig
) -> tuple[Decimal, str] | None:
    """Exit (price, reason) if the close crosses a stop band, else None.

    Long positions take profit at entry*(1+tp) and stop out at
    entry*(1-sl); shorts are symmetric. Both boundaries are inclusive and
    the exit price is the close itself.
    """
    if position is None:
        return None
    price = to_price(close)
    entry = position.entry_price
    up = entry * (Decimal(1) + _fraction(cfg.take_profit_fraction))
    down = entry * (Decimal(1) - _fraction(cfg.stop_loss_fraction))
    if position.side == LONG:
        if price >= up:
            return price, TAKE_PROFIT
        if price <= down:
            return price, STOP_LOSS
        return None
    short_profit = entry * (Decimal(1) - _fraction(cfg.take_profit_fraction))
    short_stop = entry * (Decimal(1) + _fraction(cfg.stop_loss_fraction))
    if price <= short_profit:
        return price, TAKE_PROFIT
    if price >= short_stop:
        return price, STOP_LOSS
    return None


def _close_trade(
    position: Position,
    exit_price: Decimal,
    close_date: dt.date,
    reason: str,
    fee: Decimal,
) -> Trade:
    if position.side == LONG:
        pnl = exit_price - position.entry_price - 2 * fee
    else:
        pnl = position.entry_price - exit_price - 2 * fee
    return Trade(
        open_date=position.entry_date,
        close_date=close_date,
        side=position.side,
        entry_price=position.entry_price,
        exit_price=exit_price,
        exit_reason=reason,
        pnl=pnl,
    )


def apply_signal(
    position: Position | None,
    signal: Label,
    close,
    cfg: BacktestConfig,
    date: dt.date = dt.date.min,
) -> tuple[Position | None, list[Trade]]:
    """Transition the position on the day's signal at the given close.

    Flat opens in the signal's direction (Hold stays flat); a matching
    signal leaves the position alone; an opposing signal closes it as a
    signal reversal and reverses into the other side at the same close.
    Stops for this bar must already have been processed.
    """
    price = to_price(close)
    fee = to_price(cfg.fee_per_transaction)
    if signal == Label.HOLD:
        return position, []
    wanted = LONG if signal == Label.BUY else SHORT
    if position is None:
        return Position(side=wanted, entry_price=price, entry_date=date), []
    if position.side == wanted:
        return position, []
    trade = _close_trade(position, price, date, SIGNAL_REVERSAL, fee)
    return Position(side=wanted, entry_price=price, entry_date=date), [trade]


def run_backtest(
    closes: Sequence[tuple[dt.date, float]],
    signals: Sequence[tuple[dt.date, Label]],
    cfg: BacktestConfig = BacktestConfig(),
) -> BacktestReport:
    """Replay aligned (date, close) and (date, signal) series through the rules.

    Per bar: realize a triggered stop first, then apply the signal at the
    same close. After the last bar an open position is liquidated at the
    final close when liquidate_at_end is set.
    """
    if len(closes) == 0:
        raise EmptyDataset("no bars to backtest")
    if len(closes) != len(signals):
        raise MisalignedSeries(f"{len(closes)} closes vs {len(signals)} signals")
    previous: dt.date | None = None
    for (close_date, _), (signal_date, _) in zip(closes, signals):
        if close_date != signal_date:
            raise MisalignedSeries(f"close {close_date} vs signal {signal_date}")
        if previous is not None and close_date <= previous:
            raise MisalignedSeries(f"dates not strictly ascending at {close_date}")
        previous = close_date

    fee = to_price(cfg.fee_per_transaction)
    position: Position | None = None
    trades: list[Trade] = []
    for (date, close), (_, signal) in zip(closes, signals):
        exit_hit = check_stops(position, close, cfg)
        if exit_hit is not None:
            price, reason = exit_hit
            trades.append(_close_trade(position, price, date, reason, fee))
            position = None
        position, reversal_trades = apply_signal(position, signal, close, cfg, date)
        trades.extend(reversal_trades)
    if cfg.liquidate_at_end and position is not None:
        last_date, last_close = closes[-1]
        trades.append(
            _close_trade(position, to_price(last_close), last_date, END_OF_DATA, fee)
        )
        position = None
    total = sum((t.pnl for t in trades), Decimal(0))
    initial = to_price(closes[0][1])
    return BacktestReport(
        trades=tuple(trades),
        total_profit=total,
        initial_price=initial,
        return_percentage=return_percentage(total, initial),
    )


def return_percentage(total_profit, initial_price) -> float:
    """100 * profit / initial price, the report's headline figure."""
    initial = float(initial_price)
    if initial <= 0:
        raise NonPositiveInitialPrice(str(initial_price))
    return 100.0 * float(total_profit) / initial
