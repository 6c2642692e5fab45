import datetime as dt
import io
import sys
from pathlib import Path

import numpy as np

SRC = Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from stocksignals import ingest  # noqa: E402
from stocksignals.ingest import CSV_COLUMNS, RAW_COLUMNS, DailyRecord, TickerSeries  # noqa: E402
from stocksignals.labels import Label  # noqa: E402
from stocksignals.transform import FEATURE_COLUMNS, FeatureRow  # noqa: E402

BASE_DATE = dt.date(2018, 1, 2)


def trading_date(i: int) -> dt.date:
    """Synthetic trading calendar: weekdays only, starting at BASE_DATE."""
    date = BASE_DATE
    step = 0
    while step < i:
        date += dt.timedelta(days=1)
        if date.weekday() < 5:
            step += 1
    return date


def make_record(
    ticker: str = "AAA",
    sector: str = "Tech",
    date: dt.date = BASE_DATE,
    close: float = 100.0,
    tot_analyst_rec: int = 10,
    tot_buy_rec: int = 5,
    tot_sell_rec: int = 2,
    tot_hold_rec: int = 3,
    **overrides,
) -> DailyRecord:
    values = {
        "volume": 1_000_000.0,
        "cur_mkt_cap": 5e9,
        "historical_mkt_cap": 4.5e9,
        "short_int": 1e6,
        "short_int_ratio": 1.5,
        "pe_ratio": 22.0,
        "pb_ratio": 3.5,
        "return_on_asset": 7.5,
        "best_eps": 4.2,
        "best_eps_lo": 3.8,
        "best_eps_hi": 4.6,
        "best_capex": 2e8,
        "best_capex_lo": 1.5e8,
        "best_capex_hi": 2.5e8,
        "eqy_rec_cons": 4.1,
        "best_analyst_rating": 4.3,
        "best_est_long_term_growth": 12.0,
        "best_target_price": 120.0,
    }
    values.update(overrides)
    return DailyRecord(
        date=date,
        ticker=ticker,
        sector=sector,
        close=close,
        tot_analyst_rec=tot_analyst_rec,
        tot_buy_rec=tot_buy_rec,
        tot_sell_rec=tot_sell_rec,
        tot_hold_rec=tot_hold_rec,
        **values,
    )


def make_series(
    closes,
    ticker: str = "AAA",
    sector: str = "Tech",
    start: int = 0,
    **record_overrides,
) -> TickerSeries:
    records = [
        make_record(
            ticker=ticker,
            sector=sector,
            date=trading_date(start + i),
            close=float(c),
            **record_overrides,
        )
        for i, c in enumerate(closes)
    ]
    return TickerSeries(ticker=ticker, sector=sector, records=records)


def record_csv_cells(record: DailyRecord) -> list[str]:
    cells = [
        record.date.isoformat() if record.date else "",
        record.ticker or "",
        record.sector,
    ]
    for col in RAW_COLUMNS:
        value = record.raw_value(col)
        if value is None:
            cells.append("")
        elif isinstance(value, float):
            cells.append(repr(value))
        else:
            cells.append(str(value))
    return cells


def csv_bytes(rows, header=CSV_COLUMNS) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        if isinstance(row, DailyRecord):
            lines.append(",".join(record_csv_cells(row)))
        else:
            lines.append(",".join(str(c) for c in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def synthetic_market_bytes(
    n_tickers: int = 3,
    n_days: int = 80,
    seed: int = 0,
    sectors=("Tech", "Energy", "Health"),
) -> bytes:
    """A complete, parseable market CSV with price walks per ticker."""
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(n_tickers):
        ticker = f"TK{t:02d}"
        sector = sectors[t % len(sectors)]
        price = float(rng.uniform(40.0, 200.0))
        shares = float(rng.integers(50_000_000, 500_000_000))
        eps = float(rng.uniform(1.0, 8.0))
        capex = float(rng.uniform(5e7, 5e8))
        for day in range(n_days):
            price = max(1.0, price * float(np.exp(rng.normal(0.0, 0.015))))
            total = int(rng.integers(5, 30))
            buy = int(rng.integers(0, total + 1))
            sell = int(rng.integers(0, total - buy + 1))
            hold = total - buy - sell
            eps_lo = eps * float(rng.uniform(0.8, 0.95))
            eps_hi = eps * float(rng.uniform(1.05, 1.2))
            rows.append(
                make_record(
                    ticker=ticker,
                    sector=sector,
                    date=trading_date(day),
                    close=round(price, 4),
                    tot_analyst_rec=total,
                    tot_buy_rec=buy,
                    tot_sell_rec=sell,
                    tot_hold_rec=hold,
                    volume=float(rng.integers(100_000, 5_000_000)),
                    cur_mkt_cap=round(price * shares, 2),
                    historical_mkt_cap=round(price * shares * float(rng.uniform(0.7, 1.0)), 2),
                    short_int=float(rng.integers(100_000, 3_000_000)),
                    short_int_ratio=float(rng.uniform(0.2, 6.0)),
                    pe_ratio=float(rng.uniform(5.0, 40.0)),
                    pb_ratio=float(rng.uniform(0.5, 8.0)),
                    return_on_asset=float(rng.uniform(-5.0, 20.0)),
                    best_eps=round(eps, 4),
                    best_eps_lo=round(eps_lo, 4),
                    best_eps_hi=round(eps_hi, 4),
                    best_capex=round(capex, 2),
                    best_capex_lo=round(capex * 0.8, 2),
                    best_capex_hi=round(capex * 1.25, 2),
                    eqy_rec_cons=float(rng.uniform(1.0, 5.0)),
                    best_analyst_rating=float(rng.uniform(1.0, 5.0)),
                    best_est_long_term_growth=float(rng.uniform(-2.0, 25.0)),
                    best_target_price=round(price * float(rng.uniform(0.8, 1.3)), 4),
                )
            )
    return csv_bytes(rows)


def parse_synthetic(n_tickers=3, n_days=80, seed=0):
    table = ingest.parse_market_csv(synthetic_market_bytes(n_tickers, n_days, seed))
    return ingest.validate_and_clean(table)


def make_feature_row(
    features,
    labels,
    ticker: str = "AAA",
    date: dt.date = BASE_DATE,
) -> FeatureRow:
    labels = tuple(
        Label(lab) if lab is not None and not isinstance(lab, Label) else lab
        for lab in labels
    )
    return FeatureRow(
        ticker=ticker, date=date, features=tuple(float(x) for x in features),
        labels=labels,
    )


def random_feature_rows(n: int, seed: int = 0, width: int = len(FEATURE_COLUMNS)):
    """Rows with random features and a random full 10-slot label vector."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        features = rng.normal(0.0, 1.0, size=width)
        labels = tuple(Label(int(v)) for v in rng.integers(0, 3, size=10))
        rows.append(
            make_feature_row(features, labels, ticker="AAA", date=trading_date(i))
        )
    return rows
