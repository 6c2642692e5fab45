"""Feature assembly: derived indicators, horizon labels, split, scaling.

The canonical feature vector has 28 entries: the 23 raw columns from
ingest.RAW_COLUMNS followed by buy_percent, hold_percent, sell_percent,
std_5day, std_10day, in that order for every row.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from stocksignals import ingest
from stocksignals.errors import (
    DimensionMismatch,
    EmptyDataset,
    EmptySeries,
    InvalidFraction,
    TooFewRows,
    UnknownTicker,
    UsageError,
    WindowTooSmall,
)
from stocksignals.ingest import DailyRecord, TickerSeries
from stocksignals.labels import Label
from stocksignals.rng import SplitMix64

DERIVED_COLUMNS: tuple[str, ...] = (
    "buy_percent",
    "hold_percent",
    "sell_percent",
    "std_5day",
    "std_10day",
)
FEATURE_COLUMNS: tuple[str, ...] = ingest.RAW_COLUMNS + DERIVED_COLUMNS
DEFAULT_HORIZONS: tuple[int, ...] = tuple(range(1, 11))

CLOSE_INDEX = FEATURE_COLUMNS.index("PX_OFFICIAL_CLOSE")


@dataclass(frozen=True)
class LabelConfig:
    """Horizons and the up/down move thresholds that define labels."""

    horizons: tuple[int, ...] = DEFAULT_HORIZONS
    up_threshold: float = 1.01
    down_threshold: float = 0.99

    def __post_init__(self):
        if not self.horizons:
            raise UsageError("at least one horizon is required")
        if any(h <= 0 for h in self.horizons):
            raise UsageError("horizons must be positive")
        if len(set(self.horizons)) != len(self.horizons):
            raise UsageError("horizons must be distinct")
        if not self.down_threshold < 1.0 < self.up_threshold:
            raise UsageError("need down_threshold < 1 < up_threshold")


@dataclass(frozen=True)
class SplitConfig:
    """Seeded train/test split parameters."""

    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidFraction(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


@dataclass(frozen=True)
class Scaler:
    """Per-feature mean and sample standard deviation from training rows."""

    means: tuple[float, ...]
    stds: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.means)

    def to_dict(self) -> dict:
        return {"means": list(self.means), "stds": list(self.stds)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Scaler":
        return cls(means=tuple(data["means"]), stds=tuple(data["stds"]))


@dataclass(frozen=True)
class FeatureRow:
    """One labeled observation: 28 features plus one label slot per horizon."""

    ticker: str
    date: dt.date
    features: tuple[float, ...]
    labels: tuple[Label | None, ...]


def derive_rec_percentages(
    record: DailyRecord,
) -> tuple[float, float, float] | None:
    """(buy, hold, sell) shares of the analyst recommendation total.

    Missing (None) when the total is zero or absent, and also when a count
    exceeds the total, so downstream rows always carry values in [0, 1].
    """
    total = record.tot_analyst_rec
    if not total:
        return None
    if None in (record.tot_buy_rec, record.tot_hold_rec, record.tot_sell_rec):
        return None
    buy = record.tot_buy_rec / total
    hold = record.tot_hold_rec / total
    sell = record.tot_sell_rec / total
    if not all(0.0 <= p <= 1.0 for p in (buy, hold, sell)):
        return None
    return buy, hold, sell


def rolling_std(closes: Sequence[float], window: int) -> list[float | None]:
    """Sample standard deviation of the trailing window ending on each day.

    Days with fewer than `window` observations so far are None. Uses prefix
    sums of x and x^2; the n-1 denominator matches the Scaler so that
    standardized covariance diagonals come out at exactly 1.
    """
    if window < 2:
        raise WindowTooSmall(f"window must be >= 2, got {window}")
    n = len(closes)
    sums = [0.0] * (n + 1)
    squares = [0.0] * (n + 1)
    for i, x in enumerate(closes):
        sums[i + 1] = sums[i] + x
        squares[i + 1] = squares[i] + x * x
    out: list[float | None] = [None] * n
    for i in range(window - 1, n):
        s = sums[i + 1] - sums[i + 1 - window]
        q = squares[i + 1] - squares[i + 1 - window]
        var = (q - s * s / window) / (window - 1)
        out[i] = math.sqrt(max(var, 0.0))  # clamp negative rounding residue
    return out


def label_closes(
    closes: Sequence[float], cfg: LabelConfig = LabelConfig()
) -> list[tuple[Label | None, ...]]:
    """Per-day label vector over the configured horizons.

    Day i, horizon n: Buy when close[i+n] >= up_threshold * close[i], Sell
    when close[i+n] <= down_threshold * close[i], Hold in between, None when
    day i+n runs past the series. Horizons count trading rows, not calendar
    days. Both thresholds are inclusive.
    """
    n = len(closes)
    out = []
    for i in range(n):
        base = closes[i]
        row: list[Label | None] = []
        for horizon in cfg.horizons:
            j = i + horizon
            if j >= n:
                row.append(None)
            elif closes[j] >= cfg.up_threshold * base:
                row.append(Label.BUY)
            elif closes[j] <= cfg.down_threshold * base:
                row.append(Label.SELL)
            else:
                row.append(Label.HOLD)
        out.append(tuple(row))
    return out


def label_horizons(
    series: TickerSeries, cfg: LabelConfig = LabelConfig()
) -> list[tuple[Label | None, ...]]:
    """label_closes applied to a ticker series (records already date-ordered)."""
    return label_closes([r.close for r in series.records], cfg)


def assemble_features(
    series: TickerSeries, cfg: LabelConfig = LabelConfig()
) -> list[FeatureRow]:
    """Combine raw columns, derived indicators, and horizon labels per day.

    Days with any missing derived value, or with no computable label at all,
    are dropped.
    """
    if not series.records:
        raise EmptySeries(series.ticker)
    closes = [r.close for r in series.records]
    std5 = rolling_std(closes, 5)
    std10 = rolling_std(closes, 10)
    day_labels = label_closes(closes, cfg)
    rows: list[FeatureRow] = []
    for i, record in enumerate(series.records):
        percentages = derive_rec_percentages(record)
        if percentages is None or std5[i] is None or std10[i] is None:
            continue
        labels = day_labels[i]
        if all(label is None for label in labels):
            continue
        features = tuple(
            float(record.raw_value(col)) for col in ingest.RAW_COLUMNS
        ) + (percentages[0], percentages[1], percentages[2], std5[i], std10[i])
        rows.append(
            FeatureRow(
                ticker=series.ticker, date=record.date,
                features=features, labels=labels,
            )
        )
    return rows


def shuffle_split(
    rows: Sequence[FeatureRow], cfg: SplitConfig
) -> tuple[list[int], list[int]]:
    """Seeded Fisher-Yates permutation split into train/test index lists.

    The first floor(n * train_fraction) permuted indices form the training
    set; the remainder is the test set. Identical seed, identical split.
    """
    if not 0.0 < cfg.train_fraction < 1.0:
        raise InvalidFraction(str(cfg.train_fraction))
    n = len(rows)
    if n == 0:
        raise EmptyDataset("cannot split zero rows")
    order = list(range(n))
    SplitMix64(cfg.seed).shuffle(order)
    cut = int(n * cfg.train_fraction)
    return order[:cut], order[cut:]


def group_by_sector(
    rows: Iterable[FeatureRow], sectors: Mapping[str, str]
) -> dict[str, list[FeatureRow]]:
    """Partition rows by their ticker's sector, preserving row order."""
    grouped: dict[str, list[FeatureRow]] = {}
    for row in rows:
        if row.ticker not in sectors:
            raise UnknownTicker(row.ticker)
        grouped.setdefault(sectors[row.ticker], []).append(row)
    return grouped


def feature_matrix(rows: Iterable[FeatureRow]) -> list[tuple[float, ...]]:
    return [row.features for row in rows]


def standardize_fit(vectors: Sequence[Sequence[float]]) -> Scaler:
    """Fit per-feature mean and sample (n-1) standard deviation.

    Constant features record std 0; standardize_apply maps them to 0.
    """
    n = len(vectors)
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to fit a scaler, got {n}")
    width = len(vectors[0])
    means = []
    stds = []
    for j in range(width):
        column = [vec[j] for vec in vectors]
        lo, hi = min(column), max(column)
        if lo == hi:
            means.append(lo)
            stds.append(0.0)
            continue
        mean = sum(column) / n
        var = sum((x - mean) ** 2 for x in column) / (n - 1)
        means.append(mean)
        stds.append(math.sqrt(var))
    return Scaler(means=tuple(means), stds=tuple(stds))


def standardize_apply(
    scaler: Scaler, vectors: Sequence[Sequence[float]]
) -> list[tuple[float, ...]]:
    """Map each value to (x - mean) / std; zero-std features map to 0."""
    out = []
    for vec in vectors:
        if len(vec) != scaler.dimension:
            raise DimensionMismatch(
                f"row has {len(vec)} features, scaler expects {scaler.dimension}"
            )
        out.append(
            tuple(
                (x - m) / s if s else 0.0
                for x, m, s in zip(vec, scaler.means, scaler.stds)
            )
        )
    return out


def fit_scaler(rows: Sequence[FeatureRow]) -> Scaler:
    return standardize_fit(feature_matrix(rows))


def project_rows(
    rows: Iterable[FeatureRow],
    feature_names: Sequence[str],
    selected: Sequence[str],
) -> list[FeatureRow]:
    """Restrict each row to the selected feature columns (pure projection)."""
    index = {name: i for i, name in enumerate(feature_names)}
    try:
        keep = [index[name] for name in selected]
    except KeyError as exc:
        raise UsageError(f"unknown feature {exc.args[0]!r}") from None
    return [
        FeatureRow(
            ticker=row.ticker,
            date=row.date,
            features=tuple(row.features[i] for i in keep),
            labels=row.labels,
        )
        for row in rows
    ]


# --- dataset CSV ------------------------------------------------------------

def dataset_columns(horizons: Sequence[int] = DEFAULT_HORIZONS) -> list[str]:
    return (
        ["ticker", "date"]
        + list(FEATURE_COLUMNS)
        + [f"label_day{h}" for h in horizons]
    )


def write_dataset_csv(
    rows: Iterable[FeatureRow],
    stream: IO[str],
    horizons: Sequence[int] = DEFAULT_HORIZONS,
) -> None:
    """Persist assembled rows; labels as 0/1/2, empty cell = missing."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(dataset_columns(horizons))
    for row in rows:
        writer.writerow(
            [row.ticker, row.date.isoformat()]
            + [repr(x) for x in row.features]
            + ["" if lab is None else int(lab) for lab in row.labels]
        )


def read_dataset_csv(stream: IO[str]) -> tuple[list[FeatureRow], tuple[int, ...]]:
    """Load a dataset CSV back into rows plus the horizon list it encodes."""
    reader = csv.reader(stream)
    header = next(reader)
    expected_prefix = ["ticker", "date"] + list(FEATURE_COLUMNS)
    if header[: len(expected_prefix)] != expected_prefix:
        raise DimensionMismatch("dataset header does not match canonical columns")
    horizons = tuple(
        int(name.removeprefix("label_day")) for name in header[len(expected_prefix):]
    )
    rows = []
    width = len(FEATURE_COLUMNS)
    for record in reader:
        if not record:
            continue
        features = tuple(float(x) for x in record[2 : 2 + width])
        labels = tuple(
            Label(int(cell)) if cell else None for cell in record[2 + width :]
        )
        rows.append(
            FeatureRow(
                ticker=record[0],
                date=dt.date.fromisoformat(record[1]),
                features=features,
                labels=labels,
            )
        )
    return rows, horizons
