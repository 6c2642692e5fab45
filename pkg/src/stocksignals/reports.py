"""Report serialization: metrics, ranking, variance, trade logs.

All writers are deterministic (repr floats, sorted JSON keys, "\n" line
endings) so identical inputs produce byte-identical files, and all files
are written atomically via a temp file plus rename.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import os
import tempfile
from decimal import Decimal
from pathlib import Path
from typing import IO, Iterable, Sequence

from stocksignals.backtest import BacktestReport, Trade
from stocksignals.evaluation import EvaluationReport
from stocksignals.pca import FeatureScore, PcaRanking

METRICS_FIELDS = (
    "sector",
    "model",
    "horizon",
    "buy_precision",
    "sell_recall",
    "hold_f1",
    "micro_f1",
    "n_test",
)


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    target = Path(path)
    handle = tempfile.NamedTemporaryFile(
        mode="w",
        encoding="utf-8",
        newline="",
        dir=target.parent,
        prefix=f".{target.name}.",
        delete=False,
    )
    try:
        with handle as stream:
            stream.write(text)
        os.replace(handle.name, target)
    except BaseException:
        try:
            os.unlink(handle.name)
        except OSError:
            pass
        raise


def _fmt(value: float) -> str:
    return repr(float(value))


# --- metrics ---------------------------------------------------------------

def metrics_csv_text(blocks: Sequence[EvaluationReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(METRICS_FIELDS)
    for block in blocks:
        for report in block.horizons:
            writer.writerow(
                [
                    block.sector or "",
                    block.spec.kind,
                    report.horizon,
                    _fmt(report.buy_precision),
                    _fmt(report.sell_recall),
                    _fmt(report.hold_f1),
                    _fmt(report.micro_f1),
                    report.n_test,
                ]
            )
    return out.getvalue()


def read_metrics_csv(stream: IO[str]) -> list[dict]:
    rows = []
    for record in csv.DictReader(stream):
        rows.append(
            {
                "sector": record["sector"],
                "model": record["model"],
                "horizon": int(record["horizon"]),
                "buy_precision": float(record["buy_precision"]),
                "sell_recall": float(record["sell_recall"]),
                "hold_f1": float(record["hold_f1"]),
                "micro_f1": float(record["micro_f1"]),
                "n_test": int(record["n_test"]),
            }
        )
    return rows


def _class_metrics_dict(metrics) -> dict:
    return {
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "no_predictions": metrics.no_predictions,
        "no_instances": metrics.no_instances,
    }


def metrics_json_text(blocks: Sequence[EvaluationReport], seed: int) -> str:
    payload = {
        "seed": seed,
        "blocks": [
            {
                "sector": block.sector,
                "model": block.spec.kind,
                "seed": block.seed,
                "omitted_horizons": list(block.omitted_horizons),
                "horizons": [
                    {
                        "horizon": r.horizon,
                        "buy_precision": r.buy_precision,
                        "sell_recall": r.sell_recall,
                        "hold_f1": r.hold_f1,
                        "micro_f1": r.micro_f1,
                        "n_test": r.n_test,
                        "confusion": [list(row) for row in r.confusion.counts],
                        "sell": _class_metrics_dict(r.sell),
                        "hold": _class_metrics_dict(r.hold),
                        "buy": _class_metrics_dict(r.buy),
                    }
                    for r in block.horizons
                ],
            }
            for block in blocks
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# --- ranking ----------------------------------------------------------------

def ranking_csv_text(ranking: PcaRanking) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["feature", "occurrences", "weighted_occurrence"])
    for score in ranking.scores:
        writer.writerow([score.feature, score.occurrences, score.weighted_occurrence])
    return out.getvalue()


def read_ranking_csv(stream: IO[str]) -> list[FeatureScore]:
    return [
        FeatureScore(
            feature=record["feature"],
            occurrences=int(record["occurrences"]),
            weighted_occurrence=int(record["weighted_occurrence"]),
        )
        for record in csv.DictReader(stream)
    ]


def variance_csv_text(ranking: PcaRanking) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["component", "ratio", "cumulative"])
    for i, (ratio, cum) in enumerate(
        zip(ranking.explained_ratios, ranking.cumulative_ratios), start=1
    ):
        writer.writerow([i, _fmt(ratio), _fmt(cum)])
    return out.getvalue()


def read_variance_csv(stream: IO[str]) -> list[dict]:
    return [
        {
            "component": int(record["component"]),
            "ratio": float(record["ratio"]),
            "cumulative": float(record["cumulative"]),
        }
        for record in csv.DictReader(stream)
    ]


# --- backtest ----------------------------------------------------------------

TRADE_FIELDS = (
    "open_date",
    "close_date",
    "side",
    "entry_price",
    "exit_price",
    "exit_reason",
    "pnl",
)


def trades_csv_text(trades: Iterable[Trade]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRADE_FIELDS)
    for trade in trades:
        writer.writerow(
            [
                trade.open_date.isoformat(),
                trade.close_date.isoformat(),
                trade.side,
                str(trade.entry_price),
                str(trade.exit_price),
                trade.exit_reason,
                str(trade.pnl),
            ]
        )
    return out.getvalue()


def read_trades_csv(stream: IO[str]) -> list[Trade]:
    return [
        Trade(
            open_date=dt.date.fromisoformat(record["open_date"]),
            close_date=dt.date.fromisoformat(record["close_date"]),
            side=record["side"],
            entry_price=Decimal(record["entry_price"]),
            exit_price=Decimal(record["exit_price"]),
            exit_reason=record["exit_reason"],
            pnl=Decimal(record["pnl"]),
        )
        for record in csv.DictReader(stream)
    ]


def backtest_json_text(
    ticker: str, report: BacktestReport, seed: int, horizon: int
) -> str:
    payload = {
        "ticker": ticker,
        "seed": seed,
        "signal_horizon": horizon,
        "n_trades": len(report.trades),
        "total_profit": str(report.total_profit),
        "initial_price": str(report.initial_price),
        "return_percentage": report.return_percentage,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def manifest_json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def safe_name(ticker: str) -> str:
    """Ticker as a filesystem-safe fragment for per-ticker artifact names."""
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in ticker)
