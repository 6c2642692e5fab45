"""Command-line front end for the signal pipeline.

Commands: transform, evaluate, rank, backtest, pipeline. Flags override a
JSON config file (--config), which overrides documented defaults. Exit
codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

from stocksignals import ingest, reports
from stocksignals.backtest import BacktestConfig, run_backtest
from stocksignals.classifiers import (
    ClassifierSpec,
    bundle_json,
    fit_bundle,
    load_bundle,
)
from stocksignals.errors import (
    DataError,
    NumericError,
    PipelineError,
    UsageError,
)
from stocksignals.evaluation import EvaluationReport, evaluate_per_horizon
from stocksignals.pca import PcaRanking, RankConfig, rank_features
from stocksignals.transform import (
    CLOSE_INDEX,
    FEATURE_COLUMNS,
    FeatureRow,
    LabelConfig,
    SplitConfig,
    group_by_sector,
    assemble_features,
    feature_matrix,
    project_rows,
    shuffle_split,
    write_dataset_csv,
)

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "STOCKSIGNALS_OUTPUT_DIR"

_KIND_BY_FLAG = {
    "decision-tree": "decision_tree",
    "random-forest": "random_forest",
    "knn": "knn",
    "gaussian-nb": "gaussian_nb",
}

_CONFIG_KEYS = {
    "data",
    "out",
    "seed",
    "sector",
    "features",
    "by_sector",
    "model_file",
    "label",
    "split",
    "classifier",
    "rank",
    "backtest",
}


@dataclass
class RunConfig:
    data: Path
    out: Path
    label: LabelConfig
    split: SplitConfig
    classifier: ClassifierSpec
    rank: RankConfig
    backtest: BacktestConfig
    seed: int
    sector: str | None = None
    features_file: Path | None = None
    by_sector: bool = False
    model_file: Path | None = None

    def to_manifest(self, command: str) -> dict:
        # the output directory is deliberately absent: the manifest lives in
        # it, and recording it would break byte-identical reruns elsewhere
        return {
            "command": command,
            "data": str(self.data),
            "seed": self.seed,
            "sector": self.sector,
            "features_file": str(self.features_file) if self.features_file else None,
            "by_sector": self.by_sector,
            "model_file": str(self.model_file) if self.model_file else None,
            "label": asdict(self.label),
            "split": asdict(self.split),
            "classifier": asdict(self.classifier),
            "rank": asdict(self.rank),
            "backtest": asdict(self.backtest),
        }


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as UsageError (exit code 1)."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stocksignals", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, help_text in (
        ("transform", "ingest a market CSV and write the labeled dataset"),
        ("evaluate", "train per-horizon classifiers and report signal metrics"),
        ("rank", "rank features by weighted PCA occurrence"),
        ("backtest", "replay per-ticker test windows through the trade rules"),
        ("pipeline", "run transform, evaluate, rank, and backtest in order"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--data", help="input market CSV path")
        cmd.add_argument("--out", help="output directory (default: $%s or .)" % OUTPUT_DIR_ENV)
        cmd.add_argument("--config", help="JSON config file; flags override it")
        cmd.add_argument("--seed", type=int, help="seed for the split and the classifier")
        cmd.add_argument("--train-fraction", type=float, dest="train_fraction")
        cmd.add_argument("--sector", help="restrict to one sector")
        cmd.add_argument(
            "--features",
            help="file with one feature name per line; train on that subset",
        )
        cmd.add_argument("--up-threshold", type=float, dest="up_threshold")
        cmd.add_argument("--down-threshold", type=float, dest="down_threshold")
        if name in ("evaluate", "backtest", "pipeline"):
            cmd.add_argument(
                "--model",
                choices=sorted(_KIND_BY_FLAG),
                help="classifier kind (default random-forest)",
            )
            cmd.add_argument("--criterion", choices=("gini", "entropy"))
            cmd.add_argument("--trees", type=int, help="forest size")
            cmd.add_argument("--k", type=int, help="neighbour count for knn")
            cmd.add_argument("--max-depth", type=int, dest="max_depth")
            cmd.add_argument(
                "--min-samples-split", type=int, dest="min_samples_split"
            )
        if name == "evaluate":
            cmd.add_argument(
                "--by-sector",
                action="store_true",
                default=None,
                dest="by_sector",
                help="evaluate each sector separately",
            )
        if name in ("rank", "pipeline"):
            cmd.add_argument("--select-top", type=int, dest="select_top")
        if name in ("backtest", "pipeline"):
            cmd.add_argument("--signal-horizon", type=int, dest="signal_horizon")
            cmd.add_argument("--fee", type=float, help="fee per transaction in USD")
            cmd.add_argument("--take-profit", type=float, dest="take_profit")
            cmd.add_argument("--stop-loss", type=float, dest="stop_loss")
            cmd.add_argument(
                "--no-liquidate",
                action="store_true",
                default=None,
                dest="no_liquidate",
                help="leave the final position open",
            )
        if name == "backtest":
            cmd.add_argument(
                "--model-file", dest="model_file", help="reuse a saved model.json"
            )
    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config key {sorted(unknown)[0]!r}")
    return data


def _resolve(flag, config_value, default):
    if flag is not None:
        return flag
    if config_value is not None:
        return config_value
    return default


def _section(config: Mapping, name: str) -> Mapping:
    section = config.get(name) or {}
    if not isinstance(section, Mapping):
        raise UsageError(f"config section {name!r} must be an object")
    return section


def parse_cli(argv: Sequence[str]) -> tuple[str, RunConfig]:
    """Parse argv into (command, resolved RunConfig).

    Precedence per value: command-line flag, then config file, then the
    documented default.
    """
    args = build_parser().parse_args(argv)
    config = _load_config_file(args.config)

    data = _resolve(args.data, config.get("data"), None)
    if data is None:
        raise UsageError("missing required --data (or config key 'data')")
    out = _resolve(
        args.out, config.get("out"), os.environ.get(OUTPUT_DIR_ENV) or "."
    )

    label_cfg = _section(config, "label")
    label = LabelConfig(
        horizons=tuple(label_cfg.get("horizons", LabelConfig().horizons)),
        up_threshold=_resolve(
            getattr(args, "up_threshold", None),
            label_cfg.get("up_threshold"),
            LabelConfig().up_threshold,
        ),
        down_threshold=_resolve(
            getattr(args, "down_threshold", None),
            label_cfg.get("down_threshold"),
            LabelConfig().down_threshold,
        ),
    )

    seed = _resolve(args.seed, config.get("seed"), 0)
    split_cfg = _section(config, "split")
    split = SplitConfig(
        train_fraction=_resolve(
            args.train_fraction, split_cfg.get("train_fraction"), 0.7
        ),
        seed=args.seed if args.seed is not None else split_cfg.get("seed", seed),
    )

    clf_cfg = _section(config, "classifier")
    kind_flag = getattr(args, "model", None)
    classifier = ClassifierSpec(
        kind=_resolve(
            _KIND_BY_FLAG.get(kind_flag) if kind_flag else None,
            clf_cfg.get("kind"),
            "random_forest",
        ),
        criterion=_resolve(getattr(args, "criterion", None), clf_cfg.get("criterion"), "gini"),
        n_trees=_resolve(getattr(args, "trees", None), clf_cfg.get("n_trees"), 10),
        k=_resolve(getattr(args, "k", None), clf_cfg.get("k"), 5),
        max_depth=_resolve(getattr(args, "max_depth", None), clf_cfg.get("max_depth"), None),
        min_samples_split=_resolve(
            getattr(args, "min_samples_split", None), clf_cfg.get("min_samples_split"), 2
        ),
        seed=args.seed if args.seed is not None else clf_cfg.get("seed", seed),
        mtry=clf_cfg.get("mtry"),
        bootstrap=clf_cfg.get("bootstrap", True),
    )

    rank_cfg = _section(config, "rank")
    rank = RankConfig(
        n_components=rank_cfg.get("n_components", 6),
        contribution_threshold=rank_cfg.get("contribution_threshold", 0.1),
        weights=tuple(rank_cfg.get("weights", RankConfig().weights)),
        top_k=_resolve(getattr(args, "select_top", None), rank_cfg.get("top_k"), 6),
    )

    bt_cfg = _section(config, "backtest")
    no_liquidate = getattr(args, "no_liquidate", None)
    backtest = BacktestConfig(
        fee_per_transaction=_resolve(
            getattr(args, "fee", None), bt_cfg.get("fee_per_transaction"), 0.01
        ),
        take_profit_fraction=_resolve(
            getattr(args, "take_profit", None), bt_cfg.get("take_profit_fraction"), 0.01
        ),
        stop_loss_fraction=_resolve(
            getattr(args, "stop_loss", None), bt_cfg.get("stop_loss_fraction"), 0.01
        ),
        signal_horizon=_resolve(
            getattr(args, "signal_horizon", None), bt_cfg.get("signal_horizon"), 10
        ),
        liquidate_at_end=_resolve(
            False if no_liquidate else None, bt_cfg.get("liquidate_at_end"), True
        ),
    )
    if backtest.signal_horizon not in label.horizons:
        raise UsageError(
            f"signal horizon {backtest.signal_horizon} is not a labeled horizon"
        )

    features = _resolve(args.features, config.get("features"), None)
    model_file = _resolve(
        getattr(args, "model_file", None), config.get("model_file"), None
    )
    run = RunConfig(
        data=Path(data),
        out=Path(out),
        label=label,
        split=split,
        classifier=classifier,
        rank=rank,
        backtest=backtest,
        seed=split.seed,
        sector=_resolve(args.sector, config.get("sector"), None),
        features_file=Path(features) if features else None,
        by_sector=bool(
            _resolve(getattr(args, "by_sector", None), config.get("by_sector"), False)
        ),
        model_file=Path(model_file) if model_file else None,
    )
    return args.command, run


# --- pipeline state -----------------------------------------------------------

@dataclass
class _State:
    rows: list[FeatureRow]
    sectors: dict[str, str]
    rows_by_ticker: dict[str, list[FeatureRow]]
    subset: tuple[str, ...] | None


def _load_feature_subset(path: Path) -> tuple[str, ...]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise DataError(f"feature subset file not found: {path}") from None
    names = tuple(line.strip() for line in lines if line.strip())
    if not names:
        raise DataError(f"feature subset file {path} lists no features")
    unknown = [n for n in names if n not in FEATURE_COLUMNS]
    if unknown:
        raise UsageError(f"unknown feature {unknown[0]!r} in {path}")
    return names


def _load_state(cfg: RunConfig) -> _State:
    try:
        with open(cfg.data, "rb") as stream:
            table = ingest.parse_market_csv(stream)
    except FileNotFoundError:
        raise DataError(f"input file not found: {cfg.data}") from None
    if table.parse_warnings:
        logger.warning(
            "unparseable cells demoted to missing: %s", dict(sorted(table.parse_warnings.items()))
        )
    clean = ingest.validate_and_clean(table)
    if clean.rec_count_violations:
        logger.warning(
            "%d rows where buy+sell+hold exceeds the analyst total",
            clean.rec_count_violations,
        )
    series_by_ticker = ingest.partition_by_ticker(clean)
    rows: list[FeatureRow] = []
    rows_by_ticker: dict[str, list[FeatureRow]] = {}
    sectors: dict[str, str] = {}
    for ticker, series in series_by_ticker.items():
        if cfg.sector is not None and series.sector != cfg.sector:
            continue
        assembled = assemble_features(series, cfg.label)
        if not assembled:
            logger.warning("ticker %s has no usable rows after assembly", ticker)
            continue
        sectors[ticker] = series.sector
        rows_by_ticker[ticker] = assembled
        rows.extend(assembled)
    if not rows:
        raise DataError(
            "no feature rows assembled"
            + (f" for sector {cfg.sector!r}" if cfg.sector else "")
        )
    subset = _load_feature_subset(cfg.features_file) if cfg.features_file else None
    return _State(
        rows=rows, sectors=sectors, rows_by_ticker=rows_by_ticker, subset=subset
    )


def _split_rows(
    rows: Sequence[FeatureRow], cfg: RunConfig
) -> tuple[list[FeatureRow], list[FeatureRow]]:
    train_idx, test_idx = shuffle_split(rows, cfg.split)
    return [rows[i] for i in train_idx], [rows[i] for i in test_idx]


def _model_rows(state: _State, rows: Sequence[FeatureRow]) -> tuple[list[FeatureRow], tuple[str, ...]]:
    """Rows and feature names in model space (projected when a subset is set)."""
    if state.subset is None:
        return list(rows), FEATURE_COLUMNS
    return project_rows(rows, FEATURE_COLUMNS, state.subset), state.subset


# --- stages --------------------------------------------------------------------

def _stage_transform(cfg: RunConfig, state: _State) -> None:
    buffer = io.StringIO()
    write_dataset_csv(state.rows, buffer, cfg.label.horizons)
    path = cfg.out / "dataset.csv"
    reports.atomic_write_text(path, buffer.getvalue())
    print(
        f"transform: {len(state.rows)} rows across "
        f"{len(state.rows_by_ticker)} tickers -> {path}"
    )


def _stage_evaluate(cfg: RunConfig, state: _State) -> None:
    blocks: list[EvaluationReport] = []
    if cfg.by_sector:
        groups = group_by_sector(state.rows, state.sectors)
        for sector in sorted(groups):
            rows, names = _model_rows(state, groups[sector])
            train, test = _split_rows(rows, cfg)
            blocks.append(
                evaluate_per_horizon(
                    cfg.classifier, train, test, cfg.label.horizons, names, sector
                )
            )
    else:
        rows, names = _model_rows(state, state.rows)
        train, test = _split_rows(rows, cfg)
        blocks.append(
            evaluate_per_horizon(
                cfg.classifier, train, test, cfg.label.horizons, names
            )
        )
    reports.atomic_write_text(
        cfg.out / "metrics.csv", reports.metrics_csv_text(blocks)
    )
    reports.atomic_write_text(
        cfg.out / "metrics.json", reports.metrics_json_text(blocks, cfg.seed)
    )
    scope = f"{len(blocks)} sectors" if cfg.by_sector else "pooled"
    print(
        f"evaluate: {cfg.classifier.kind} ({scope}), "
        f"{sum(len(b.horizons) for b in blocks)} horizon reports -> "
        f"{cfg.out / 'metrics.csv'}"
    )


def _stage_rank(cfg: RunConfig, state: _State) -> PcaRanking:
    train, _ = _split_rows(state.rows, cfg)
    ranking = rank_features(feature_matrix(train), FEATURE_COLUMNS, cfg.rank)
    reports.atomic_write_text(
        cfg.out / "ranking.csv", reports.ranking_csv_text(ranking)
    )
    reports.atomic_write_text(
        cfg.out / "variance.csv", reports.variance_csv_text(ranking)
    )
    print(
        f"rank: top-{cfg.rank.top_k} features {list(ranking.selected)} -> "
        f"{cfg.out / 'ranking.csv'}"
    )
    return ranking


def _stage_backtest(cfg: RunConfig, state: _State) -> None:
    if cfg.model_file is not None:
        bundle = load_bundle(cfg.model_file)
        if bundle.horizon != cfg.backtest.signal_horizon:
            logger.warning(
                "model horizon %d overrides configured signal horizon %d",
                bundle.horizon,
                cfg.backtest.signal_horizon,
            )
    else:
        rows, names = _model_rows(state, state.rows)
        train, _ = _split_rows(rows, cfg)
        bundle = fit_bundle(
            cfg.classifier,
            train,
            cfg.backtest.signal_horizon,
            cfg.label.horizons,
            names,
        )
    reports.atomic_write_text(cfg.out / "model.json", bundle_json(bundle))

    total_profit = 0.0
    tested = 0
    for ticker in sorted(state.rows_by_ticker):
        t_rows = state.rows_by_ticker[ticker]
        cut = int(len(t_rows) * cfg.split.train_fraction)
        window = t_rows[cut:]
        if not window:
            logger.warning("ticker %s has no test window; skipped", ticker)
            continue
        closes = [(row.date, row.features[CLOSE_INDEX]) for row in window]
        signals = [
            (row.date, bundle.predict_canonical(row.features)) for row in window
        ]
        report = run_backtest(closes, signals, cfg.backtest)
        name = reports.safe_name(ticker)
        reports.atomic_write_text(
            cfg.out / f"trades_{name}.csv", reports.trades_csv_text(report.trades)
        )
        reports.atomic_write_text(
            cfg.out / f"backtest_{name}.json",
            reports.backtest_json_text(ticker, report, cfg.seed, bundle.horizon),
        )
        total_profit += float(report.total_profit)
        tested += 1
    if tested == 0:
        raise DataError("no ticker had a test window to backtest")
    print(
        f"backtest: {tested} tickers, day-{bundle.horizon} signals, "
        f"total pnl ${total_profit:.4f} -> {cfg.out / 'backtest_*.json'}"
    )


def run_command(command: str, cfg: RunConfig) -> int:
    """Execute one command (or the whole pipeline) and write its artifacts."""
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {cfg.out}: {exc}") from None
    state = _load_state(cfg)
    if command in ("transform", "pipeline"):
        _stage_transform(cfg, state)
    if command in ("evaluate", "pipeline"):
        _stage_evaluate(cfg, state)
    ranking = None
    if command in ("rank", "pipeline"):
        ranking = _stage_rank(cfg, state)
    if command in ("backtest", "pipeline"):
        _stage_backtest(cfg, state)
    manifest = cfg.to_manifest(command)
    if ranking is not None:
        manifest["selected_features"] = list(ranking.selected)
        manifest["selection_padded"] = ranking.padded
    reports.atomic_write_text(
        cfg.out / "run.json", reports.manifest_json_text(manifest)
    )
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        command, cfg = parse_cli(sys.argv[1:] if argv is None else list(argv))
        return run_command(command, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:  # fallback for any unmapped module error
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
