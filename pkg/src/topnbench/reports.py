"""Report emission: stats JSON and plot-ready CSV tables.

Reports are pure functions of the persisted score tables, so regenerating
them from disk gives byte-identical files.
"""

import csv
import json
from functools import lru_cache
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .evaluation import StrategyScoreTable, per_index_breakdown, read_score_table, relative_best
from .pipeline import eval_dir
from .stats import friedman, nemenyi_cd, not_different_fraction, pearson

LARGE_K_NOTE = (
    "critical difference uses a studentized-range quantile extrapolated far beyond "
    "published tables; treat significance boundaries as indicative only"
)


def reports_dir(config: ExperimentConfig) -> Path:
    return config.output_dir / "reports"


def load_tables(config: ExperimentConfig) -> list[StrategyScoreTable]:
    """All persisted score tables in deterministic (dataset, algorithm, rep) order."""
    tables = []
    for dataset in config.datasets:
        for algorithm in config.algorithms:
            for rep in range(config.repetitions):
                path = eval_dir(config.output_dir, dataset.name, algorithm.name, rep) / "scores.csv"
                if path.exists():
                    tables.append(read_score_table(path))
    return tables


@lru_cache(maxsize=32)
def _cached_cd(k: int, n_blocks: int, alpha: float):
    return nemenyi_cd(k, n_blocks, alpha)


def compute_stats(config: ExperimentConfig, tables=None, alpha: float = 0.05) -> dict:
    """Per-algorithm Friedman/Nemenyi over (dataset x repetition) blocks plus
    validation-to-test Pearson correlations per dataset."""
    if tables is None:
        tables = load_tables(config)
    if not tables:
        raise ValueError("no completed score tables; run the eval stage first")

    stats: dict = {}
    for algorithm in config.algorithms:
        algo_tables = [t for t in tables if t.algorithm == algorithm.name]
        if not algo_tables:
            continue
        entry: dict = {}
        blocks = np.vstack([t.ndcg_test for t in algo_tables])
        n_blocks, k = blocks.shape
        if n_blocks >= 2:
            fr = friedman(blocks)
            nem = _cached_cd(k, n_blocks, alpha)
            frac = not_different_fraction(fr.mean_ranks, nem.critical_difference)
            entry["friedman"] = {
                "statistic": fr.statistic,
                "p_value": fr.p_value,
                "treatments": fr.k,
                "blocks": fr.n_blocks,
            }
            entry["nemenyi"] = {
                "alpha": nem.alpha,
                "q_alpha": nem.q_alpha,
                "critical_difference": nem.critical_difference,
                "not_different_with_best": frac,
            }
            if k > 20:
                entry["nemenyi"]["note"] = LARGE_K_NOTE
        else:
            entry["friedman"] = None
            entry["nemenyi"] = None
            entry["note"] = "needs >= 2 (dataset, repetition) blocks"

        pearson_by_dataset: dict = {}
        for dataset in config.datasets:
            per_rep = []
            for table in algo_tables:
                if table.dataset != dataset.name:
                    continue
                try:
                    per_rep.append(pearson(table.ndcg_val, table.ndcg_test).pearson_r)
                except ValueError:
                    per_rep.append(None)
            if per_rep:
                defined = [r for r in per_rep if r is not None]
                pearson_by_dataset[dataset.name] = {
                    "per_repetition": per_rep,
                    "mean": float(np.mean(defined)) if defined else None,
                }
        entry["pearson"] = pearson_by_dataset
        stats[algorithm.name] = entry
    return stats


def write_stats(config: ExperimentConfig, alpha: float = 0.05) -> Path:
    path = reports_dir(config) / "stats.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(compute_stats(config, alpha=alpha), indent=2, sort_keys=True) + "\n")
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def emit_reports(config: ExperimentConfig) -> dict[str, Path]:
    """Emit all report files from the persisted score tables.

    * scatter.csv: best non-top-n vs top-n ratio per (dataset, algorithm, rep)
    * domains/<domain>.csv: scatter rows restricted to one domain
    * per_index.csv: strategy means grouped by contained item index
    * generalization.csv: (validation, test) mean pairs per strategy
    * stats.json: Friedman/Nemenyi/Pearson summary
    """
    tables = load_tables(config)
    if not tables:
        raise ValueError("no completed score tables; run the eval stage first")
    out = reports_dir(config)
    domain_of = {d.name: d.domain for d in config.datasets}

    scatter_rows = []
    per_index_rows = []
    generalization_rows = []
    for table in tables:
        best_id, ratio = relative_best(table, "test")
        scatter_rows.append(
            [
                table.dataset,
                domain_of.get(table.dataset, ""),
                table.algorithm,
                table.repetition,
                best_id,
                repr(ratio),
                repr(float(table.ndcg_test[0])),
                repr(float(table.ndcg_test[best_id])),
            ]
        )
        for index, entries in per_index_breakdown(table, "test").items():
            for strategy_id, score in entries:
                per_index_rows.append(
                    [table.dataset, table.algorithm, table.repetition, index, strategy_id, repr(score)]
                )
        for row, strategy in enumerate(table.strategies):
            generalization_rows.append(
                [
                    table.dataset,
                    table.algorithm,
                    table.repetition,
                    strategy.id,
                    repr(float(table.ndcg_val[row])),
                    repr(float(table.ndcg_test[row])),
                ]
            )

    scatter_header = [
        "dataset", "domain", "algorithm", "repetition",
        "best_non_topn_id", "ratio_test", "topn_ndcg_test", "best_ndcg_test",
    ]
    paths = {}
    paths["scatter"] = out / "scatter.csv"
    _write_csv(paths["scatter"], scatter_header, scatter_rows)

    domains = sorted({row[1] for row in scatter_rows if row[1]})
    for domain in domains:
        path = out / "domains" / f"{domain}.csv"
        _write_csv(path, scatter_header, [r for r in scatter_rows if r[1] == domain])
        paths[f"domain/{domain}"] = path

    paths["per_index"] = out / "per_index.csv"
    _write_csv(
        paths["per_index"],
        ["dataset", "algorithm", "repetition", "item_index", "strategy_id", "ndcg_test"],
        per_index_rows,
    )

    paths["generalization"] = out / "generalization.csv"
    _write_csv(
        paths["generalization"],
        ["dataset", "algorithm", "repetition", "strategy_id", "ndcg_val", "ndcg_test"],
        generalization_rows,
    )

    paths["stats"] = write_stats(config)
    return paths
