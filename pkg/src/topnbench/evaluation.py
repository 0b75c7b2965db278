"""Exhaustive evaluation of selection strategies over ranked predictions.

For every user with nonempty held-out relevance, each strategy picks its
positions from the user's top-K predictions and the threshold metrics are
averaged over users. The per-user metric values come from the scalar
functions in :mod:`topnbench.metrics`, so the top-n strategy's column is
bit-identical to the conventional metric computed without any strategy
machinery.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .metrics import ndcg_at_n, precision_at_n
from .strategies import SelectionStrategy, apply_strategy


@dataclass
class EvalContext:
    """Predictions and relevance for one split of one trained model.

    ``predictions`` maps user index to the ranked top-K item indices;
    ``relevance`` maps user index to the split's held-out item set. Users
    with empty relevance are excluded from averaging.
    """

    k: int
    n: int
    predictions: Mapping[int, Sequence[int]]
    relevance: Mapping[int, set]

    def __post_init__(self):
        if not 1 <= self.n <= self.k:
            raise ValueError(f"need 1 <= n <= k, got n={self.n}, k={self.k}")
        for user, items in self.predictions.items():
            if len(items) < self.k:
                raise ValueError(
                    f"user {user} has only {len(items)} predictions, need >= k={self.k}"
                )

    def eligible_users(self) -> list[int]:
        """Users that enter the averages, in ascending index order."""
        return sorted(u for u in self.predictions if self.relevance.get(u))


@dataclass
class SplitScores:
    """Per-strategy mean metrics on one split."""

    ndcg: np.ndarray
    precision: np.ndarray
    n_users: int


def evaluate_strategies(
    ctx: EvalContext, strategies: Sequence[SelectionStrategy]
) -> SplitScores:
    """Mean nDCG@n and Precision@n per strategy, averaged over eligible users.

    The reduction over users is ordered (ascending user index), so results
    do not depend on dictionary or scheduling order.
    """
    users = ctx.eligible_users()
    if not users:
        raise ValueError("no users with nonempty relevance to evaluate")
    n_users = len(users)
    ndcg = np.empty((len(strategies), n_users))
    precision = np.empty((len(strategies), n_users))
    for col, user in enumerate(users):
        topk = list(ctx.predictions[user])[: ctx.k]
        relevant = ctx.relevance[user]
        for row, strategy in enumerate(strategies):
            selected = apply_strategy(topk, strategy, ctx.k)
            ndcg[row, col] = ndcg_at_n(selected, relevant, ctx.n)
            precision[row, col] = precision_at_n(selected, relevant, ctx.n)
    return SplitScores(ndcg.mean(axis=1), precision.mean(axis=1), n_users)


@dataclass
class StrategyScoreTable:
    """Per-strategy validation and test means for one (dataset, algorithm, repetition)."""

    dataset: str
    algorithm: str
    repetition: int
    strategies: list[SelectionStrategy]
    ndcg_val: np.ndarray
    ndcg_test: np.ndarray
    precision_val: np.ndarray
    precision_test: np.ndarray
    n_users: int

    @classmethod
    def from_splits(
        cls,
        strategies: Sequence[SelectionStrategy],
        val: SplitScores,
        test: SplitScores,
        dataset: str = "",
        algorithm: str = "",
        repetition: int = 0,
    ) -> "StrategyScoreTable":
        return cls(
            dataset=dataset,
            algorithm=algorithm,
            repetition=repetition,
            strategies=list(strategies),
            ndcg_val=val.ndcg,
            ndcg_test=test.ndcg,
            precision_val=val.precision,
            precision_test=test.precision,
            n_users=test.n_users,
        )

    def scores(self, split: str, metric: str = "ndcg") -> np.ndarray:
        key = {"ndcg": ("ndcg_val", "ndcg_test"), "precision": ("precision_val", "precision_test")}
        try:
            val_attr, test_attr = key[metric]
        except KeyError:
            raise ValueError(f"unknown metric {metric!r}")
        if split == "val":
            return getattr(self, val_attr)
        if split == "test":
            return getattr(self, test_attr)
        raise ValueError(f"unknown split {split!r}")


def relative_best(
    table: StrategyScoreTable, split: str = "test", metric: str = "ndcg"
) -> tuple[int, float]:
    """Best non-top-n strategy relative to the top-n strategy.

    Returns ``(strategy id, ratio)`` with ratio = mean(best non-top-n) /
    mean(top-n). When the top-n mean is zero the ratio is undefined and
    reported as NaN.
    """
    scores = table.scores(split, metric)
    if len(scores) < 2:
        raise ValueError("table needs at least two strategies")
    others = scores[1:]
    best = int(np.argmax(others)) + 1
    if scores[0] == 0:
        return best, math.nan
    return best, float(scores[best] / scores[0])


def per_index_breakdown(
    table: StrategyScoreTable, split: str = "test", metric: str = "ndcg"
) -> dict[int, list[tuple[int, float]]]:
    """Per item-index view: strategies containing each top-K position.

    For every position i in 0..K-1, lists (strategy id, mean score) over
    the strategies whose index set contains i; this is the data behind
    per-index box plots of strategy performance.
    """
    scores = table.scores(split, metric)
    k = max((max(s.indices) for s in table.strategies), default=-1) + 1
    breakdown: dict[int, list[tuple[int, float]]] = {i: [] for i in range(k)}
    for strategy, score in zip(table.strategies, scores):
        for i in strategy.indices:
            breakdown[i].append((strategy.id, float(score)))
    return breakdown


SCORE_TABLE_FIELDS = [
    "strategy_id",
    "indices",
    "ndcg_val",
    "ndcg_test",
    "prec_val",
    "prec_test",
    "users",
    "dataset",
    "algorithm",
    "repetition",
]


def write_score_table(table: StrategyScoreTable, path) -> None:
    """Persist a score table as CSV (floats in shortest round-trip form)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_TABLE_FIELDS)
        for row, strategy in enumerate(table.strategies):
            writer.writerow(
                [
                    strategy.id,
                    strategy.label(),
                    repr(float(table.ndcg_val[row])),
                    repr(float(table.ndcg_test[row])),
                    repr(float(table.precision_val[row])),
                    repr(float(table.precision_test[row])),
                    table.n_users,
                    table.dataset,
                    table.algorithm,
                    table.repetition,
                ]
            )


def read_score_table(path) -> StrategyScoreTable:
    """Load a score table written by :func:`write_score_table`."""
    path = Path(path)
    strategies: list[SelectionStrategy] = []
    cols: dict[str, list] = {name: [] for name in SCORE_TABLE_FIELDS}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SCORE_TABLE_FIELDS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty score table")
    for row in rows:
        strategies.append(
            SelectionStrategy(int(row["strategy_id"]), tuple(int(i) for i in row["indices"].split("-")))
        )
        for name in ("ndcg_val", "ndcg_test", "prec_val", "prec_test"):
            cols[name].append(float(row[name]))
    last = rows[-1]
    return StrategyScoreTable(
        dataset=last["dataset"],
        algorithm=last["algorithm"],
        repetition=int(last["repetition"]),
        strategies=strategies,
        ndcg_val=np.array(cols["ndcg_val"]),
        ndcg_test=np.array(cols["ndcg_test"]),
        precision_val=np.array(cols["prec_val"]),
        precision_test=np.array(cols["prec_test"]),
        n_users=int(last["users"]),
    )
