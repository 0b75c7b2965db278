"""Random-search hyperparameter optimization with reproducible trial logs."""

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional

import numpy as np

from ._seeding import stream_rng
from .recommenders import RecommenderConfig

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntUniform:
    """Uniform integer draw from [low, high) — half-open like ``range``."""

    low: int
    high: int

    def __post_init__(self):
        _check_bounds(self.low, self.high)

    def sample(self, rng: np.random.Generator):
        return int(rng.integers(self.low, self.high))


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        _check_bounds(self.low, self.high)

    def sample(self, rng: np.random.Generator):
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class LogUniform:
    low: float
    high: float

    def __post_init__(self):
        _check_bounds(self.low, self.high)
        if self.low <= 0:
            raise ValueError("log-uniform bounds must be positive")

    def sample(self, rng: np.random.Generator):
        return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))


def _check_bounds(low, high):
    if not (math.isfinite(low) and math.isfinite(high)):
        raise ValueError("distribution bounds must be finite")
    if not low < high:
        raise ValueError(f"need low < high, got [{low}, {high})")


@dataclass(frozen=True)
class SearchSpace:
    """Per-hyperparameter distributions plus fixed parameters for one algorithm."""

    algorithm: str
    distributions: Mapping[str, object] = field(default_factory=dict)
    fixed: Mapping[str, object] = field(default_factory=dict)


#: Documented default spaces per algorithm variant; override via experiment config.
DEFAULT_SPACES: dict[str, SearchSpace] = {
    "als": SearchSpace(
        "als",
        {
            "factors": IntUniform(16, 129),
            "regularization": LogUniform(1e-3, 1.0),
            "confidence_alpha": Uniform(1.0, 100.0),
            "iterations": IntUniform(10, 31),
        },
    ),
    "bpr": SearchSpace(
        "bpr",
        {
            "factors": IntUniform(16, 129),
            "learning_rate": LogUniform(1e-4, 0.1),
            "regularization": LogUniform(1e-4, 0.1),
            "epochs": IntUniform(10, 101),
        },
    ),
    "item_knn_cosine": SearchSpace(
        "item_knn", {"neighbors": IntUniform(5, 101)}, {"weighting": "none"}
    ),
    "item_knn_tfidf": SearchSpace(
        "item_knn", {"neighbors": IntUniform(5, 101)}, {"weighting": "tfidf"}
    ),
    "item_knn_bm25": SearchSpace(
        "item_knn",
        {
            "neighbors": IntUniform(5, 101),
            "bm25_k1": Uniform(0.5, 3.0),
            "bm25_b": Uniform(0.0, 1.0),
        },
        {"weighting": "bm25"},
    ),
    "user_knn": SearchSpace("user_knn", {"neighbors": IntUniform(5, 101)}),
    "popularity": SearchSpace("popularity"),
    "random": SearchSpace("random"),
}


def sample_config(space: SearchSpace, rng: np.random.Generator, seed: int = 0) -> RecommenderConfig:
    """Draw each hyperparameter independently from its distribution.

    Parameters are sampled in sorted name order so the draw sequence does
    not depend on mapping insertion order.
    """
    params = dict(space.fixed)
    for name in sorted(space.distributions):
        params[name] = space.distributions[name].sample(rng)
    return RecommenderConfig(space.algorithm, params, seed)


@dataclass
class Trial:
    index: int
    config: RecommenderConfig
    score: float
    seconds: float
    error: Optional[str] = None


@dataclass
class TrialLog:
    trials: list[Trial]
    best_index: int

    @property
    def best(self) -> Trial:
        return self.trials[self.best_index]


def random_search(
    space: SearchSpace,
    budget: int,
    objective: Callable[[RecommenderConfig], float],
    seed: int = 0,
    model_seed: int = 0,
    wall_clock_cap: Optional[float] = None,
) -> tuple[RecommenderConfig, TrialLog]:
    """Evaluate ``budget`` sampled configs and return the validation argmax.

    The config sequence is pre-generated from the seed, so it cannot depend
    on evaluation timing. A failing objective marks the trial with score
    -inf and the search continues. Ties keep the earliest trial.
    ``wall_clock_cap`` (seconds) is an optional secondary stop condition.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = stream_rng(seed, "search", space.algorithm)
    configs = [sample_config(space, rng, model_seed) for _ in range(budget)]

    trials: list[Trial] = []
    started = time.perf_counter()
    for index, config in enumerate(configs):
        t0 = time.perf_counter()
        try:
            score = float(objective(config))
            error = None
        except Exception as exc:  # failed trial, not a failed search
            score = -np.inf
            error = f"{type(exc).__name__}: {exc}"
            _logger.warning("trial %d failed: %s", index, error)
        trials.append(Trial(index, config, score, time.perf_counter() - t0, error))
        if wall_clock_cap is not None and time.perf_counter() - started > wall_clock_cap:
            _logger.info("wall clock cap hit after %d/%d trials", index + 1, budget)
            break

    best_index = 0
    for trial in trials:
        if trial.score > trials[best_index].score:
            best_index = trial.index
    log = TrialLog(trials, best_index)
    return log.best.config, log


def write_trial_log(log: TrialLog, algorithm: str, path) -> None:
    """Persist trials as CSV: trial, algorithm, hyperparameters, val_ndcg, seconds."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "algorithm", "hyperparameters", "val_ndcg", "seconds"])
        for trial in log.trials:
            writer.writerow(
                [
                    trial.index,
                    algorithm,
                    json.dumps(dict(trial.config.params), sort_keys=True),
                    repr(trial.score),
                    f"{trial.seconds:.3f}",
                ]
            )
