import csv
import math

import numpy as np
import pytest

from topnbench._seeding import stream_rng
from topnbench.tuning import (
    DEFAULT_SPACES,
    IntUniform,
    LogUniform,
    SearchSpace,
    Uniform,
    random_search,
    sample_config,
    write_trial_log,
)


class TestDistributions:
    def test_bounds_validation(self):
        with pytest.raises(ValueError):
            IntUniform(5, 5)
        with pytest.raises(ValueError):
            Uniform(2.0, 1.0)
        with pytest.raises(ValueError):
            LogUniform(0.0, 1.0)
        with pytest.raises(ValueError):
            Uniform(0.0, math.inf)

    def test_degenerate_int_range_always_same_value(self):
        dist = IntUniform(7, 8)
        rng = stream_rng(0, "t")
        assert {dist.sample(rng) for _ in range(50)} == {7}

    def test_samples_respect_bounds(self):
        rng = stream_rng(1, "t")
        for dist, low, high in [
            (IntUniform(3, 9), 3, 9),
            (Uniform(0.5, 2.5), 0.5, 2.5),
            (LogUniform(1e-3, 1.0), 1e-3, 1.0),
        ]:
            values = [dist.sample(rng) for _ in range(200)]
            assert min(values) >= low
            assert max(values) < high

    def test_log_uniform_median(self):
        # True median of log-uniform [1e-3, 1] is 10**-1.5 ~= 3.16e-2.
        dist = LogUniform(1e-3, 1.0)
        rng = stream_rng(123, "median")
        values = [dist.sample(rng) for _ in range(10_000)]
        assert 2.5e-2 <= float(np.median(values)) <= 4.0e-2


class TestSampleConfig:
    def test_same_seed_gives_identical_sequence(self):
        space = DEFAULT_SPACES["als"]
        seq_a = [sample_config(space, stream_rng(9, "s"), 1) for _ in range(5)]
        seq_b = [sample_config(space, stream_rng(9, "s"), 1) for _ in range(5)]
        assert [c.params for c in seq_a] == [c.params for c in seq_b]

    def test_fixed_params_flow_through(self):
        config = sample_config(DEFAULT_SPACES["item_knn_bm25"], stream_rng(0, "s"))
        assert config.algorithm == "item_knn"
        assert config.params["weighting"] == "bm25"
        assert 5 <= config.params["neighbors"] <= 100

    def test_defaults_within_declared_bounds(self):
        for name, space in DEFAULT_SPACES.items():
            rng = stream_rng(4, "bounds", name)
            for _ in range(20):
                config = sample_config(space, rng)
                for pname, dist in space.distributions.items():
                    assert dist.low <= config.params[pname] < dist.high


ONE_D = SearchSpace("random", {"x": Uniform(0.0, 1.0)})


class TestRandomSearch:
    def test_budget_one_returns_single_config(self):
        best, log = random_search(ONE_D, 1, lambda c: 0.5, seed=1)
        assert len(log.trials) == 1
        assert log.best_index == 0
        assert best is log.trials[0].config

    def test_constant_objective_keeps_first_trial(self):
        best, log = random_search(ONE_D, 10, lambda c: 0.7, seed=2)
        assert log.best_index == 0

    def test_best_score_dominates_log(self):
        best, log = random_search(ONE_D, 25, lambda c: c.params["x"] ** 2, seed=3)
        assert all(log.best.score >= t.score for t in log.trials)

    def test_failed_trials_score_minus_inf_and_search_continues(self):
        def objective(config):
            if config.params["x"] < 0.5:
                raise RuntimeError("boom")
            return config.params["x"]

        best, log = random_search(ONE_D, 20, objective, seed=4)
        failed = [t for t in log.trials if t.error]
        assert failed and all(t.score == -np.inf for t in failed)
        assert len(log.trials) == 20
        assert best.params["x"] >= 0.5

    def test_rerun_reproduces_log_exactly(self):
        obj = lambda c: math.sin(13 * c.params["x"])
        _, log_a = random_search(ONE_D, 15, obj, seed=5)
        _, log_b = random_search(ONE_D, 15, obj, seed=5)
        assert [t.config.params for t in log_a.trials] == [t.config.params for t in log_b.trials]
        assert [t.score for t in log_a.trials] == [t.score for t in log_b.trials]

    def test_budget_200_lands_in_top_two_percent(self):
        # Objective has a single interior optimum; compare against a dense grid.
        func = lambda x: -((x - 0.345) ** 2)
        best, log = random_search(
            ONE_D, 200, lambda c: func(c.params["x"]), seed=6
        )
        grid = np.array([func(x) for x in np.linspace(0.0, 1.0, 50_001)])
        threshold = np.quantile(grid, 0.98)
        assert log.best.score >= threshold

    def test_invalid_budget(self):
        with pytest.raises(ValueError):
            random_search(ONE_D, 0, lambda c: 0.0)


def test_trial_log_csv_format(tmp_path):
    _, log = random_search(ONE_D, 3, lambda c: c.params["x"], seed=7)
    path = tmp_path / "trials.csv"
    write_trial_log(log, "random", path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert set(rows[0]) == {"trial", "algorithm", "hyperparameters", "val_ndcg", "seconds"}
    assert rows[1]["trial"] == "1"
    assert float(rows[2]["val_ndcg"]) == log.trials[2].score
