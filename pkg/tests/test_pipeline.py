import csv
import hashlib
import json
import shutil

import pytest
from click.testing import CliRunner

from topnbench.cli import main
from topnbench.config import load_config
from topnbench.evaluation import read_score_table
from topnbench.pipeline import eval_dir, run_pipeline, tune_dir

from conftest import write_experiment_yaml, write_synthetic_tsv


@pytest.fixture(scope="module")
def synthetic_tsv(tmp_path_factory):
    return write_synthetic_tsv(tmp_path_factory.mktemp("data") / "synthetic.tsv")


def make_config(tmp_path, synthetic_tsv, **kwargs):
    defaults = dict(algorithms=["popularity"], repetitions=1, trial_budget=1)
    defaults.update(kwargs)
    path = write_experiment_yaml(tmp_path / "exp.yaml", synthetic_tsv, tmp_path / "out", **defaults)
    return load_config(path)


def tree_digest(root, pattern):
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob(pattern))
    }


def test_minimal_run_produces_one_of_everything(tmp_path, synthetic_tsv):
    config = make_config(tmp_path, synthetic_tsv)
    manifest = run_pipeline(config)
    assert manifest["ok"]

    trials = list(csv.DictReader(open(tune_dir(config.output_dir, "synthetic", "popularity", 0) / "trials.csv")))
    assert len(trials) == 1

    table = read_score_table(eval_dir(config.output_dir, "synthetic", "popularity", 0) / "scores.csv")
    assert len(table.strategies) == 252

    stats = json.loads((config.output_dir / "reports" / "stats.json").read_text())
    assert list(stats) == ["popularity"]
    # single (dataset, repetition) block: rank tests need >= 2, noted not crashed
    assert stats["popularity"]["friedman"] is None


def test_id0_column_equals_reported_best_validation_score(tmp_path, synthetic_tsv):
    config = make_config(
        tmp_path, synthetic_tsv, algorithms=["item_knn_cosine"], trial_budget=3
    )
    assert run_pipeline(config)["ok"]
    best = json.loads((tune_dir(config.output_dir, "synthetic", "item_knn_cosine", 0) / "best.json").read_text())
    table = read_score_table(eval_dir(config.output_dir, "synthetic", "item_knn_cosine", 0) / "scores.csv")
    assert table.ndcg_val[0] == best["val_ndcg"]  # bitwise: same floats, same reduction


def test_rerun_hits_cache_and_outputs_unchanged(tmp_path, synthetic_tsv):
    config = make_config(tmp_path, synthetic_tsv, algorithms=["popularity", "random"], repetitions=2)
    first = run_pipeline(config)
    before = tree_digest(config.output_dir, "*.csv")
    second = run_pipeline(config)
    after = tree_digest(config.output_dir, "*.csv")
    assert before == after
    assert all(
        record["status"] == "computed"
        for name, record in first["stages"].items()
        if name.startswith(("prep", "split"))
    )
    assert all(
        record["status"] == "cached"
        for name, record in second["stages"].items()
        if name.startswith(("prep", "split"))
    )
    assert all(
        record.get("tune") == "cached" and record.get("eval") == "cached"
        for name, record in second["stages"].items()
        if name.startswith("job/")
    )


def test_config_change_invalidates_dependent_stages(tmp_path, synthetic_tsv):
    config = make_config(tmp_path, synthetic_tsv)
    run_pipeline(config)
    config.trial_budget = 2  # tuning input changed; prep/split untouched
    manifest = run_pipeline(config)
    record = manifest["stages"]["job/synthetic/popularity/rep0"]
    assert record["tune"] == "computed"
    assert manifest["stages"]["prep/synthetic"]["status"] == "cached"


def test_worker_count_does_not_change_outputs(tmp_path, synthetic_tsv):
    serial = make_config(tmp_path / "serial", synthetic_tsv, algorithms=["popularity", "item_knn_cosine"], repetitions=2)
    serial.jobs = 1
    parallel = make_config(tmp_path / "parallel", synthetic_tsv, algorithms=["popularity", "item_knn_cosine"], repetitions=2)
    parallel.jobs = 4
    assert run_pipeline(serial)["ok"]
    assert run_pipeline(parallel)["ok"]
    assert tree_digest(serial.output_dir, "scores.csv") == tree_digest(parallel.output_dir, "scores.csv")
    m_serial = json.loads((serial.output_dir / "manifest.json").read_text())
    m_parallel = json.loads((parallel.output_dir / "manifest.json").read_text())
    m_serial.pop("timestamps")
    m_parallel.pop("timestamps")
    assert m_serial == m_parallel


def test_report_regeneration_is_pure(tmp_path, synthetic_tsv):
    config = make_config(tmp_path, synthetic_tsv, algorithms=["popularity", "random"])
    run_pipeline(config)
    reports = config.output_dir / "reports"
    live = tree_digest(reports, "*.*")
    shutil.rmtree(reports)
    from topnbench.reports import emit_reports

    emit_reports(config)
    assert tree_digest(reports, "*.*") == live


def test_failed_dataset_does_not_stop_others(tmp_path, synthetic_tsv):
    # Second dataset is too sparse to survive five-core pruning.
    sparse = tmp_path / "sparse.tsv"
    sparse.write_text("".join(f"{u}\t{u}\t5\t0\n" for u in range(20)))
    config = make_config(tmp_path, synthetic_tsv)
    from topnbench.config import DatasetSpec

    config.datasets.append(
        DatasetSpec(
            name="sparse",
            path=str(sparse),
            schema=config.datasets[0].schema,
            feedback="explicit",
            rating_scale_max=5.0,
        )
    )
    manifest = run_pipeline(config)
    assert not manifest["ok"]
    assert manifest["stages"]["prep/sparse"]["status"] == "failed"
    assert "empty" in manifest["stages"]["prep/sparse"]["error"]
    assert manifest["stages"]["prep/synthetic"]["status"] == "computed"
    assert manifest["stages"]["job/synthetic/popularity/rep0"]["status"] == "ok"


def test_until_prep_stops_early(tmp_path, synthetic_tsv):
    config = make_config(tmp_path, synthetic_tsv)
    manifest = run_pipeline(config, until="prep")
    assert manifest["ok"]
    assert list(manifest["stages"]) == ["prep/synthetic"]
    assert not (config.output_dir / "tune").exists()


def test_validation_rejects_bad_config(tmp_path, synthetic_tsv):
    config = make_config(tmp_path, synthetic_tsv)
    config.n = 20  # n > k
    with pytest.raises(ValueError, match="k >= n"):
        run_pipeline(config)


class TestCli:
    def test_run_all_exit_zero(self, tmp_path, synthetic_tsv):
        cfg = write_experiment_yaml(
            tmp_path / "exp.yaml", synthetic_tsv, tmp_path / "out",
            algorithms=["popularity"], repetitions=1, trial_budget=1,
        )
        result = CliRunner().invoke(main, ["run-all", "--config", str(cfg)])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "manifest.json").exists()
        assert "stages:" in result.output

    def test_out_and_seed_overrides(self, tmp_path, synthetic_tsv):
        cfg = write_experiment_yaml(
            tmp_path / "exp.yaml", synthetic_tsv, tmp_path / "out",
            algorithms=["popularity"], repetitions=1, trial_budget=1, seed=1,
        )
        result = CliRunner().invoke(
            main,
            ["prep", "--config", str(cfg), "--out", str(tmp_path / "alt"), "--seed", "9"],
        )
        assert result.exit_code == 0, result.output
        manifest = json.loads((tmp_path / "alt" / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 9

    def test_failure_exits_nonzero(self, tmp_path, synthetic_tsv):
        sparse = tmp_path / "sparse.tsv"
        sparse.write_text("".join(f"{u}\t{u}\t5\t0\n" for u in range(20)))
        cfg = write_experiment_yaml(
            tmp_path / "exp.yaml", sparse, tmp_path / "out",
            algorithms=["popularity"], repetitions=1, trial_budget=1,
        )
        result = CliRunner().invoke(main, ["run-all", "--config", str(cfg)])
        assert result.exit_code == 1

    def test_subcommands_registered(self):
        result = CliRunner().invoke(main, ["--help"])
        for name in ("prep", "split", "tune", "eval", "stats", "report", "run-all"):
            assert name in result.output
