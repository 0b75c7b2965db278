"""End-to-end pipeline: preprocess, split, tune, evaluate, stats, reports.

Stages write their artifacts under the output directory and are cached by
content hash: a stage re-runs only when its inputs (upstream stage keys
plus the relevant config subset) change. Jobs at (dataset, algorithm,
repetition) granularity are independent and may run in a process pool;
all randomness is derived from the root seed through purpose-keyed
streams, so results do not depend on scheduling.
"""

import hashlib
import json
import logging
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._seeding import stream_seed
from .config import AlgorithmSpec, DatasetSpec, ExperimentConfig, _canonical
from .evaluation import EvalContext, StrategyScoreTable, evaluate_strategies, write_score_table
from .interactions import InteractionMatrix, binarize, dump_interactions, k_core, load_dumped, load_interactions
from .metrics import ndcg_at_n
from .recommenders import RecommenderConfig, make_recommender, save_model
from .recommenders.base import rank_items
from .splitting import FoldSplit, split_per_user
from .strategies import enumerate_strategies
from .tuning import random_search, write_trial_log

_logger = logging.getLogger(__name__)

STAGE_ORDER = ("prep", "split", "tune", "eval", "stats", "report")

#: Decision flags recorded in every manifest.
DECISION_FLAGS = {
    "binarize_comparison": "inclusive unless dataset overrides",
    "duplicate_rule": "keep highest rating, ties keep latest timestamp",
    "k_core": "iterate to fixpoint",
    "splits": "independent repetitions with per-(seed, repetition, user) streams",
    "validation_exclusions": "train items",
    "test_exclusions": "train and validation items",
    "empty_relevance_users": "excluded from split averages",
    "tie_breaking": "descending score, ascending item index",
}


def _hash_key(*parts) -> str:
    payload = json.dumps(parts, sort_keys=True, default=str).encode()
    return hashlib.sha256(payload).hexdigest()


def _file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _run_stage(stage_dir: Path, key: str, compute) -> str:
    """Run ``compute`` unless the stage is already cached under ``key``."""
    marker = stage_dir / "stage.json"
    if marker.exists():
        try:
            recorded = json.loads(marker.read_text())
        except json.JSONDecodeError:
            recorded = {}
        if recorded.get("key") == key:
            return "cached"
        shutil.rmtree(stage_dir)
    stage_dir.mkdir(parents=True, exist_ok=True)
    compute(stage_dir)
    marker.write_text(json.dumps({"key": key}, indent=2) + "\n")
    return "computed"


def _stage_key(stage_dir: Path) -> str:
    return json.loads((stage_dir / "stage.json").read_text())["key"]


# ---------------------------------------------------------------------------
# stage paths

def prep_dir(out: Path, dataset: str) -> Path:
    return out / "prep" / dataset


def split_dir(out: Path, dataset: str, rep: int) -> Path:
    return out / "splits" / dataset / f"rep{rep}"


def tune_dir(out: Path, dataset: str, algorithm: str, rep: int) -> Path:
    return out / "tune" / dataset / algorithm / f"rep{rep}"


def eval_dir(out: Path, dataset: str, algorithm: str, rep: int) -> Path:
    return out / "eval" / dataset / algorithm / f"rep{rep}"


# ---------------------------------------------------------------------------
# prep and split stages

def prepare_dataset(dataset: DatasetSpec, out: Path) -> str:
    """Load, binarize (explicit feedback), k-core prune, and dump one dataset."""
    raw_path = dataset.resolved_path()
    key = _hash_key("prep", _file_sha256(raw_path), _canonical(dataset))

    def compute(stage_dir: Path):
        records = load_interactions(raw_path, dataset.schema)
        raw_count = len(records)
        if dataset.feedback == "explicit":
            records = binarize(
                records,
                dataset.threshold_fraction,
                dataset.rating_scale_max,
                dataset.binarize_inclusive,
            )
        binarized_count = len(records)
        records = k_core(records, dataset.core_k)
        if not records:
            raise ValueError(f"{dataset.name}: empty {dataset.core_k}-core")
        matrix = InteractionMatrix.from_records(records)
        dump_interactions(
            matrix,
            stage_dir / "interactions.csv",
            manifest={
                "dataset": dataset.name,
                "raw_records": raw_count,
                "after_binarize": binarized_count,
                "core_k": dataset.core_k,
                "threshold_fraction": dataset.threshold_fraction,
                "binarize_inclusive": dataset.binarize_inclusive,
                "feedback": dataset.feedback,
                "sparsity": 1.0 - matrix.nnz / (matrix.n_users * matrix.n_items),
            },
        )

    return _run_stage(prep_dir(out, dataset.name), key, compute)


def _split_seed(config: ExperimentConfig, dataset: str) -> int:
    return stream_seed(config.seed, "split", dataset)


def _load_fold(config: ExperimentConfig, dataset: DatasetSpec, rep: int) -> FoldSplit:
    matrix = load_dumped(prep_dir(config.output_dir, dataset.name) / "interactions.csv")
    return split_per_user(matrix, config.ratios, _split_seed(config, dataset.name), rep)


def build_split(config: ExperimentConfig, dataset: DatasetSpec, rep: int) -> str:
    """Materialize one repetition's split as canonical CSV dumps."""
    out = config.output_dir
    prep_key = _stage_key(prep_dir(out, dataset.name))
    key = _hash_key("split", prep_key, _split_seed(config, dataset.name), list(config.ratios), rep)

    def compute(stage_dir: Path):
        fold = _load_fold(config, dataset, rep)
        for part in ("train", "validation", "test"):
            dump_interactions(
                getattr(fold, part),
                stage_dir / f"{part}.csv",
                manifest={"dataset": dataset.name, "repetition": rep, "part": part},
            )

    return _run_stage(split_dir(out, dataset.name, rep), key, compute)


# ---------------------------------------------------------------------------
# tune + eval jobs

def _exclusions(fold: FoldSplit, user: int, split: str) -> np.ndarray:
    train_items = fold.train.row_items(user)
    if split == "val":
        return train_items
    return np.concatenate([train_items, fold.validation.row_items(user)])


def _mean_topn_ndcg(model, fold: FoldSplit, n: int) -> float:
    """Conventional nDCG@n on validation: the tuning objective."""
    relevance = {
        u: set(map(int, fold.validation.row_items(u))) for u in range(fold.train.n_users)
    }
    users = sorted(u for u in relevance if relevance[u])
    if not users:
        raise ValueError("no users with validation relevance")
    values = []
    for user in users:
        items, _ = rank_items(model.score_user(user), n, _exclusions(fold, user, "val"))
        values.append(ndcg_at_n(list(items), relevance[user], n))
    return float(np.mean(values))


def _build_contexts(model, fold: FoldSplit, k: int, n: int) -> tuple[EvalContext, EvalContext]:
    val_pred, test_pred, val_rel, test_rel = {}, {}, {}, {}
    for user in range(fold.train.n_users):
        scores = model.score_user(user)
        items_val, _ = rank_items(scores, k, _exclusions(fold, user, "val"))
        items_test, _ = rank_items(scores, k, _exclusions(fold, user, "test"))
        val_pred[user] = tuple(int(i) for i in items_val)
        test_pred[user] = tuple(int(i) for i in items_test)
        val_rel[user] = set(map(int, fold.validation.row_items(user)))
        test_rel[user] = set(map(int, fold.test.row_items(user)))
    return (
        EvalContext(k, n, val_pred, val_rel),
        EvalContext(k, n, test_pred, test_rel),
    )


@dataclass
class JobSpec:
    config: ExperimentConfig
    dataset: DatasetSpec
    algorithm: AlgorithmSpec
    rep: int
    do_eval: bool

    @property
    def job_id(self) -> str:
        return f"{self.dataset.name}/{self.algorithm.name}/rep{self.rep}"


def run_job(job: JobSpec) -> dict:
    """Tune (and optionally evaluate) one (dataset, algorithm, repetition)."""
    config, dataset, algo, rep = job.config, job.dataset, job.algorithm, job.rep
    out = config.output_dir
    result: dict = {}
    try:
        prep_key = _stage_key(prep_dir(out, dataset.name))
        search_seed = stream_seed(config.seed, "search", dataset.name, algo.name, rep)
        model_seed = stream_seed(config.seed, "model", dataset.name, algo.name, rep)
        tune_key = _hash_key(
            "tune", prep_key, _split_seed(config, dataset.name), list(config.ratios),
            rep, _canonical(algo), config.trial_budget, config.wall_clock_cap,
            config.n, search_seed, model_seed,
        )
        fold = None

        def compute_tune(stage_dir: Path):
            nonlocal fold
            fold = _load_fold(config, dataset, rep)

            def objective(rec_config: RecommenderConfig) -> float:
                model = make_recommender(rec_config).fit(fold.train)
                return _mean_topn_ndcg(model, fold, config.n)

            best, log = random_search(
                algo.space,
                config.trial_budget,
                objective,
                seed=search_seed,
                model_seed=model_seed,
                wall_clock_cap=config.wall_clock_cap,
            )
            write_trial_log(log, algo.name, stage_dir / "trials.csv")
            (stage_dir / "best.json").write_text(
                json.dumps(
                    {
                        "algorithm": best.algorithm,
                        "variant": algo.name,
                        "params": dict(best.params),
                        "seed": best.seed,
                        "val_ndcg": log.best.score,
                        "trials": len(log.trials),
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n"
            )

        result["tune"] = _run_stage(tune_dir(out, dataset.name, algo.name, rep), tune_key, compute_tune)

        if job.do_eval:
            eval_key = _hash_key("eval", tune_key, config.k, config.n)

            def compute_eval(stage_dir: Path):
                best_raw = json.loads(
                    (tune_dir(out, dataset.name, algo.name, rep) / "best.json").read_text()
                )
                best = RecommenderConfig(
                    best_raw["algorithm"], best_raw["params"], best_raw["seed"]
                )
                local_fold = fold if fold is not None else _load_fold(config, dataset, rep)
                model = make_recommender(best).fit(local_fold.train)
                save_model(model, stage_dir / "model.npz")
                strategies = enumerate_strategies(config.k, config.n)
                val_ctx, test_ctx = _build_contexts(model, local_fold, config.k, config.n)
                table = StrategyScoreTable.from_splits(
                    strategies,
                    evaluate_strategies(val_ctx, strategies),
                    evaluate_strategies(test_ctx, strategies),
                    dataset=dataset.name,
                    algorithm=algo.name,
                    repetition=rep,
                )
                write_score_table(table, stage_dir / "scores.csv")

            result["eval"] = _run_stage(
                eval_dir(out, dataset.name, algo.name, rep), eval_key, compute_eval
            )
        result["status"] = "ok"
    except Exception as exc:
        _logger.exception("job %s failed", job.job_id)
        result["status"] = "failed"
        result["error"] = f"{type(exc).__name__}: {exc}"
    return result


def _worker(job: JobSpec) -> tuple[str, dict]:
    return job.job_id, run_job(job)


# ---------------------------------------------------------------------------
# orchestration

def run_pipeline(config: ExperimentConfig, until: str = "report") -> dict:
    """Run all stages up to ``until`` and write the run manifest.

    Returns the manifest dict; ``manifest["ok"]`` is False when any stage
    failed (independent jobs still continue).
    """
    if until not in STAGE_ORDER:
        raise ValueError(f"unknown stage {until!r}; expected one of {STAGE_ORDER}")
    level = STAGE_ORDER.index(until)
    config.validate()
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    clock = time.perf_counter()

    stages: dict[str, dict] = {}
    ok = True

    for dataset in config.datasets:
        try:
            status = prepare_dataset(dataset, out)
            stages[f"prep/{dataset.name}"] = {"status": status}
        except Exception as exc:
            _logger.exception("prep failed for %s", dataset.name)
            stages[f"prep/{dataset.name}"] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
            ok = False

    if level >= STAGE_ORDER.index("split"):
        for dataset in config.datasets:
            if stages[f"prep/{dataset.name}"]["status"] == "failed":
                continue
            for rep in range(config.repetitions):
                try:
                    status = build_split(config, dataset, rep)
                    stages[f"split/{dataset.name}/rep{rep}"] = {"status": status}
                except Exception as exc:
                    _logger.exception("split failed for %s rep %d", dataset.name, rep)
                    stages[f"split/{dataset.name}/rep{rep}"] = {
                        "status": "failed",
                        "error": f"{type(exc).__name__}: {exc}",
                    }
                    ok = False

    if level >= STAGE_ORDER.index("tune"):
        do_eval = level >= STAGE_ORDER.index("eval")
        jobs = [
            JobSpec(config, dataset, algorithm, rep, do_eval)
            for dataset in config.datasets
            if stages[f"prep/{dataset.name}"]["status"] != "failed"
            for algorithm in config.algorithms
            for rep in range(config.repetitions)
        ]
        if config.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                results = list(pool.map(_worker, jobs))
        else:
            results = [_worker(job) for job in jobs]
        for job_id, record in results:  # submission order: deterministic manifest
            stages[f"job/{job_id}"] = record
            if record["status"] != "ok":
                ok = False

    if level >= STAGE_ORDER.index("stats"):
        from .reports import emit_reports, write_stats  # late import avoids a cycle

        try:
            write_stats(config)
        except Exception as exc:
            _logger.exception("stats stage failed")
            stages["stats"] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
            ok = False
        else:
            stages["stats"] = {"status": "computed"}

        if level >= STAGE_ORDER.index("report"):
            try:
                emit_reports(config)
            except Exception as exc:
                _logger.exception("report stage failed")
                stages["report"] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
                ok = False
            else:
                stages["report"] = {"status": "computed"}

    manifest = {
        "version": __version__,
        "config_hash": config.config_hash(),
        "config": _canonical(config),
        "decisions": DECISION_FLAGS,
        "datasets": _dataset_stats(config),
        "stages": stages,
        "ok": ok,
        "timestamps": {
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "elapsed_seconds": round(time.perf_counter() - clock, 3),
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _dataset_stats(config: ExperimentConfig) -> dict:
    stats = {}
    for dataset in config.datasets:
        sidecar = prep_dir(config.output_dir, dataset.name) / "interactions.json"
        if sidecar.exists():
            stats[dataset.name] = json.loads(sidecar.read_text())
    return stats
