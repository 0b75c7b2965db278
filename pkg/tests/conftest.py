"""Shared fixtures: toy corpora, synthetic datasets, ML-100k discovery."""

import os
from pathlib import Path

import numpy as np
import pytest

from topnbench.interactions import InteractionRecord

REPO_ROOT = Path(__file__).resolve().parent.parent

ML100K_HINT = (
    "MovieLens-100k not found; download ml-100k.zip from "
    "https://files.grouplens.org/datasets/movielens/ml-100k.zip and unpack it so "
    "u.data sits at $TOPNBENCH_DATA/ml-100k/u.data or <repo>/data/ml-100k/u.data"
)


def ml100k_file() -> Path | None:
    roots = []
    if os.environ.get("TOPNBENCH_DATA"):
        roots.append(Path(os.environ["TOPNBENCH_DATA"]))
    roots.append(REPO_ROOT / "data")
    for root in roots:
        candidate = root / "ml-100k" / "u.data"
        if candidate.exists():
            return candidate
    return None


@pytest.fixture(scope="session")
def ml100k_path() -> Path:
    path = ml100k_file()
    if path is None:
        pytest.skip(ML100K_HINT)
    return path


def make_records(pairs, rating=None):
    """Records from (user, item) or (user, item, rating[, timestamp]) tuples."""
    records = []
    for entry in pairs:
        if len(entry) == 2:
            records.append(InteractionRecord(entry[0], entry[1], rating))
        elif len(entry) == 3:
            records.append(InteractionRecord(entry[0], entry[1], entry[2]))
        else:
            records.append(InteractionRecord(*entry))
    return records


def write_synthetic_tsv(
    path: Path,
    n_users: int = 60,
    n_items: int = 50,
    groups: int = 5,
    seed: int = 7,
) -> Path:
    """Explicit-feedback TSV with planted group structure.

    Users in group g mostly rate (and like) items from group g's pool, so
    neighbor models learn a strong, recoverable signal. Ratings are 1-5;
    in-pool items skew 4-5, out-of-pool items skew 1-3.
    """
    rng = np.random.default_rng(seed)
    pool_size = n_items // groups
    lines = []
    for user in range(n_users):
        group = user % groups
        pool = np.arange(group * pool_size, (group + 1) * pool_size)
        others = np.setdiff1d(np.arange(n_items), pool)
        m_in = rng.integers(6, min(10, pool_size) + 1)
        m_out = rng.integers(2, 5)
        in_items = rng.choice(pool, size=min(m_in, pool_size), replace=False)
        out_items = rng.choice(others, size=m_out, replace=False)
        for item in in_items:
            lines.append((user, int(item), int(rng.choice([4, 4, 5, 5, 3])), user * 1000 + int(item)))
        for item in out_items:
            lines.append((user, int(item), int(rng.choice([1, 2, 2, 3])), user * 1000 + int(item)))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for user, item, rating, ts in lines:
            fh.write(f"{user}\t{item}\t{rating}\t{ts}\n")
    return path


def write_experiment_yaml(
    path: Path,
    data_path: Path,
    out_dir: Path,
    algorithms,
    repetitions: int = 1,
    trial_budget: int = 1,
    seed: int = 42,
    jobs: int = 1,
    k: int = 10,
    n: int = 5,
) -> Path:
    import yaml

    path.parent.mkdir(parents=True, exist_ok=True)
    config = {
        "seed": seed,
        "k": k,
        "n": n,
        "repetitions": repetitions,
        "trial_budget": trial_budget,
        "jobs": jobs,
        "output_dir": str(out_dir),
        "datasets": [
            {
                "name": "synthetic",
                "path": str(data_path),
                "domain": "synthetic",
                "feedback": "explicit",
                "rating_scale_max": 5.0,
                "schema": {"user": 0, "item": 1, "rating": 2, "timestamp": 3,
                           "delimiter": "\t", "header": False},
            }
        ],
        "algorithms": algorithms,
    }
    path.write_text(yaml.safe_dump(config))
    return path
