"""Experiment configuration: datasets, algorithms, seeds, budgets.

Configs are YAML (JSON works too); dataset paths may be relative to the
``TOPNBENCH_DATA`` environment variable. Every run hashes its canonical
config so cached stages can be validated by content.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .interactions import ColumnSchema
from .tuning import DEFAULT_SPACES, IntUniform, LogUniform, SearchSpace, Uniform

DATA_ROOT_ENV = "TOPNBENCH_DATA"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: str
    schema: ColumnSchema
    feedback: str = "explicit"
    rating_scale_max: Optional[float] = None
    threshold_fraction: float = 0.6
    binarize_inclusive: bool = True
    core_k: int = 5
    domain: str = ""

    def resolved_path(self) -> Path:
        path = Path(self.path)
        root = os.environ.get(DATA_ROOT_ENV)
        if not path.is_absolute() and root:
            return Path(root) / path
        return path


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str  # variant name, e.g. "item_knn_bm25"
    space: SearchSpace


@dataclass
class ExperimentConfig:
    datasets: list[DatasetSpec]
    algorithms: list[AlgorithmSpec]
    seed: int = 42
    k: int = 10
    n: int = 5
    repetitions: int = 5
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    trial_budget: int = 50
    wall_clock_cap: Optional[float] = None
    jobs: int = 1
    output_dir: Path = field(default_factory=lambda: Path("out"))

    def validate(self) -> None:
        if not self.k >= self.n >= 1:
            raise ValueError(f"need k >= n >= 1, got k={self.k}, n={self.n}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.trial_budget < 1:
            raise ValueError("trial_budget must be >= 1")
        if not self.datasets:
            raise ValueError("config lists no datasets")
        if not self.algorithms:
            raise ValueError("config lists no algorithms")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError("dataset names must be unique")
        for dataset in self.datasets:
            if dataset.feedback not in ("explicit", "implicit"):
                raise ValueError(f"{dataset.name}: feedback must be explicit or implicit")
            if dataset.feedback == "explicit" and dataset.rating_scale_max is None:
                raise ValueError(f"{dataset.name}: explicit feedback needs rating_scale_max")
            if not dataset.resolved_path().exists():
                raise FileNotFoundError(
                    f"{dataset.name}: data file {dataset.resolved_path()} not found "
                    f"(set {DATA_ROOT_ENV} or fix the path)"
                )

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(_canonical(self), sort_keys=True).encode()
        ).hexdigest()


def _canonical(obj):
    """Plain-data view of config objects for hashing and manifests."""
    if isinstance(obj, ExperimentConfig):
        return {
            "datasets": [_canonical(d) for d in obj.datasets],
            "algorithms": [_canonical(a) for a in obj.algorithms],
            "seed": obj.seed,
            "k": obj.k,
            "n": obj.n,
            "repetitions": obj.repetitions,
            "ratios": list(obj.ratios),
            "trial_budget": obj.trial_budget,
            "wall_clock_cap": obj.wall_clock_cap,
        }
    if isinstance(obj, DatasetSpec):
        return {
            "name": obj.name,
            "path": str(obj.path),
            "schema": _canonical(obj.schema),
            "feedback": obj.feedback,
            "rating_scale_max": obj.rating_scale_max,
            "threshold_fraction": obj.threshold_fraction,
            "binarize_inclusive": obj.binarize_inclusive,
            "core_k": obj.core_k,
            "domain": obj.domain,
        }
    if isinstance(obj, ColumnSchema):
        return {
            "user": obj.user,
            "item": obj.item,
            "rating": obj.rating,
            "timestamp": obj.timestamp,
            "delimiter": obj.delimiter,
            "header": obj.header,
        }
    if isinstance(obj, AlgorithmSpec):
        return {"name": obj.name, "space": _canonical(obj.space)}
    if isinstance(obj, SearchSpace):
        return {
            "algorithm": obj.algorithm,
            "distributions": {
                name: _canonical(dist) for name, dist in sorted(obj.distributions.items())
            },
            "fixed": dict(sorted(obj.fixed.items())),
        }
    if isinstance(obj, IntUniform):
        return {"kind": "int", "low": obj.low, "high": obj.high}
    if isinstance(obj, Uniform):
        return {"kind": "uniform", "low": obj.low, "high": obj.high}
    if isinstance(obj, LogUniform):
        return {"kind": "loguniform", "low": obj.low, "high": obj.high}
    raise TypeError(f"cannot canonicalize {type(obj)!r}")


def _parse_distribution(raw: dict):
    kinds = {"int": IntUniform, "uniform": Uniform, "loguniform": LogUniform}
    try:
        cls = kinds[raw["kind"]]
    except KeyError:
        raise ValueError(f"distribution needs kind in {sorted(kinds)}: {raw}")
    return cls(raw["low"], raw["high"])


def _parse_algorithm(raw) -> AlgorithmSpec:
    if isinstance(raw, str):
        raw = {"name": raw}
    name = raw["name"]
    if name not in DEFAULT_SPACES:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {sorted(DEFAULT_SPACES)}")
    base = DEFAULT_SPACES[name]
    distributions = dict(base.distributions)
    for pname, dist in (raw.get("space") or {}).items():
        distributions[pname] = _parse_distribution(dist)
    fixed = dict(base.fixed)
    fixed.update(raw.get("fixed") or {})
    return AlgorithmSpec(name, SearchSpace(base.algorithm, distributions, fixed))


def _parse_schema(raw: dict) -> ColumnSchema:
    return ColumnSchema(
        user=raw.get("user", 0),
        item=raw.get("item", 1),
        rating=raw.get("rating"),
        timestamp=raw.get("timestamp"),
        delimiter=raw.get("delimiter", ","),
        header=bool(raw.get("header", False)),
    )


def _parse_dataset(raw: dict) -> DatasetSpec:
    return DatasetSpec(
        name=raw["name"],
        path=raw["path"],
        schema=_parse_schema(raw.get("schema") or {}),
        feedback=raw.get("feedback", "explicit"),
        rating_scale_max=raw.get("rating_scale_max"),
        threshold_fraction=raw.get("threshold_fraction", 0.6),
        binarize_inclusive=bool(raw.get("binarize_inclusive", True)),
        core_k=int(raw.get("core_k", 5)),
        domain=raw.get("domain", ""),
    )


def load_config(path, **overrides) -> ExperimentConfig:
    """Parse a YAML experiment config; keyword overrides win over the file."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    config = ExperimentConfig(
        datasets=[_parse_dataset(d) for d in raw.get("datasets", [])],
        algorithms=[_parse_algorithm(a) for a in raw.get("algorithms", [])],
        seed=int(raw.get("seed", 42)),
        k=int(raw.get("k", 10)),
        n=int(raw.get("n", 5)),
        repetitions=int(raw.get("repetitions", 5)),
        ratios=tuple(raw.get("ratios", (0.6, 0.2, 0.2))),
        trial_budget=int(raw.get("trial_budget", 50)),
        wall_clock_cap=raw.get("wall_clock_cap"),
        jobs=int(raw.get("jobs", 1)),
        output_dir=Path(raw.get("output_dir", "out")),
    )
    for name, value in overrides.items():
        if value is not None:
            setattr(config, name, Path(value) if name == "output_dir" else value)
    return config
