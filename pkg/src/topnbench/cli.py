"""Command-line interface for the benchmark pipeline."""

import logging
import sys

import click

from .config import load_config
from .pipeline import run_pipeline

_STAGE_HELP = {
    "prep": "Load, binarize, and k-core prune the configured datasets.",
    "split": "Materialize the per-user train/validation/test splits.",
    "tune": "Random-search hyperparameters per (dataset, algorithm, repetition).",
    "eval": "Retrain best configs and score all selection strategies.",
    "stats": "Friedman/Nemenyi/Pearson analysis of the score tables.",
    "report": "Emit plot-ready CSVs and the stats JSON.",
}


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose):
    """Benchmark top-n selection strategies for recommender evaluation."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _stage_command(stage: str, name: str, help_text: str):
    @click.option("--config", "config_path", required=True, type=click.Path(exists=True),
                  help="Experiment config (YAML).")
    @click.option("--seed", type=int, default=None, help="Override the root seed.")
    @click.option("--jobs", type=int, default=None, help="Worker processes for tune/eval jobs.")
    @click.option("--out", type=click.Path(), default=None, help="Override the output directory.")
    def command(config_path, seed, jobs, out):
        config = load_config(config_path, seed=seed, jobs=jobs, output_dir=out)
        manifest = run_pipeline(config, until=stage)
        _summarize(manifest)
        if not manifest["ok"]:
            sys.exit(1)

    command.__name__ = name.replace("-", "_")
    command.__doc__ = help_text
    return command


def _summarize(manifest):
    counts = {}
    for record in manifest["stages"].values():
        counts[record["status"]] = counts.get(record["status"], 0) + 1
    summary = ", ".join(f"{n} {status}" for status, n in sorted(counts.items()))
    click.echo(f"stages: {summary}")
    for name, record in manifest["stages"].items():
        if record["status"] == "failed":
            click.echo(f"FAILED {name}: {record.get('error', '')}", err=True)


for _stage in ("prep", "split", "tune", "eval", "stats", "report"):
    main.command(name=_stage)(_stage_command(_stage, _stage, _STAGE_HELP[_stage]))
main.command(name="run-all")(
    _stage_command("report", "run-all", "Run the full pipeline end to end.")
)


if __name__ == "__main__":
    main()
