"""Command-line entry points for the clause recommendation pipeline.

Commands mirror the pipeline stages — ``ingest``, ``build-index``,
``train-classifier``, ``train-generator``, ``evaluate``, ``recommend``,
``serve`` — and are idempotent: a stage whose artifacts already match its
inputs reports "artifact up to date" and does nothing.
"""

from __future__ import annotations

import logging

import click

from ..corpus import CorpusError
from ..encoding import EncodingError, EncoderTransportError
from ..generation import GenerationError
from ..relevance import RelevanceError
from ..retrieval import RetrievalError
from .config import ConfigError, PipelineConfig
from .pipeline import (
    ALL_METHODS,
    PipelineError,
    resolve_store,
    run_build_index,
    run_evaluate,
    run_ingest,
    run_recommend,
    run_train_classifier,
    run_train_generator,
)

_APP_ERRORS = (
    PipelineError,
    ConfigError,
    CorpusError,
    EncodingError,
    EncoderTransportError,
    GenerationError,
    RelevanceError,
    RetrievalError,
)


def _fail_on_app_errors(func):
    """Convert pipeline errors into clean CLI failures (exit code 1)."""

    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except _APP_ERRORS as err:
            raise click.ClickException(str(err)) from err

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Path to the pipeline configuration JSON.",
)
@click.option(
    "--artifacts",
    "artifact_root",
    type=click.Path(file_okay=False),
    default=None,
    help="Artifact root directory (overrides the CLAUSEKIT_ARTIFACTS environment variable).",
)
@click.option("--seed", type=int, default=None, help="Override the configured random seed.")
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
@click.pass_context
@_fail_on_app_errors
def main(ctx, config_path, artifact_root, seed, verbose):
    """Two-stage contract clause recommendation pipeline."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)
    config = PipelineConfig.from_file(config_path)
    if seed is not None:
        merged = config.to_dict()
        merged["seed"] = seed
        config = PipelineConfig.from_dict(merged)
    ctx.obj = {"config": config, "store": resolve_store(artifact_root)}


def _targets_or_default(config: PipelineConfig, targets) -> tuple:
    return tuple(targets) if targets else config.targets


@main.command()
@click.pass_obj
@_fail_on_app_errors
def ingest(obj):
    """Parse and normalize the configured corpus into the artifact store."""
    run_ingest(obj["config"], obj["store"], echo=click.echo)


@main.command("build-index")
@click.pass_obj
@_fail_on_app_errors
def build_index(obj):
    """Fit the encoder and build representations, incidence, and similarities."""
    run_build_index(obj["config"], obj["store"], echo=click.echo)


@main.command("train-classifier")
@click.option("--target", "targets", multiple=True, help="Clause type(s) to train; defaults to all configured targets.")
@click.pass_obj
@_fail_on_app_errors
def train_classifier_cmd(obj, targets):
    """Train the per-type relevance classifier(s)."""
    for target in _targets_or_default(obj["config"], targets):
        run_train_classifier(obj["config"], obj["store"], target, echo=click.echo)


@main.command("train-generator")
@click.option("--target", "targets", multiple=True, help="Clause type(s) to train; defaults to all configured targets.")
@click.pass_obj
@_fail_on_app_errors
def train_generator_cmd(obj, targets):
    """Train the per-type clause generator(s)."""
    for target in _targets_or_default(obj["config"], targets):
        run_train_generator(obj["config"], obj["store"], target, echo=click.echo)


@main.command()
@click.option("--target", "targets", multiple=True, help="Clause type(s) to evaluate; defaults to all configured targets.")
@click.option(
    "--method",
    "methods",
    multiple=True,
    type=click.Choice(ALL_METHODS),
    help="Method(s) to evaluate; defaults to every method with available artifacts.",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report JSON output path.")
@click.pass_obj
@_fail_on_app_errors
def evaluate(obj, targets, methods, out):
    """Evaluate relevance and generation methods on held-out test splits."""
    run_evaluate(
        obj["config"],
        obj["store"],
        targets=_targets_or_default(obj["config"], targets),
        methods=list(methods) or None,
        out=out,
        echo=click.echo,
    )


@main.command()
@click.argument("contract_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Clause type to recommend.")
@click.option("--top-n", type=int, default=5, show_default=True, help="Number of clauses to retrieve.")
@click.option(
    "--variant",
    type=click.Choice(["i", "ii"]),
    default="ii",
    show_default=True,
    help="Retrieval query: contract representation only (i) or averaged with the type representation (ii).",
)
@click.pass_obj
@_fail_on_app_errors
def recommend(obj, contract_path, target, top_n, variant):
    """Recommend clauses of --target type for the contract in CONTRACT_PATH."""
    run_recommend(
        obj["config"],
        obj["store"],
        contract_path,
        target,
        top_n=top_n,
        variant=variant,
        echo=click.echo,
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option(
    "--snapshot",
    type=click.Path(dir_okay=False),
    default=None,
    help="JSONL file to persist session snapshots to on shutdown.",
)
@click.pass_obj
@_fail_on_app_errors
def serve(obj, host, port, snapshot):
    """Serve the authoring HTTP API over the built artifacts."""
    import uvicorn

    from .service import create_app
    from .pipeline import load_bundle

    bundle = load_bundle(obj["config"], obj["store"])
    app = create_app(bundle, snapshot_path=snapshot)
    click.echo(f"serving on http://{host}:{port} (config {obj['config'].fingerprint[:12]}...)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
