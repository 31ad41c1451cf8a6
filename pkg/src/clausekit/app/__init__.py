"""Application layer: pipeline configuration, artifact store, CLI, and HTTP service."""

from .config import (
    ARTIFACT_ROOT_ENV,
    DEFAULT_ARTIFACT_ROOT,
    ConfigError,
    PipelineConfig,
)
from .pipeline import (
    ALL_METHODS,
    GENERATION_METHODS,
    RELEVANCE_METHODS,
    ArtifactStore,
    PipelineError,
    ServingBundle,
    load_bundle,
    resolve_store,
    run_build_index,
    run_evaluate,
    run_ingest,
    run_recommend,
    run_train_classifier,
    run_train_generator,
)

__all__ = [
    "ALL_METHODS",
    "ARTIFACT_ROOT_ENV",
    "ArtifactStore",
    "ConfigError",
    "DEFAULT_ARTIFACT_ROOT",
    "GENERATION_METHODS",
    "PipelineConfig",
    "PipelineError",
    "RELEVANCE_METHODS",
    "ServingBundle",
    "load_bundle",
    "resolve_store",
    "run_build_index",
    "run_evaluate",
    "run_ingest",
    "run_recommend",
    "run_train_classifier",
    "run_train_generator",
]
