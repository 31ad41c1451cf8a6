"""Shared fixtures: a small synthetic corpus with fully built artifacts.

Building the artifact store (ingest, index, classifier, generator) takes a
few seconds, so it happens once per session and the pipeline/CLI/service
tests treat the store as read-only.
"""

from types import SimpleNamespace

import pytest

from clausekit.app import ArtifactStore, PipelineConfig
from clausekit.app.pipeline import (
    run_build_index,
    run_ingest,
    run_train_classifier,
    run_train_generator,
)
from clausekit.corpus import serialize_contracts
from clausekit.synthetic import TARGET_TYPE, generate_corpus

FAST_SETTINGS = {
    "targets": [TARGET_TYPE],
    "classifier_lrs": [1e-2],
    "classifier": {"max_epochs": 40, "patience": 10},
    "generator": {"max_epochs": 1, "max_steps": 8, "layers": 1, "heads": 2, "max_len": 60},
    "per_type": {TARGET_TYPE: {"threshold": 1.0, "k": 5}},
    "seed": 29,
}


@pytest.fixture(scope="session")
def built(tmp_path_factory):
    """Synthetic corpus + config + artifact store with all stages built."""
    work = tmp_path_factory.mktemp("pipeline-work")
    contracts = generate_corpus(seed=29, contracts_per_family=30)
    corpus_path = work / "contracts.jsonl"
    serialize_contracts(contracts, corpus_path)
    config = PipelineConfig.from_dict({"corpus_path": str(corpus_path), **FAST_SETTINGS})
    config_path = work / "config.json"
    config.save(config_path)
    store = ArtifactStore(tmp_path_factory.mktemp("pipeline-artifacts"))
    run_ingest(config, store)
    run_build_index(config, store)
    run_train_classifier(config, store, TARGET_TYPE)
    run_train_generator(config, store, TARGET_TYPE)
    return SimpleNamespace(
        config=config,
        config_path=config_path,
        corpus_path=corpus_path,
        contracts=contracts,
        store=store,
        work=work,
        target=TARGET_TYPE,
    )
