"""Artifact store and pipeline stages: ingest → build-index → train → evaluate.

Every stage writes its outputs plus a manifest recording a fingerprint of the
exact inputs it consumed. Re-running a stage whose manifest matches is a
no-op ("artifact up to date"); a manifest whose fingerprint disagrees with
the current inputs is refused with an explanation rather than silently
overwritten, and a missing dependency is an error naming the command that
produces it.

Evaluation deliberately never caches: reports are recomputed on every run so
that byte-identical outputs demonstrate determinism instead of file reuse.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import (
    ClauseLibrary,
    Contract,
    DatasetSplit,
    build_proxy_dataset,
    corpus_fingerprint,
    ingest,
    normalize_label,
    save_split,
    serialize_contracts,
)
from ..encoding import (
    HashedTextEncoder,
    RepresentationIndex,
    clause_type_rep,
    contract_rep,
    encoder_from_dict,
)
from ..evaluation import (
    evaluate_generation,
    evaluate_relevance,
    render_generation_table,
    render_relevance_table,
    render_report_json,
    report_row,
)
from ..generation import ClauseGenerator, condition, pairs_from_split
from ..relevance import (
    IncidenceMatrix,
    ItemSimilarityMatrix,
    RelevanceClassifier,
    build_incidence,
    cf_predict,
    classifier_predict,
    docsim_predict,
    item_similarity,
    train_classifier,
)
from ..retrieval import ClauseRetriever, RetrievalQuery
from .config import ARTIFACT_ROOT_ENV, DEFAULT_ARTIFACT_ROOT, PipelineConfig

logger = logging.getLogger(__name__)

RELEVANCE_METHODS = ("cf", "docsim", "classifier")
GENERATION_METHODS = ("retrieval-i", "retrieval-ii", "generator")
ALL_METHODS = RELEVANCE_METHODS + GENERATION_METHODS

_VARIANT_OF = {"retrieval-i": "ct_only", "retrieval-ii": "ct_plus_type"}


class PipelineError(RuntimeError):
    """Raised for missing dependencies, stale artifacts, or stage failures."""


def _echo(echo, message: str) -> None:
    (echo or logger.info)(message)


# --------------------------------------------------------------------- store


class ArtifactStore:
    """Directory layout for pipeline artifacts under one root."""

    SUBDIRS = ("corpus", "reps", "matrices", "models", "reports")

    def __init__(self, root):
        self.root = Path(root)

    def ensure(self) -> "ArtifactStore":
        for name in self.SUBDIRS:
            (self.root / name).mkdir(parents=True, exist_ok=True)
        return self

    @staticmethod
    def slug(label: str) -> str:
        return normalize_label(label).replace(" ", "-")

    # corpus/
    @property
    def corpus_file(self) -> Path:
        return self.root / "corpus" / "contracts.jsonl"

    @property
    def ingest_manifest(self) -> Path:
        return self.root / "corpus" / "ingest.manifest.json"

    def split_file(self, label: str) -> Path:
        return self.root / "corpus" / f"proxy-{self.slug(label)}.jsonl"

    # reps/
    @property
    def reps_file(self) -> Path:
        return self.root / "reps" / "index.npz"

    @property
    def reps_meta_file(self) -> Path:
        return self.root / "reps" / "index.json"

    @property
    def index_manifest(self) -> Path:
        return self.root / "reps" / "build-index.manifest.json"

    # matrices/
    @property
    def incidence_file(self) -> Path:
        return self.root / "matrices" / "incidence.npz"

    @property
    def incidence_meta_file(self) -> Path:
        return self.root / "matrices" / "incidence.json"

    @property
    def similarity_file(self) -> Path:
        return self.root / "matrices" / "similarity.npz"

    @property
    def similarity_meta_file(self) -> Path:
        return self.root / "matrices" / "similarity.json"

    # models/
    def classifier_file(self, label: str) -> Path:
        return self.root / "models" / f"classifier-{self.slug(label)}.json"

    def classifier_manifest(self, label: str) -> Path:
        return self.root / "models" / f"classifier-{self.slug(label)}.manifest.json"

    def generator_file(self, label: str) -> Path:
        return self.root / "models" / f"generator-{self.slug(label)}.json"

    def generator_manifest(self, label: str) -> Path:
        return self.root / "models" / f"generator-{self.slug(label)}.manifest.json"

    # reports/
    @property
    def report_file(self) -> Path:
        return self.root / "reports" / "report.json"

    @property
    def report_tables_file(self) -> Path:
        return self.root / "reports" / "report.txt"


def resolve_store(root=None) -> ArtifactStore:
    """Artifact root precedence: explicit argument, then environment, then default."""
    return ArtifactStore(root or os.environ.get(ARTIFACT_ROOT_ENV) or DEFAULT_ARTIFACT_ROOT)


# ----------------------------------------------------------------- manifests


def _stage_fingerprint(inputs: dict) -> str:
    blob = json.dumps(inputs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _check_stage(manifest_path: Path, stage: str, inputs: dict, artifact: Path) -> bool:
    """True when the stage's existing manifest matches and work can be skipped.

    A manifest built from different inputs is refused with an explanation of
    what changed; the caller must clear the artifact or use a fresh root.
    """
    if not manifest_path.exists():
        return False
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise PipelineError(f"unreadable manifest {manifest_path}: {err}") from err
    fingerprint = _stage_fingerprint(inputs)
    if manifest.get("fingerprint") == fingerprint:
        return True
    old = manifest.get("inputs", {})
    changed = sorted(
        key for key in set(old) | set(inputs) if old.get(key) != inputs.get(key)
    )
    raise PipelineError(
        f"refusing to overwrite {artifact}: it was built from different inputs "
        f"(changed: {', '.join(changed) or 'unknown'}). Delete {manifest_path.parent} "
        f"or point {ARTIFACT_ROOT_ENV} at a fresh artifact root to rebuild."
    )


def _write_manifest(
    manifest_path: Path, stage: str, inputs: dict, config: PipelineConfig, outputs, extra=None
) -> None:
    manifest = {
        "stage": stage,
        "fingerprint": _stage_fingerprint(inputs),
        "inputs": inputs,
        "config_fingerprint": config.fingerprint,
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest["extra"] = extra
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")


# ------------------------------------------------------------------- loading


def load_corpus(store: ArtifactStore):
    if not store.corpus_file.exists():
        raise PipelineError(
            f"no ingested corpus at {store.corpus_file}; run `clausekit ingest` first"
        )
    return ingest(store.corpus_file)


def load_rep_index(store: ArtifactStore) -> RepresentationIndex:
    if not store.reps_file.exists() or not store.reps_meta_file.exists():
        raise PipelineError(
            f"no representation index under {store.reps_file.parent}; "
            "run `clausekit build-index` first"
        )
    return RepresentationIndex.load(store.reps_file, store.reps_meta_file)


def load_matrices(store: ArtifactStore):
    for path in (store.incidence_file, store.similarity_file):
        if not path.exists():
            raise PipelineError(
                f"no incidence/similarity matrices under {path.parent}; "
                "run `clausekit build-index` first"
            )
    incidence = IncidenceMatrix.load(store.incidence_file, store.incidence_meta_file)
    sims = ItemSimilarityMatrix.load(store.similarity_file, store.similarity_meta_file)
    return incidence, sims


def load_classifier(store: ArtifactStore, label: str, encoder_fingerprint: str):
    path = store.classifier_file(label)
    if not path.exists():
        raise PipelineError(
            f"no trained classifier for {label!r} at {path}; "
            f"run `clausekit train-classifier --target '{label}'` first"
        )
    return RelevanceClassifier.load(path, encoder_fingerprint)


def load_generator(store: ArtifactStore, label: str, encoder_fingerprint: str):
    path = store.generator_file(label)
    if not path.exists():
        raise PipelineError(
            f"no trained generator for {label!r} at {path}; "
            f"run `clausekit train-generator --target '{label}'` first"
        )
    return ClauseGenerator.load(path, encoder_fingerprint)


# -------------------------------------------------------------------- stages


def run_ingest(config: PipelineConfig, store: ArtifactStore, echo=None) -> dict:
    store.ensure()
    source = Path(config.corpus_path)
    if not source.exists():
        raise PipelineError(f"corpus file not found: {source}")
    inputs = {
        "corpus_path": str(source),
        "corpus_format": config.corpus_format,
        "source_sha256": hashlib.sha256(source.read_bytes()).hexdigest(),
    }
    if _check_stage(store.ingest_manifest, "ingest", inputs, store.corpus_file):
        _echo(echo, f"artifact up to date: {store.corpus_file}")
        return {"status": "up-to-date", "path": str(store.corpus_file)}
    contracts, library = ingest(config.corpus_path, config.corpus_format)
    serialize_contracts(contracts, store.corpus_file)
    summary = {
        "n_contracts": len(contracts),
        "n_clauses": len(library),
        "n_types": len(library.type_index),
        "corpus_fingerprint": corpus_fingerprint(contracts),
    }
    _write_manifest(
        store.ingest_manifest, "ingest", inputs, config, [store.corpus_file], extra=summary
    )
    _echo(
        echo,
        f"ingested {summary['n_contracts']} contracts "
        f"({summary['n_clauses']} clauses, {summary['n_types']} types) "
        f"-> {store.corpus_file}",
    )
    return {"status": "built", "path": str(store.corpus_file), **summary}


def run_build_index(config: PipelineConfig, store: ArtifactStore, echo=None) -> dict:
    store.ensure()
    contracts, library = load_corpus(store)
    corpus_fp = corpus_fingerprint(contracts)
    inputs = {
        "corpus_fingerprint": corpus_fp,
        "encoder": dict(config.encoder),
        "cf_mode": config.cf_mode,
    }
    if _check_stage(store.index_manifest, "build-index", inputs, store.reps_file):
        _echo(echo, f"artifact up to date: {store.reps_file}")
        return {"status": "up-to-date", "path": str(store.reps_file)}
    encoder = encoder_from_dict(config.encoder)
    if isinstance(encoder, HashedTextEncoder):
        encoder.fit(contracts)
    rep_index = RepresentationIndex(encoder).fit(contracts, library)
    rep_index.save(store.reps_file, store.reps_meta_file)
    incidence = build_incidence(contracts, library.type_index)
    incidence.save(store.incidence_file, store.incidence_meta_file)
    sims = item_similarity(incidence, config.cf_mode)
    ItemSimilarityMatrix(sims.values, sims.mode, corpus_fp).save(
        store.similarity_file, store.similarity_meta_file
    )
    outputs = [
        store.reps_file,
        store.reps_meta_file,
        store.incidence_file,
        store.incidence_meta_file,
        store.similarity_file,
        store.similarity_meta_file,
    ]
    _write_manifest(
        store.index_manifest,
        "build-index",
        inputs,
        config,
        outputs,
        extra={"encoder_fingerprint": encoder.fingerprint},
    )
    _echo(
        echo,
        f"indexed {len(contracts)} contracts: representations, incidence, "
        f"{config.cf_mode} similarities -> {store.reps_file.parent.parent}",
    )
    return {"status": "built", "encoder_fingerprint": encoder.fingerprint}


def _build_split(config: PipelineConfig, contracts, library, target: str) -> DatasetSplit:
    return build_proxy_dataset(contracts, target, seed=config.seed, type_index=library.type_index)


def run_train_classifier(config: PipelineConfig, store: ArtifactStore, target: str, echo=None) -> dict:
    store.ensure()
    target = normalize_label(target)
    contracts, library = load_corpus(store)
    rep_index = load_rep_index(store)
    encoder = rep_index.encoder
    inputs = {
        "corpus_fingerprint": corpus_fingerprint(contracts),
        "encoder_fingerprint": encoder.fingerprint,
        "target": target,
        "seed": config.seed,
        "lrs": list(config.classifier_lrs_for(target)),
        "classifier": dict(config.classifier),
    }
    artifact = store.classifier_file(target)
    if _check_stage(store.classifier_manifest(target), "train-classifier", inputs, artifact):
        _echo(echo, f"artifact up to date: {artifact}")
        return {"status": "up-to-date", "path": str(artifact)}
    split = _build_split(config, contracts, library, target)
    save_split(split, store.split_file(target))
    clf, info = train_classifier(
        split,
        encoder,
        lrs=config.classifier_lrs_for(target),
        batch_size=config.classifier["batch_size"],
        max_epochs=config.classifier["max_epochs"],
        patience=config.classifier["patience"],
        seed=config.seed,
    )
    clf.save(artifact, encoder.fingerprint, target=target, info=info)
    _write_manifest(
        store.classifier_manifest(target),
        "train-classifier",
        inputs,
        config,
        [artifact, store.split_file(target)],
        extra={"validation_accuracy": clf.best_val_accuracy_, "chosen_lr": info["chosen_lr"]},
    )
    _echo(
        echo,
        f"trained classifier for {target!r}: validation accuracy "
        f"{clf.best_val_accuracy_:.3f} at lr {info['chosen_lr']:g} -> {artifact}",
    )
    return {"status": "built", "path": str(artifact), "validation_accuracy": clf.best_val_accuracy_}


def run_train_generator(config: PipelineConfig, store: ArtifactStore, target: str, echo=None) -> dict:
    store.ensure()
    target = normalize_label(target)
    contracts, library = load_corpus(store)
    rep_index = load_rep_index(store)
    encoder = rep_index.encoder
    gen_config = dict(config.generator)
    if gen_config.get("hidden") is None:
        gen_config["hidden"] = encoder.dimension
    inputs = {
        "corpus_fingerprint": corpus_fingerprint(contracts),
        "encoder_fingerprint": encoder.fingerprint,
        "target": target,
        "seed": config.seed,
        "generator": gen_config,
    }
    artifact = store.generator_file(target)
    if _check_stage(store.generator_manifest(target), "train-generator", inputs, artifact):
        _echo(echo, f"artifact up to date: {artifact}")
        return {"status": "up-to-date", "path": str(artifact)}
    split = _build_split(config, contracts, library, target)
    train_pairs = pairs_from_split(split, encoder, library, part="train")
    val_pairs = pairs_from_split(split, encoder, library, part="validation")
    generator = ClauseGenerator(seed=config.seed, **gen_config)
    generator.fit(train_pairs, validation=val_pairs or None)
    generator.save(artifact, encoder.fingerprint)
    _write_manifest(
        store.generator_manifest(target),
        "train-generator",
        inputs,
        config,
        [artifact],
        extra={
            "best_validation_loss": generator.best_validation_loss_,
            "steps": generator.steps_,
            "vocab_size": len(generator.vocab_),
        },
    )
    _echo(
        echo,
        f"trained generator for {target!r}: best validation loss "
        f"{generator.best_validation_loss_:.4f} over {generator.steps_} steps -> {artifact}",
    )
    return {"status": "built", "path": str(artifact)}


# ------------------------------------------------------------------ evaluate


def _relevance_decider(
    method: str,
    config: PipelineConfig,
    target: str,
    incidence: IncidenceMatrix,
    sims: ItemSimilarityMatrix,
    doc_index: RepresentationIndex,
    classifier,
    encoder,
):
    if method == "cf":
        threshold = config.cf_threshold_for(target)
        return lambda ex: cf_predict(incidence, sims, ex.contract, target, threshold).relevant
    if method == "docsim":
        k = config.docsim_k_for(target)
        return lambda ex: docsim_predict(doc_index, ex.contract, target, k).relevant
    if method == "classifier":
        return lambda ex: classifier_predict(
            classifier, contract_rep(encoder, ex.contract), target
        ).relevant
    raise PipelineError(f"unknown relevance method {method!r}")


def run_evaluate(
    config: PipelineConfig,
    store: ArtifactStore,
    targets=None,
    methods=None,
    out=None,
    echo=None,
) -> dict:
    """Evaluate the selected methods on each target's held-out test split.

    Recomputes everything deterministically from the stored corpus and
    encoder: per-target proxy split, train-only incidence/similarity and
    document-similarity index (no test leakage), then one report row per
    (target, method). The JSON report is written to ``out`` (default
    ``reports/report.json``) and aligned tables beside it.
    """
    store.ensure()
    explicit_methods = methods is not None and len(list(methods)) > 0
    methods = list(methods) if explicit_methods else list(ALL_METHODS)
    unknown = [m for m in methods if m not in ALL_METHODS]
    if unknown:
        raise PipelineError(f"unknown methods {unknown}; expected a subset of {list(ALL_METHODS)}")
    targets = [normalize_label(t) for t in (targets or config.targets)]

    contracts, library = load_corpus(store)
    rep_index = load_rep_index(store)
    encoder = rep_index.encoder
    type_index = library.type_index
    by_id = {c.id: c for c in contracts}
    retriever = ClauseRetriever(encoder).fit(library)
    type_rep_cache: dict = {}

    rows = []
    for target in targets:
        if target not in type_index:
            raise PipelineError(f"target {target!r} does not occur in the corpus")
        split = _build_split(config, contracts, library, target)
        train_contracts = sorted(
            (by_id[ex.contract.id] for ex in split.train), key=lambda c: c.id
        )
        incidence = build_incidence(train_contracts, type_index)
        sims = item_similarity(incidence, config.cf_mode)
        doc_index = RepresentationIndex(encoder).fit(train_contracts, library)
        classifier = None
        if "classifier" in methods:
            try:
                classifier = load_classifier(store, target, encoder.fingerprint)
            except PipelineError:
                if explicit_methods:
                    raise
        generator = None
        if "generator" in methods:
            try:
                generator = load_generator(store, target, encoder.fingerprint)
            except PipelineError:
                if explicit_methods:
                    raise

        for method in (m for m in methods if m in RELEVANCE_METHODS):
            if method == "classifier" and classifier is None:
                continue
            decide = _relevance_decider(
                method, config, target, incidence, sims, doc_index, classifier, encoder
            )
            metrics = evaluate_relevance(decide, split.test)
            rows.append(report_row("relevance", target, method, metrics, config.fingerprint))

        target_rep = clause_type_rep(encoder, library, target, cache=type_rep_cache)
        for method in (m for m in methods if m in GENERATION_METHODS):
            if method == "generator":
                if generator is None:
                    continue
                produce = lambda ex: generator.generate(  # noqa: E731
                    condition(contract_rep(encoder, ex.contract), target_rep)
                ).tokens
            else:
                variant = _VARIANT_OF[method]
                produce = _retrieval_producer(retriever, encoder, target, target_rep, variant)
            metrics = evaluate_generation(produce, split.test)
            rows.append(report_row("generation", target, method, metrics, config.fingerprint))

    report_json = render_report_json(rows)
    out_path = Path(out) if out else store.report_file
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(report_json + "\n", encoding="utf-8")

    relevance_rows = [r for r in rows if r["task"] == "relevance"]
    generation_rows = [r for r in rows if r["task"] == "generation"]
    tables = []
    if relevance_rows:
        tables.append(render_relevance_table(relevance_rows))
    if generation_rows:
        tables.append(render_generation_table(generation_rows))
    table_text = "\n\n".join(tables)
    store.report_tables_file.write_text(table_text + "\n", encoding="utf-8")
    _echo(echo, table_text)
    _echo(echo, f"report written to {out_path}")
    return {"rows": rows, "report_path": str(out_path), "report_json": report_json}


def _retrieval_producer(retriever, encoder, target, target_rep, variant):
    def produce(example):
        query = RetrievalQuery(
            contract_rep=contract_rep(encoder, example.contract),
            target=target,
            top_n=1,
            variant=variant,
            type_rep=target_rep if variant == "ct_plus_type" else None,
            exclude_contract=example.contract.id,
        )
        return retriever.retrieve(query)[0].clause.tokens

    return produce


# ----------------------------------------------------------------- recommend


@dataclass
class ServingBundle:
    """Everything loaded once for `recommend` and the HTTP service."""

    config: PipelineConfig
    contracts: list
    library: ClauseLibrary
    encoder: object
    rep_index: RepresentationIndex
    incidence: IncidenceMatrix
    sims: ItemSimilarityMatrix
    retriever: ClauseRetriever
    classifiers: dict
    generators: dict
    type_rep_cache: dict = field(default_factory=dict)

    @property
    def type_index(self):
        return self.library.type_index

    def type_rep(self, label: str):
        return clause_type_rep(self.encoder, self.library, label, cache=self.type_rep_cache)

    def decisions_for(self, contract: Contract, label: str, methods) -> dict:
        """Per-method relevance decisions for one absent-or-present type."""
        out = {}
        if "cf" in methods:
            out["cf"] = cf_predict(
                self.incidence, self.sims, contract, label, self.config.cf_threshold_for(label)
            )
        if "docsim" in methods:
            out["docsim"] = docsim_predict(
                self.rep_index, contract, label, self.config.docsim_k_for(label)
            )
        if "classifier" in methods and label in self.classifiers:
            rep = contract_rep(self.encoder, contract)
            out["classifier"] = classifier_predict(self.classifiers[label], rep, label)
        return out


def load_bundle(config: PipelineConfig, store: ArtifactStore) -> ServingBundle:
    """Load full-corpus serving artifacts; models are optional per target."""
    contracts, library = load_corpus(store)
    rep_index = load_rep_index(store)
    encoder = rep_index.encoder
    incidence, sims = load_matrices(store)
    retriever = ClauseRetriever(encoder).fit(library)
    classifiers, generators = {}, {}
    for target in config.targets:
        if store.classifier_file(target).exists():
            classifiers[target] = RelevanceClassifier.load(
                store.classifier_file(target), encoder.fingerprint
            )
        if store.generator_file(target).exists():
            generators[target] = ClauseGenerator.load(
                store.generator_file(target), encoder.fingerprint
            )
    return ServingBundle(
        config=config,
        contracts=contracts,
        library=library,
        encoder=encoder,
        rep_index=rep_index,
        incidence=incidence,
        sims=sims,
        retriever=retriever,
        classifiers=classifiers,
        generators=generators,
    )


def run_recommend(
    config: PipelineConfig,
    store: ArtifactStore,
    contract_path,
    target: str,
    top_n: int = 5,
    variant: str = "ii",
    echo=None,
) -> dict:
    """Rank library clauses for one contract and target type; generate if possible."""
    target = normalize_label(target)
    if variant not in ("i", "ii"):
        raise PipelineError(f"variant must be 'i' or 'ii', got {variant!r}")
    bundle = load_bundle(config, store)
    candidates, _ = ingest(contract_path, config.corpus_format)
    if len(candidates) != 1:
        raise PipelineError(
            f"{contract_path} must contain exactly one contract, found {len(candidates)}"
        )
    contract = candidates[0]
    if target not in bundle.type_index:
        raise PipelineError(f"target {target!r} does not occur in the corpus")

    result = {"contract_id": contract.id, "target": target, "config_fingerprint": config.fingerprint}
    warning = None
    if target in contract.type_labels():
        warning = (
            f"contract {contract.id!r} already contains a {target!r} clause; "
            "the relevance stage would not have proposed it"
        )
        _echo(echo, f"warning: {warning}")
    result["warning"] = warning

    decisions = bundle.decisions_for(contract, target, RELEVANCE_METHODS)
    result["relevance"] = {m: d.to_dict() for m, d in decisions.items()}
    for method, decision in decisions.items():
        _echo(echo, f"relevance[{method}]: score={decision.score:.4f} relevant={decision.relevant}")

    rep_c = contract_rep(bundle.encoder, contract)
    rep_t = bundle.type_rep(target)
    query = RetrievalQuery(
        contract_rep=rep_c,
        target=target,
        top_n=top_n,
        variant="ct_plus_type" if variant == "ii" else "ct_only",
        type_rep=rep_t if variant == "ii" else None,
        exclude_contract=contract.id if contract.id in bundle.rep_index.contract_ids_ else None,
    )
    ranked = bundle.retriever.retrieve(query)
    result["retrieved"] = [r.to_dict() for r in ranked]
    _echo(echo, f"top {len(ranked)} retrieved {target!r} clauses (variant {variant}):")
    for r in ranked:
        _echo(echo, f"  {r.rank}. [{r.score:.4f}] ({r.source_contract}) {r.clause.text}")

    if target in bundle.generators:
        generated = bundle.generators[target].generate(condition(rep_c, rep_t))
        result["generated"] = {"text": generated.text, "truncated": generated.truncated}
        _echo(echo, f"generated clause: {generated.text}")
    else:
        result["generated"] = None
        _echo(
            echo,
            f"no generator artifact for {target!r}; "
            f"run `clausekit train-generator --target '{target}'` to enable generation",
        )
    return result
