"""Contract corpus handling: ingestion, normalization, clause library, proxy datasets.

A corpus is a list of contracts, each an ordered sequence of typed clauses.
Two JSONL layouts are accepted: contract-grouped (one contract per line) and
clause-level (one clause per line with a contract_id field, grouped on read).
"""

from __future__ import annotations

import json
import logging
import random
import unicodedata
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

RELEVANT = "relevant"
NOT_RELEVANT = "not_relevant"

CORPUS_FORMATS = ("jsonl-contracts", "jsonl-clauses")


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid dataset requests."""


class _PunctuationTable(dict):
    """str.translate table that deletes Unicode punctuation (general category P*)."""

    def __missing__(self, code):
        mapped = None if unicodedata.category(chr(code)).startswith("P") else code
        self[code] = mapped
        return mapped


_PUNCT_TABLE = _PunctuationTable()


def preprocess(text: str) -> list[str]:
    """Tokenize clause text: lowercase, delete punctuation, split on whitespace,
    drop single-character tokens.

    Deterministic and idempotent on its own (space-joined) output. May return
    an empty list.
    """
    cleaned = text.lower().translate(_PUNCT_TABLE)
    return [tok for tok in cleaned.split() if len(tok) > 1]


def normalize_label(label: str) -> str:
    """Lowercase a clause-type label and collapse internal whitespace."""
    return " ".join(label.lower().split())


@dataclass(frozen=True, order=True)
class ClauseTypeId:
    """Dense integer handle plus normalized label for one clause type."""

    id: int
    label: str


class TypeIndex:
    """Bijective label <-> dense id mapping for the clause types of one corpus."""

    def __init__(self, labels):
        self._types = [ClauseTypeId(i, lab) for i, lab in enumerate(sorted(set(labels)))]
        self._by_label = {t.label: t for t in self._types}

    def __len__(self):
        return len(self._types)

    def __iter__(self):
        return iter(self._types)

    def __contains__(self, label):
        return label in self._by_label

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self._types]

    def get(self, label: str) -> ClauseTypeId:
        try:
            return self._by_label[label]
        except KeyError:
            raise CorpusError(f"unknown clause type: {label!r}") from None


@dataclass(frozen=True)
class Clause:
    """One typed clause. Tokens are derived deterministically from the text."""

    label: str
    text: str
    tokens: tuple[str, ...]

    @classmethod
    def make(cls, label: str, text: str) -> "Clause":
        return cls(normalize_label(label), text, tuple(preprocess(text)))


@dataclass
class Contract:
    """An ordered sequence of clauses with a corpus-unique id."""

    id: str
    clauses: list[Clause]

    def type_labels(self) -> set[str]:
        return {c.label for c in self.clauses}

    def without_type(self, label: str) -> "Contract":
        """Copy of this contract with every clause of the given type removed."""
        return Contract(self.id, [c for c in self.clauses if c.label != label])


@dataclass(frozen=True)
class LibraryEntry:
    """A clause together with its provenance (contract id, position)."""

    contract_id: str
    clause_index: int
    clause: Clause


class ClauseLibrary:
    """All corpus clauses grouped by clause type; the retrieval candidate pool."""

    def __init__(self, contracts, type_index: TypeIndex):
        self.type_index = type_index
        self._by_label: dict[str, list[LibraryEntry]] = {}
        for contract in contracts:
            for idx, clause in enumerate(contract.clauses):
                self._by_label.setdefault(clause.label, []).append(
                    LibraryEntry(contract.id, idx, clause)
                )

    def labels(self) -> list[str]:
        return self.type_index.labels

    def has(self, label: str) -> bool:
        return label in self._by_label

    def entries(self, label: str) -> list[LibraryEntry]:
        if label not in self._by_label:
            raise CorpusError(f"no clauses of type {label!r} in library")
        return self._by_label[label]

    def __len__(self):
        return sum(len(v) for v in self._by_label.values())


@dataclass
class ProxyExample:
    """One supervised example for relevance / recommendation proxy tasks.

    For a relevant example the contract has every clause of the target type
    removed and held_out_clause is the first removed clause in document order.
    """

    contract: Contract
    target: ClauseTypeId
    relevance_label: str
    held_out_clause: Clause | None = None

    def is_relevant(self) -> bool:
        return self.relevance_label == RELEVANT


@dataclass
class DatasetSplit:
    """60/20/20 per-contract partition of proxy examples for one target type."""

    target: ClauseTypeId
    seed: int
    train: list[ProxyExample] = field(default_factory=list)
    validation: list[ProxyExample] = field(default_factory=list)
    test: list[ProxyExample] = field(default_factory=list)

    def all_examples(self):
        return self.train + self.validation + self.test


def _parse_clause_records(raw, line_no) -> list[tuple[str, str]]:
    clauses = raw.get("clauses")
    if not isinstance(clauses, list):
        raise CorpusError(f"line {line_no}: 'clauses' must be a list")
    out = []
    for entry in clauses:
        if not isinstance(entry, dict) or "label" not in entry or "text" not in entry:
            raise CorpusError(f"line {line_no}: clause entries need 'label' and 'text'")
        out.append((_first_label(entry["label"], line_no), entry["text"]))
    return out


def _first_label(label, line_no) -> str:
    # Multi-label sources keep the first label only.
    if isinstance(label, list):
        if not label:
            raise CorpusError(f"line {line_no}: empty label list")
        label = label[0]
    if not isinstance(label, str) or not label.strip():
        raise CorpusError(f"line {line_no}: label must be a nonempty string")
    return label


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusError(f"line {line_no}: invalid JSON ({err.msg})") from err
            yield line_no, raw


def ingest(path, format: str = "jsonl-contracts") -> tuple[list[Contract], ClauseLibrary]:
    """Read a corpus file and build the contract list plus clause library.

    Labels are normalized, clauses whose token stream is empty are dropped
    (a warning carries the count), and contracts are ordered by id.
    """
    if format not in CORPUS_FORMATS:
        raise CorpusError(f"unknown corpus format {format!r}; expected one of {CORPUS_FORMATS}")

    grouped: dict[str, list[tuple[str, str]]] = {}
    if format == "jsonl-contracts":
        for line_no, raw in _read_jsonl(path):
            if not isinstance(raw, dict) or "id" not in raw:
                raise CorpusError(f"line {line_no}: contract record needs an 'id'")
            cid = str(raw["id"])
            if cid in grouped:
                raise CorpusError(f"line {line_no}: duplicate contract id {cid!r}")
            grouped[cid] = _parse_clause_records(raw, line_no)
    else:
        for line_no, raw in _read_jsonl(path):
            if not isinstance(raw, dict) or "contract_id" not in raw:
                raise CorpusError(f"line {line_no}: clause record needs a 'contract_id'")
            if "label" not in raw or "text" not in raw:
                raise CorpusError(f"line {line_no}: clause record needs 'label' and 'text'")
            cid = str(raw["contract_id"])
            grouped.setdefault(cid, []).append((_first_label(raw["label"], line_no), raw["text"]))

    dropped_clauses = 0
    dropped_contracts = 0
    contracts = []
    for cid in sorted(grouped):
        clauses = []
        for label, text in grouped[cid]:
            clause = Clause.make(label, text)
            if not clause.tokens:
                dropped_clauses += 1
                continue
            clauses.append(clause)
        if clauses:
            contracts.append(Contract(cid, clauses))
        elif grouped[cid]:
            dropped_contracts += 1
    if dropped_clauses:
        logger.warning("dropped %d clause(s) with empty token streams", dropped_clauses)
    if dropped_contracts:
        logger.warning("dropped %d contract(s) left with no clauses", dropped_contracts)

    type_index = TypeIndex(c.label for contract in contracts for c in contract.clauses)
    return contracts, ClauseLibrary(contracts, type_index)


def serialize_contracts(contracts, path) -> None:
    """Write contracts as canonical contract-grouped JSONL (sorted by id)."""
    with open(path, "w", encoding="utf-8") as fh:
        for contract in sorted(contracts, key=lambda c: c.id):
            record = {
                "id": contract.id,
                "clauses": [{"label": c.label, "text": c.text} for c in contract.clauses],
            }
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def corpus_fingerprint(contracts) -> str:
    """Stable hash of the canonical serialized corpus."""
    import hashlib

    h = hashlib.sha256()
    for contract in sorted(contracts, key=lambda c: c.id):
        record = {
            "id": contract.id,
            "clauses": [{"label": c.label, "text": c.text} for c in contract.clauses],
        }
        h.update(json.dumps(record, sort_keys=True, ensure_ascii=False).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def build_proxy_dataset(
    contracts, target, seed: int, type_index: TypeIndex | None = None
) -> DatasetSplit:
    """Build the balanced relevant / not-relevant proxy dataset for one target type.

    Relevant examples are contracts containing the target type with all such
    clauses removed (the first removed clause, in document order, is kept as
    ground truth). Not-relevant examples are a seeded uniform sample of
    contracts lacking the type. The larger class is truncated to the smaller,
    and the result is split 60/20/20 by contract.
    """
    if isinstance(target, ClauseTypeId):
        target_type = target
    else:
        label = normalize_label(target)
        if type_index is None:
            type_index = TypeIndex(
                c.label for contract in contracts for c in contract.clauses
            )
        target_type = type_index.get(label)
    label = target_type.label

    with_target = []
    without_target = []
    for contract in contracts:
        if label in contract.type_labels():
            # A contract consisting solely of target clauses cannot form a
            # valid example (the stripped contract would be empty).
            if any(c.label != label for c in contract.clauses):
                with_target.append(contract)
        else:
            without_target.append(contract)

    if len(with_target) < 2:
        raise CorpusError(
            f"need at least 2 usable contracts containing {label!r}, found {len(with_target)}"
        )
    if len(without_target) < 2:
        raise CorpusError(
            f"need at least 2 contracts lacking {label!r}, found {len(without_target)}"
        )

    rng = random.Random(seed)
    n = min(len(with_target), len(without_target))
    positives = sorted(with_target, key=lambda c: c.id)
    negatives = sorted(without_target, key=lambda c: c.id)
    if len(positives) > n:
        positives = rng.sample(positives, n)
    if len(negatives) > n:
        negatives = rng.sample(negatives, n)

    pos_examples = []
    for contract in positives:
        removed = [c for c in contract.clauses if c.label == label]
        pos_examples.append(
            ProxyExample(
                contract=contract.without_type(label),
                target=target_type,
                relevance_label=RELEVANT,
                held_out_clause=removed[0],
            )
        )
    neg_examples = [
        ProxyExample(contract=contract, target=target_type, relevance_label=NOT_RELEVANT)
        for contract in negatives
    ]

    split = DatasetSplit(target=target_type, seed=seed)
    # Stratified 60/20/20 so both classes stay balanced within each split.
    for examples in (pos_examples, neg_examples):
        rng.shuffle(examples)
        n_train = round(len(examples) * 0.6)
        n_val = round(len(examples) * 0.2)
        split.train.extend(examples[:n_train])
        split.validation.extend(examples[n_train : n_train + n_val])
        split.test.extend(examples[n_train + n_val :])
    rng.shuffle(split.train)
    rng.shuffle(split.validation)
    rng.shuffle(split.test)
    return split


def _example_to_record(example: ProxyExample, part: str) -> dict:
    record = {
        "record": "example",
        "split": part,
        "relevance_label": example.relevance_label,
        "contract": {
            "id": example.contract.id,
            "clauses": [{"label": c.label, "text": c.text} for c in example.contract.clauses],
        },
    }
    if example.held_out_clause is not None:
        record["held_out_clause"] = {
            "label": example.held_out_clause.label,
            "text": example.held_out_clause.text,
        }
    return record


def save_split(split: DatasetSplit, path) -> None:
    """Persist a proxy dataset as JSONL with an explicit header record."""
    header = {
        "record": "header",
        "target": split.target.label,
        "target_id": split.target.id,
        "seed": split.seed,
        "counts": {
            "train": len(split.train),
            "validation": len(split.validation),
            "test": len(split.test),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
        for part in ("train", "validation", "test"):
            for example in getattr(split, part):
                fh.write(
                    json.dumps(_example_to_record(example, part), sort_keys=True, ensure_ascii=False)
                    + "\n"
                )


def load_split(path) -> DatasetSplit:
    rows = list(_read_jsonl(path))
    if not rows or rows[0][1].get("record") != "header":
        raise CorpusError(f"{path}: missing proxy dataset header record")
    header = rows[0][1]
    target = ClauseTypeId(int(header["target_id"]), header["target"])
    split = DatasetSplit(target=target, seed=int(header["seed"]))
    for line_no, raw in rows[1:]:
        if raw.get("record") != "example":
            raise CorpusError(f"line {line_no}: expected example record")
        contract = Contract(
            raw["contract"]["id"],
            [Clause.make(c["label"], c["text"]) for c in raw["contract"]["clauses"]],
        )
        held_out = None
        if "held_out_clause" in raw:
            held_out = Clause.make(raw["held_out_clause"]["label"], raw["held_out_clause"]["text"])
        example = ProxyExample(contract, target, raw["relevance_label"], held_out)
        getattr(split, raw["split"]).append(example)
    return split
