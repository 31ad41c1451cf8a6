"""Clause, contract, and clause-type representations behind a pluggable encoder.

Two encoder kinds exist: a deterministic builtin (hashed unigram+bigram
TF-IDF features pushed through a seeded signed random projection, then
L2-normalized) and a client for an external HTTP embedding service. Both are
required to be pure functions of (configuration, text).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections import Counter

import numpy as np
import requests

from .corpus import preprocess

logger = logging.getLogger(__name__)

BUILTIN_KIND = "builtin-deterministic"
EXTERNAL_KIND = "external-service"


class EncodingError(ValueError):
    """Raised for unencodable inputs or encoder misconfiguration."""


class EncoderTransportError(RuntimeError):
    """External encoder failure; `kind` distinguishes timeout from protocol mismatch."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind  # "timeout" | "protocol"


def _feature_grams(tokens) -> Counter:
    grams = Counter(tokens)
    for a, b in zip(tokens, tokens[1:]):
        grams[a + " " + b] += 1
    return grams


class HashedTextEncoder:
    """Deterministic dependency-free clause encoder.

    Token unigrams and bigrams are hashed with a seeded keyed hash; each
    feature lands on one output coordinate with a ±1 sign, which is exactly a
    signed random projection of the (implicit) sparse feature vector. Feature
    weights are sublinear TF times an optional corpus-fitted IDF; the output
    is L2-normalized.

    The fitted IDF table is part of the encoder state and therefore of its
    fingerprint, so determinism over (config, text) is preserved.
    """

    kind = BUILTIN_KIND

    def __init__(self, dimension: int = 256, seed: int = 13, idf: dict[str, float] | None = None):
        if dimension < 2:
            raise EncodingError(f"encoder dimension must be >= 2, got {dimension}")
        self.dimension = dimension
        self.seed = seed
        self.idf = dict(idf) if idf else {}
        self._key = hashlib.blake2b(
            str(seed).encode("utf-8"), digest_size=16
        ).digest()

    def fit(self, contracts) -> "HashedTextEncoder":
        """Fit IDF weights over the corpus clauses (each clause = one document)."""
        df: Counter = Counter()
        n_docs = 0
        for contract in contracts:
            for clause in contract.clauses:
                n_docs += 1
                df.update(set(_feature_grams(list(clause.tokens))))
        self.idf = {
            gram: math.log((1.0 + n_docs) / (1.0 + count)) + 1.0 for gram, count in df.items()
        }
        return self

    def _slot(self, gram: str) -> tuple[int, float]:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=9, key=self._key).digest()
        index = int.from_bytes(digest[:8], "big") % self.dimension
        sign = 1.0 if digest[8] & 1 else -1.0
        return index, sign

    def encode_tokens(self, tokens) -> np.ndarray:
        if not tokens:
            raise EncodingError("cannot encode an empty token sequence")
        vec = np.zeros(self.dimension, dtype=np.float64)
        for gram, count in _feature_grams(list(tokens)).items():
            index, sign = self._slot(gram)
            weight = (1.0 + math.log(count)) * self.idf.get(gram, 1.0)
            vec[index] += sign * weight
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise EncodingError("hashed features cancelled to a zero vector")
        return vec / norm

    def encode(self, texts) -> np.ndarray:
        """Encode raw texts (tokenized with the shared preprocessor)."""
        return np.stack([self.encode_tokens(preprocess(t)) for t in texts])

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(
            json.dumps(
                {"kind": self.kind, "dimension": self.dimension, "seed": self.seed},
                sort_keys=True,
            ).encode("utf-8")
        )
        for gram in sorted(self.idf):
            h.update(f"{gram}\x00{self.idf[gram]!r}\n".encode("utf-8"))
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "seed": self.seed,
            "idf": self.idf,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HashedTextEncoder":
        return cls(dimension=data["dimension"], seed=data["seed"], idf=data.get("idf"))


class ExternalEncoderClient:
    """Client for an external embedding service.

    Protocol: HTTP POST {base_url}/encode with {"texts": [...]} returning
    {"vectors": [[...]...], "dimension": int}. Requests are batched; the
    declared dimension is enforced.
    """

    kind = EXTERNAL_KIND

    def __init__(self, base_url: str, dimension: int, batch_size: int = 32, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.dimension = dimension
        self.batch_size = batch_size
        self.timeout = timeout

    def encode(self, texts) -> np.ndarray:
        texts = list(texts)
        rows = []
        for start in range(0, len(texts), self.batch_size):
            rows.append(self._encode_batch(texts[start : start + self.batch_size]))
        if not rows:
            return np.zeros((0, self.dimension))
        return np.concatenate(rows, axis=0)

    def _encode_batch(self, batch) -> np.ndarray:
        try:
            response = requests.post(
                f"{self.base_url}/encode", json={"texts": batch}, timeout=self.timeout
            )
        except requests.Timeout as err:
            raise EncoderTransportError("timeout", f"encoder timed out after {self.timeout}s") from err
        except requests.RequestException as err:
            raise EncoderTransportError("protocol", f"encoder unreachable: {err}") from err
        if response.status_code != 200:
            raise EncoderTransportError(
                "protocol", f"encoder returned HTTP {response.status_code}"
            )
        try:
            payload = response.json()
            vectors = np.asarray(payload["vectors"], dtype=np.float64)
            declared = int(payload["dimension"])
        except (ValueError, KeyError, TypeError) as err:
            raise EncoderTransportError("protocol", f"malformed encoder response: {err}") from err
        if declared != self.dimension or vectors.ndim != 2 or vectors.shape[1] != self.dimension:
            raise EncoderTransportError(
                "protocol",
                f"dimension mismatch: expected {self.dimension}, service sent {declared}",
            )
        if not np.all(np.isfinite(vectors)):
            raise EncoderTransportError("protocol", "encoder returned non-finite values")
        return vectors

    @property
    def fingerprint(self) -> str:
        blob = json.dumps(
            {"kind": self.kind, "base_url": self.base_url, "dimension": self.dimension},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "base_url": self.base_url,
            "dimension": self.dimension,
            "batch_size": self.batch_size,
            "timeout": self.timeout,
        }


def encoder_from_dict(data: dict):
    kind = data.get("kind", BUILTIN_KIND)
    if kind == BUILTIN_KIND:
        return HashedTextEncoder.from_dict(data)
    if kind == EXTERNAL_KIND:
        return ExternalEncoderClient(
            base_url=data["base_url"],
            dimension=data["dimension"],
            batch_size=data.get("batch_size", 32),
            timeout=data.get("timeout", 10.0),
        )
    raise EncodingError(f"unknown encoder kind {kind!r}")


def encode_clause(encoder, clause) -> np.ndarray:
    """Embed one clause. The clause must have a nonempty token stream."""
    if not clause.tokens:
        raise EncodingError(f"clause of type {clause.label!r} has no tokens")
    if isinstance(encoder, HashedTextEncoder):
        return encoder.encode_tokens(clause.tokens)
    return encoder.encode([clause.text])[0]


def contract_rep(encoder, contract) -> np.ndarray:
    """Arithmetic mean of the contract's clause embeddings (not re-normalized)."""
    embeddings = []
    for clause in contract.clauses:
        if not clause.tokens:
            continue
        embeddings.append(encode_clause(encoder, clause))
    if not embeddings:
        raise EncodingError(f"contract {contract.id!r} has no encodable clauses")
    return np.mean(embeddings, axis=0)


def clause_type_rep(encoder, library, label: str, cache: dict | None = None) -> np.ndarray:
    """Mean embedding over all library clauses of the given type."""
    if cache is not None and label in cache:
        return cache[label]
    entries = library.entries(label)  # raises on unknown type
    rep = np.mean([encode_clause(encoder, e.clause) for e in entries], axis=0)
    if cache is not None:
        cache[label] = rep
    return rep


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]. Zero vectors are an error; callers pick fallbacks."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise EncodingError(f"cosine shape mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise EncodingError("cosine of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


class RepresentationIndex:
    """Precomputed contract and clause-type representations for one corpus.

    Acts as the on-disk representation cache: contract reps, type reps, and
    the encoder + corpus fingerprints they were computed from.
    """

    def __init__(self, encoder):
        self.encoder = encoder

    def fit(self, contracts, library) -> "RepresentationIndex":
        from .corpus import corpus_fingerprint

        self.contract_ids_ = [c.id for c in contracts]
        self.contract_reps_ = np.stack([contract_rep(self.encoder, c) for c in contracts])
        self.type_reps_ = {
            label: clause_type_rep(self.encoder, library, label) for label in library.labels()
        }
        self.type_sets_ = {c.id: c.type_labels() for c in contracts}
        self.corpus_fingerprint_ = corpus_fingerprint(contracts)
        return self

    def contract_rep(self, contract) -> np.ndarray:
        return contract_rep(self.encoder, contract)

    def type_rep(self, label: str) -> np.ndarray:
        try:
            return self.type_reps_[label]
        except KeyError:
            raise EncodingError(f"no representation for clause type {label!r}") from None

    def save(self, reps_path, meta_path) -> None:
        np.savez(
            reps_path,
            contract_reps=self.contract_reps_,
            **{f"type:{label}": rep for label, rep in self.type_reps_.items()},
        )
        meta = {
            "encoder": self.encoder.to_dict(),
            "encoder_fingerprint": self.encoder.fingerprint,
            "corpus_fingerprint": self.corpus_fingerprint_,
            "contract_ids": self.contract_ids_,
            "type_sets": {cid: sorted(v) for cid, v in self.type_sets_.items()},
        }
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True)

    @classmethod
    def load(cls, reps_path, meta_path) -> "RepresentationIndex":
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        encoder = encoder_from_dict(meta["encoder"])
        index = cls(encoder)
        data = np.load(reps_path)
        index.contract_reps_ = data["contract_reps"]
        index.type_reps_ = {
            key[len("type:") :]: data[key] for key in data.files if key.startswith("type:")
        }
        index.contract_ids_ = list(meta["contract_ids"])
        index.type_sets_ = {cid: set(v) for cid, v in meta["type_sets"].items()}
        index.corpus_fingerprint_ = meta["corpus_fingerprint"]
        if index.contract_reps_.shape[1] != encoder.dimension:
            raise EncodingError(
                f"stored reps have dimension {index.contract_reps_.shape[1]}, "
                f"encoder declares {encoder.dimension}"
            )
        return index
