"""Similarity-based clause content recommendation.

Ranks the clause library's entries of one clause type by cosine similarity
against a query vector built from the drafting contract: either the contract
representation alone (variant ``ct_only``) or its elementwise mean with the
target type representation (variant ``ct_plus_type``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Clause, ClauseLibrary
from .encoding import encode_clause

RETRIEVAL_VARIANTS = ("ct_only", "ct_plus_type")


class RetrievalError(ValueError):
    """Invalid retrieval query or unusable library state."""


@dataclass(frozen=True)
class RetrievalQuery:
    """One retrieval request.

    ``variant`` selects the query vector: ``ct_only`` uses ``contract_rep``
    as-is, ``ct_plus_type`` averages it with ``type_rep`` (which must then be
    provided). ``exclude_contract`` drops library clauses originating from
    that contract id, preventing self-retrieval during evaluation.
    """

    contract_rep: np.ndarray
    target: str
    top_n: int = 5
    variant: str = "ct_only"
    type_rep: np.ndarray | None = None
    exclude_contract: str | None = None

    def query_vector(self) -> np.ndarray:
        if self.variant not in RETRIEVAL_VARIANTS:
            raise RetrievalError(
                f"unknown variant {self.variant!r}; expected one of {RETRIEVAL_VARIANTS}"
            )
        if self.top_n < 1:
            raise RetrievalError(f"top_n must be >= 1, got {self.top_n}")
        vec = np.asarray(self.contract_rep, dtype=np.float64)
        if self.variant == "ct_plus_type":
            if self.type_rep is None:
                raise RetrievalError("variant ct_plus_type requires a type representation")
            type_rep = np.asarray(self.type_rep, dtype=np.float64)
            if type_rep.shape != vec.shape:
                raise RetrievalError(
                    f"type rep shape {type_rep.shape} != contract rep shape {vec.shape}"
                )
            vec = (vec + type_rep) / 2.0
        if np.linalg.norm(vec) == 0.0:
            raise RetrievalError("query vector is zero; nothing to compare against")
        return vec


@dataclass(frozen=True)
class RankedClause:
    """A library clause with its similarity score and 1-based rank."""

    clause: Clause
    score: float
    source_contract: str
    clause_index: int
    rank: int

    def to_dict(self) -> dict:
        return {
            "label": self.clause.label,
            "text": self.clause.text,
            "score": self.score,
            "source_contract": self.source_contract,
            "rank": self.rank,
        }


class ClauseRetriever:
    """Exhaustive cosine scorer over per-type clause vectors.

    ``fit`` encodes every library clause once; ``retrieve`` then scores a
    query against all candidates of the requested type. Results are sorted by
    descending similarity with ties broken by (source contract id, clause
    index), deduplicated on identical token streams keeping the higher-ranked
    occurrence, and cut to ``top_n``.
    """

    def __init__(self, encoder):
        self.encoder = encoder

    def fit(self, library: ClauseLibrary) -> "ClauseRetriever":
        self.entries_ = {}
        self.vectors_ = {}
        for label in library.labels():
            if not library.has(label):
                continue
            entries = library.entries(label)
            self.entries_[label] = entries
            self.vectors_[label] = np.stack(
                [encode_clause(self.encoder, e.clause) for e in entries]
            )
        return self

    def retrieve(self, query: RetrievalQuery) -> list[RankedClause]:
        if not hasattr(self, "entries_"):
            raise RetrievalError("retriever is not fitted; call fit(library) first")
        qvec = query.query_vector()
        if query.target not in self.entries_:
            known = ", ".join(sorted(self.entries_))
            raise RetrievalError(f"unknown clause type {query.target!r}; library has: {known}")
        entries = self.entries_[query.target]
        vectors = self.vectors_[query.target]
        keep = [
            i
            for i, e in enumerate(entries)
            if query.exclude_contract is None or e.contract_id != query.exclude_contract
        ]
        if not keep:
            raise RetrievalError(
                f"no candidate clauses of type {query.target!r} outside contract "
                f"{query.exclude_contract!r}"
            )
        candidates = [entries[i] for i in keep]
        mat = vectors[keep]
        norms = np.linalg.norm(mat, axis=1) * np.linalg.norm(qvec)
        scores = (mat @ qvec) / np.where(norms > 0.0, norms, 1.0)
        order = sorted(
            range(len(candidates)),
            key=lambda i: (-scores[i], candidates[i].contract_id, candidates[i].clause_index),
        )
        ranked = []
        seen_tokens = set()
        for i in order:
            entry = candidates[i]
            if entry.clause.tokens in seen_tokens:
                continue
            seen_tokens.add(entry.clause.tokens)
            ranked.append(
                RankedClause(
                    clause=entry.clause,
                    score=float(scores[i]),
                    source_contract=entry.contract_id,
                    clause_index=entry.clause_index,
                    rank=len(ranked) + 1,
                )
            )
            if len(ranked) == query.top_n:
                break
        return ranked


def retrieve(query: RetrievalQuery, library: ClauseLibrary, encoder) -> list[RankedClause]:
    """One-shot retrieval over an unfitted library (encodes candidates on the fly)."""
    return ClauseRetriever(encoder).fit(library).retrieve(query)
