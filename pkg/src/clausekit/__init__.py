"""Contract clause recommendation toolkit.

Two-stage pipeline: predict which clause types are relevant to a partially
drafted contract (collaborative filtering, document similarity, or a binary
classifier per type), then recommend content for a chosen type (similarity
retrieval from a clause library, or a conditioned transformer decoder).
"""

from .corpus import (
    Clause,
    ClauseLibrary,
    ClauseTypeId,
    Contract,
    CorpusError,
    DatasetSplit,
    ProxyExample,
    TypeIndex,
    build_proxy_dataset,
    ingest,
    preprocess,
)
from .encoding import (
    EncodingError,
    ExternalEncoderClient,
    HashedTextEncoder,
    RepresentationIndex,
    clause_type_rep,
    contract_rep,
    cosine,
    encode_clause,
)
from .evaluation import RougeScores, classification_metrics, rouge
from .generation import ClauseGenerator, GenerationError, Vocabulary, condition
from .relevance import (
    IncidenceMatrix,
    ItemSimilarityMatrix,
    RelevanceClassifier,
    RelevanceDecision,
    RelevanceError,
    build_incidence,
    cf_predict,
    cf_score,
    classifier_predict,
    docsim_predict,
    item_similarity,
    train_classifier,
)
from .retrieval import ClauseRetriever, RankedClause, RetrievalError, RetrievalQuery, retrieve

__version__ = "0.1.0"

__all__ = [
    "Clause",
    "ClauseGenerator",
    "ClauseLibrary",
    "ClauseRetriever",
    "ClauseTypeId",
    "Contract",
    "CorpusError",
    "DatasetSplit",
    "EncodingError",
    "ExternalEncoderClient",
    "GenerationError",
    "HashedTextEncoder",
    "IncidenceMatrix",
    "ItemSimilarityMatrix",
    "ProxyExample",
    "RankedClause",
    "RelevanceClassifier",
    "RelevanceDecision",
    "RelevanceError",
    "RepresentationIndex",
    "RetrievalError",
    "RetrievalQuery",
    "RougeScores",
    "TypeIndex",
    "Vocabulary",
    "build_incidence",
    "build_proxy_dataset",
    "cf_predict",
    "cf_score",
    "classification_metrics",
    "classifier_predict",
    "clause_type_rep",
    "condition",
    "contract_rep",
    "cosine",
    "docsim_predict",
    "encode_clause",
    "ingest",
    "item_similarity",
    "preprocess",
    "retrieve",
    "rouge",
    "train_classifier",
]
