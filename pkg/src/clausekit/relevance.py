"""Clause-type relevance prediction.

Three methods decide whether a clause type belongs in a contract:

* item-item collaborative filtering over a binary contract/clause-type
  incidence matrix,
* document similarity: look at the types present in the top-k most similar
  training contracts,
* a per-type binary MLP classifier over contract representations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import nn
from .corpus import Contract, DatasetSplit, TypeIndex
from .encoding import RepresentationIndex, contract_rep

SIMILARITY_MODES = ("as-printed", "standard-adjusted")

CF_METHOD = "cf"
DOCSIM_METHOD = "docsim"
CLASSIFIER_METHOD = "classifier"

CLASSIFIER_HIDDEN_DIMS = (512, 256, 128, 64, 32, 16)
CLASSIFIER_DROPOUT = 0.3
CLASSIFIER_THRESHOLD = 0.5


class RelevanceError(ValueError):
    """Invalid input to a relevance operation."""


@dataclass(frozen=True)
class RelevanceDecision:
    """One method's verdict on one (contract, clause type) pair."""

    target: str
    method: str
    score: float
    relevant: bool
    threshold_used: float | None = None
    k_used: int | None = None

    def to_dict(self) -> dict:
        out = {
            "target": self.target,
            "method": self.method,
            "score": self.score,
            "relevant": self.relevant,
        }
        if self.threshold_used is not None:
            out["threshold"] = self.threshold_used
        if self.k_used is not None:
            out["k"] = self.k_used
        return out


class IncidenceMatrix:
    """Binary contract x clause-type matrix with cached row/column means.

    Cell (u, i) is 1 iff contract u contains at least one clause of type i.
    The matrix is immutable after construction; means are computed once.
    """

    def __init__(self, matrix: np.ndarray, contract_ids: list[str], type_index: TypeIndex):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise RelevanceError(f"incidence matrix must be 2-d, got shape {matrix.shape}")
        if matrix.shape != (len(contract_ids), len(type_index)):
            raise RelevanceError(
                f"matrix shape {matrix.shape} does not match "
                f"{len(contract_ids)} contracts x {len(type_index)} types"
            )
        if not np.isin(matrix, (0.0, 1.0)).all():
            raise RelevanceError("incidence matrix cells must be 0 or 1")
        self.matrix = matrix
        self.contract_ids = list(contract_ids)
        self.type_index = type_index
        self.row_means = matrix.mean(axis=1)
        self.col_means = matrix.mean(axis=0)
        self._row_of = {cid: idx for idx, cid in enumerate(self.contract_ids)}

    @property
    def n_contracts(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_types(self) -> int:
        return self.matrix.shape[1]

    def row_index(self, contract_id: str) -> int:
        try:
            return self._row_of[contract_id]
        except KeyError:
            raise RelevanceError(f"unknown contract id {contract_id!r}") from None

    def row_for_contract(self, contract: Contract) -> np.ndarray:
        """Incidence row for a contract not in the matrix (types outside the index are ignored)."""
        row = np.zeros(self.n_types, dtype=np.float64)
        for label in contract.type_labels():
            if label in self.type_index:
                row[self.type_index.get(label).id] = 1.0
        return row

    def save(self, matrix_path, meta_path) -> None:
        np.savez(matrix_path, matrix=self.matrix)
        meta = {"contract_ids": self.contract_ids, "labels": self.type_index.labels}
        Path(meta_path).write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, matrix_path, meta_path) -> "IncidenceMatrix":
        meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
        matrix = np.load(matrix_path)["matrix"]
        return cls(matrix, meta["contract_ids"], TypeIndex(meta["labels"]))


class ItemSimilarityMatrix:
    """Pairwise clause-type similarities under one adjustment mode."""

    def __init__(self, values: np.ndarray, mode: str, corpus_fingerprint: str = ""):
        if mode not in SIMILARITY_MODES:
            raise RelevanceError(f"unknown similarity mode {mode!r}; expected one of {SIMILARITY_MODES}")
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise RelevanceError(f"similarity matrix must be square, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise RelevanceError("similarity matrix contains non-finite values")
        self.values = values
        self.mode = mode
        self.corpus_fingerprint = corpus_fingerprint

    def save(self, matrix_path, meta_path) -> None:
        np.savez(matrix_path, values=self.values)
        meta = {"mode": self.mode, "corpus_fingerprint": self.corpus_fingerprint}
        Path(meta_path).write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, matrix_path, meta_path) -> "ItemSimilarityMatrix":
        meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
        values = np.load(matrix_path)["values"]
        return cls(values, meta["mode"], meta.get("corpus_fingerprint", ""))


def build_incidence(contracts, type_index: TypeIndex | None = None) -> IncidenceMatrix:
    """Binary incidence matrix over the given contracts."""
    contracts = list(contracts)
    if not contracts:
        raise RelevanceError("cannot build an incidence matrix from an empty corpus")
    if type_index is None:
        labels = set()
        for contract in contracts:
            labels |= contract.type_labels()
        type_index = TypeIndex(labels)
    matrix = np.zeros((len(contracts), len(type_index)), dtype=np.float64)
    for u, contract in enumerate(contracts):
        for label in contract.type_labels():
            if label in type_index:
                matrix[u, type_index.get(label).id] = 1.0
    return IncidenceMatrix(matrix, [c.id for c in contracts], type_index)


def item_similarity(m: IncidenceMatrix, mode: str = "as-printed") -> ItemSimilarityMatrix:
    """Pairwise column similarities of the incidence matrix.

    In "as-printed" mode the numerator subtracts the row mean from the i-term
    and the column mean from the j-term, and the denominator uses raw sums of
    squares. "standard-adjusted" subtracts the row mean from both terms and
    normalizes by the mean-adjusted column norms. A zero denominator yields
    similarity 0.
    """
    if mode not in SIMILARITY_MODES:
        raise RelevanceError(f"unknown similarity mode {mode!r}; expected one of {SIMILARITY_MODES}")
    r = m.matrix
    if mode == "as-printed":
        i_term = r - m.row_means[:, None]
        j_term = r - m.col_means[None, :]
        numer = i_term.T @ j_term
        norms = np.sqrt((r * r).sum(axis=0))
    else:
        centered = r - m.row_means[:, None]
        numer = centered.T @ centered
        norms = np.sqrt((centered * centered).sum(axis=0))
    denom = np.outer(norms, norms)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(denom > 0.0, numer / np.where(denom > 0.0, denom, 1.0), 0.0)
    return ItemSimilarityMatrix(values, mode)


def cf_score_for_row(
    m: IncidenceMatrix, s: ItemSimilarityMatrix, row: np.ndarray, target_label: str
) -> float:
    """Collaborative-filtering score for one incidence row and target type.

    score = sum_{j != t} sim(t,j) * (r(u,j) - mean_j) / sum_{j != t} sim(t,j) + mean_t,
    falling back to mean_t when the similarity sum is exactly zero.
    """
    if s.values.shape[0] != m.n_types:
        raise RelevanceError(
            f"similarity matrix has {s.values.shape[0]} types, incidence matrix has {m.n_types}"
        )
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (m.n_types,):
        raise RelevanceError(f"incidence row has shape {row.shape}, expected ({m.n_types},)")
    t = m.type_index.get(target_label).id
    others = np.arange(m.n_types) != t
    sims = s.values[t, others]
    denom = sims.sum()
    if denom == 0.0:
        return float(m.col_means[t])
    numer = (sims * (row[others] - m.col_means[others])).sum()
    return float(numer / denom + m.col_means[t])


def cf_score(m: IncidenceMatrix, s: ItemSimilarityMatrix, contract_id: str, target_label: str) -> float:
    """Score for a contract already in the matrix; unknown ids are an error."""
    return cf_score_for_row(m, s, m.matrix[m.row_index(contract_id)], target_label)


def cf_predict(
    m: IncidenceMatrix,
    s: ItemSimilarityMatrix,
    contract: Contract,
    target_label: str,
    threshold: float,
) -> RelevanceDecision:
    """CF decision for a contract (seen or unseen): relevant iff score > threshold and the type is absent."""
    if contract.id in m._row_of:
        row = m.matrix[m.row_index(contract.id)]
    else:
        row = m.row_for_contract(contract)
    score = cf_score_for_row(m, s, row, target_label)
    present = row[m.type_index.get(target_label).id] == 1.0
    return RelevanceDecision(
        target=target_label,
        method=CF_METHOD,
        score=score,
        relevant=bool(score > threshold and not present),
        threshold_used=threshold,
    )


def docsim_predict(
    index: RepresentationIndex, contract: Contract, target_label: str, k: int
) -> RelevanceDecision:
    """Relevant iff the target type appears in at least one of the k most
    similar training contracts and is absent from the query.

    Score is the highest similarity among neighbors containing the type
    (0 when none do). Similarity ties break by contract id ascending.
    """
    if k < 1:
        raise RelevanceError(f"k must be >= 1, got {k}")
    reps = getattr(index, "contract_reps_", None)
    if reps is None or len(reps) == 0:
        raise RelevanceError("document-similarity index is empty; fit it on training contracts first")
    query = index.contract_rep(contract)
    norms = np.linalg.norm(reps, axis=1) * np.linalg.norm(query)
    sims = (reps @ query) / np.where(norms > 0.0, norms, 1.0)
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], index.contract_ids_[i]))
    neighbors = order[: min(k, len(order))]
    score = 0.0
    found = False
    for i in neighbors:
        if target_label in index.type_sets_[index.contract_ids_[i]]:
            found = True
            score = max(score, float(sims[i]))
    present = target_label in contract.type_labels()
    return RelevanceDecision(
        target=target_label,
        method=DOCSIM_METHOD,
        score=score,
        relevant=bool(found and not present),
        k_used=k,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


class RelevanceClassifier(BaseEstimator):
    """Binary MLP over contract representations, one model per clause type.

    Seven linear layers taper from the input dimension to a single logit,
    with ReLU and dropout after each hidden layer. Training minimizes binary
    cross entropy with Adam and keeps the weights from the epoch with the
    best validation accuracy. A probability strictly above 0.5 marks the
    target type relevant.

    Parameters
    ----------
    lr : learning rate for Adam.
    batch_size : minibatch size.
    max_epochs : upper bound on training epochs.
    patience : stop after this many validation checks without improvement
        (None disables early stopping).
    dropout : dropout probability after each hidden activation.
    hidden_dims : widths of the six hidden layers.
    seed : RNG seed covering init, shuffling, and dropout.
    """

    def __init__(
        self,
        lr: float = 1e-3,
        batch_size: int = 64,
        max_epochs: int = 500,
        patience: int | None = 50,
        dropout: float = CLASSIFIER_DROPOUT,
        hidden_dims: tuple = CLASSIFIER_HIDDEN_DIMS,
        seed: int = 0,
    ):
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.dropout = dropout
        self.hidden_dims = hidden_dims
        self.seed = seed

    def _build(self, input_dim: int, rng: np.random.Generator) -> nn.MLP:
        dims = [input_dim, *self.hidden_dims, 1]
        return nn.MLP(dims, dropout_p=self.dropout, rng=rng)

    def fit(self, X, y, X_val=None, y_val=None) -> "RelevanceClassifier":
        """Train on (X, y); validation data drives checkpointing and early stopping.

        Without explicit validation data the training set doubles as the
        validation set (fine for smoke use, not for model selection).
        """
        X = check_array(X, dtype=np.float32)
        y = np.asarray(y, dtype=np.float32).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise RelevanceError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        if X.shape[0] == 0:
            raise RelevanceError("cannot train a classifier on an empty dataset")
        if X_val is None:
            X_val, y_val = X, y
        else:
            X_val = check_array(X_val, dtype=np.float32)
            y_val = np.asarray(y_val, dtype=np.float32).reshape(-1)

        rng = np.random.default_rng(self.seed)
        model = self._build(X.shape[1], rng)
        params = model.parameters()
        opt = nn.Adam(params, lr=self.lr)

        best_state = model.state_arrays()
        best_acc = -1.0
        best_loss = float("inf")
        best_epoch = 0
        history = []
        stale = 0
        n = X.shape[0]
        for epoch in range(self.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                logits = model(nn.as_tensor(X[batch]), training=True, rng=rng)
                loss = nn.bce_with_logits(logits, y[batch])
                loss.backward()
                opt.step()
            val_acc, val_loss = self._evaluate(model, X_val, y_val)
            history.append(val_acc)
            # checkpoint on best accuracy; ties go to the lower validation loss
            if val_acc > best_acc or (val_acc == best_acc and val_loss < best_loss):
                best_state = model.state_arrays()
                best_epoch = epoch
                best_loss = min(best_loss, val_loss)
            if val_acc > best_acc:
                best_acc = val_acc
                stale = 0
            else:
                stale += 1
                if self.patience is not None and stale >= self.patience:
                    break

        model.load_state_arrays(best_state)
        self.model_ = model
        self.input_dim_ = X.shape[1]
        self.best_val_accuracy_ = best_acc
        self.best_epoch_ = best_epoch
        self.validation_history_ = history
        return self

    @staticmethod
    def _evaluate(model: nn.MLP, X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
        with nn.no_grad():
            logits = model(nn.as_tensor(X), training=False)
            loss = nn.bce_with_logits(logits, y)
        probs = _sigmoid(logits.data.reshape(-1).astype(np.float64))
        accuracy = float(((probs > CLASSIFIER_THRESHOLD) == (y > 0.5)).mean())
        return accuracy, float(loss.item())

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float32)
        if X.shape[1] != self.input_dim_:
            raise RelevanceError(
                f"input has dimension {X.shape[1]}, classifier was trained on {self.input_dim_}"
            )
        with nn.no_grad():
            logits = self.model_(nn.as_tensor(X), training=False)
        return _sigmoid(logits.data.reshape(-1).astype(np.float64))

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) > CLASSIFIER_THRESHOLD

    def state_arrays(self) -> dict[str, np.ndarray]:
        check_is_fitted(self, "model_")
        return self.model_.state_arrays()

    def load_state(self, input_dim: int, state: dict[str, np.ndarray]) -> "RelevanceClassifier":
        model = self._build(input_dim, np.random.default_rng(self.seed))
        model.load_state_arrays(state)
        self.model_ = model
        self.input_dim_ = input_dim
        return self

    def save(self, path, encoder_fingerprint: str, target: str = "", info: dict | None = None) -> None:
        check_is_fitted(self, "model_")
        params = self.get_params()
        params["hidden_dims"] = list(params["hidden_dims"])
        nn.save_model(
            path,
            model_kind="relevance-classifier",
            config=params,
            params=self.state_arrays(),
            encoder_fingerprint=encoder_fingerprint,
            extra={
                "input_dim": self.input_dim_,
                "target": target,
                "best_val_accuracy": getattr(self, "best_val_accuracy_", None),
                "info": info or {},
            },
        )

    @classmethod
    def load(cls, path, encoder_fingerprint: str | None = None) -> "RelevanceClassifier":
        payload = nn.load_model(path, expected_kind="relevance-classifier")
        if encoder_fingerprint is not None and payload["encoder_fingerprint"] != encoder_fingerprint:
            raise RelevanceError(
                "classifier was trained against a different encoder "
                f"(stored fingerprint {payload['encoder_fingerprint'][:12]}..., "
                f"current {encoder_fingerprint[:12]}...)"
            )
        config = dict(payload["config"])
        config["hidden_dims"] = tuple(config["hidden_dims"])
        clf = cls(**config)
        return clf.load_state(int(payload["extra"]["input_dim"]), payload["params"])


def classifier_predict(clf: RelevanceClassifier, rep: np.ndarray, target_label: str) -> RelevanceDecision:
    """Classifier decision for a single contract representation."""
    prob = float(clf.predict_proba(np.asarray(rep, dtype=np.float32).reshape(1, -1))[0])
    return RelevanceDecision(
        target=target_label,
        method=CLASSIFIER_METHOD,
        score=prob,
        relevant=bool(prob > CLASSIFIER_THRESHOLD),
        threshold_used=CLASSIFIER_THRESHOLD,
    )


def featurize_split(split: DatasetSplit, encoder, part: str) -> tuple[np.ndarray, np.ndarray]:
    """Contract representations and binary labels for one split part."""
    examples = getattr(split, part)
    if not examples:
        raise RelevanceError(f"split has no {part} examples")
    X = np.stack([contract_rep(encoder, ex.contract) for ex in examples])
    y = np.array([1.0 if ex.is_relevant() else 0.0 for ex in examples])
    return X.astype(np.float32), y


def train_classifier(
    split: DatasetSplit,
    encoder,
    lrs=(1e-3,),
    batch_size: int = 64,
    max_epochs: int = 500,
    patience: int | None = 50,
    seed: int = 0,
) -> tuple[RelevanceClassifier, dict]:
    """Train one classifier per learning rate and keep the best by validation accuracy."""
    if not lrs:
        raise RelevanceError("need at least one learning rate")
    X_train, y_train = featurize_split(split, encoder, "train")
    X_val, y_val = featurize_split(split, encoder, "validation")
    best = None
    sweep = []
    for lr in lrs:
        clf = RelevanceClassifier(
            lr=lr, batch_size=batch_size, max_epochs=max_epochs, patience=patience, seed=seed
        )
        clf.fit(X_train, y_train, X_val, y_val)
        sweep.append({"lr": lr, "val_accuracy": clf.best_val_accuracy_, "best_epoch": clf.best_epoch_})
        if best is None or clf.best_val_accuracy_ > best.best_val_accuracy_:
            best = clf
    info = {"target": split.target.label, "sweep": sweep, "chosen_lr": best.lr}
    return best, info
