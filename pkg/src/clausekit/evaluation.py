"""Metrics and report emission.

Classification metrics (precision, recall, accuracy, F1) for the relevance
methods and ROUGE (1, 2, L) for content recommendation, aggregated over a
held-out split and serialized both as aligned text tables and as canonical
JSON rows. Report JSON is emitted with sorted keys and no timestamps so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np


class EvaluationError(ValueError):
    """Invalid evaluation input."""


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts; the four cells sum to the number of examples."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name, value in (("tp", self.tp), ("fp", self.fp), ("tn", self.tn), ("fn", self.fn)):
            if value < 0:
                raise EvaluationError(f"{name} must be nonnegative, got {value}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, predicted: bool, actual: bool) -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + (predicted and actual),
            fp=self.fp + (predicted and not actual),
            tn=self.tn + (not predicted and not actual),
            fn=self.fn + (not predicted and actual),
        )


def classification_metrics(c: ConfusionCounts) -> dict:
    """Precision, recall, accuracy, F1 with the zero-denominator-means-zero convention."""

    def ratio(num, den):
        return num / den if den > 0 else 0.0

    precision = ratio(c.tp, c.tp + c.fp)
    recall = ratio(c.tp, c.tp + c.fn)
    accuracy = ratio(c.tp + c.tn, c.total)
    f1 = ratio(2 * precision * recall, precision + recall)
    return {"precision": precision, "recall": recall, "accuracy": accuracy, "f1": f1}


@dataclass(frozen=True)
class RougeScores:
    """ROUGE-1/2/L, each as (precision, recall, f1)."""

    r1: tuple
    r2: tuple
    rl: tuple

    def to_dict(self) -> dict:
        return {
            "rouge1": dict(zip(("precision", "recall", "f1"), self.r1)),
            "rouge2": dict(zip(("precision", "recall", "f1"), self.r2)),
            "rougeL": dict(zip(("precision", "recall", "f1"), self.rl)),
        }


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _ngram_scores(candidate, reference, n: int) -> tuple:
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    if not cand or not ref:
        return (0.0, 0.0, 0.0)
    overlap = sum((cand & ref).values())
    precision = overlap / sum(cand.values())
    recall = overlap / sum(ref.values())
    return (precision, recall, _f1(precision, recall))


def _lcs_length(a, b) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge(candidate, reference) -> RougeScores:
    """ROUGE-1/2 via clipped n-gram multiset overlap, ROUGE-L via LCS F-measure.

    Precision normalizes by the candidate's n-gram count, recall by the
    reference's; an empty candidate or reference scores zero everywhere.
    """
    candidate = list(candidate)
    reference = list(reference)
    if not candidate or not reference:
        zero = (0.0, 0.0, 0.0)
        return RougeScores(zero, zero, zero)
    lcs = _lcs_length(candidate, reference)
    lp = lcs / len(candidate)
    lr = lcs / len(reference)
    return RougeScores(
        r1=_ngram_scores(candidate, reference, 1),
        r2=_ngram_scores(candidate, reference, 2),
        rl=(lp, lr, _f1(lp, lr)),
    )


def mean_rouge(scores) -> RougeScores:
    """Componentwise arithmetic mean of RougeScores."""
    scores = list(scores)
    if not scores:
        raise EvaluationError("cannot average an empty list of scores")

    def avg(pick):
        block = np.array([pick(s) for s in scores], dtype=np.float64)
        return tuple(float(x) for x in block.mean(axis=0))

    return RougeScores(avg(lambda s: s.r1), avg(lambda s: s.r2), avg(lambda s: s.rl))


def evaluate_relevance(decide, examples) -> dict:
    """Run ``decide(example) -> bool`` over a split part and aggregate metrics.

    ``examples`` are proxy examples whose ``is_relevant()`` gives the ground
    truth. Returns the metrics dict plus the confusion cells.
    """
    examples = list(examples)
    if not examples:
        raise EvaluationError("cannot evaluate on an empty test split")
    counts = ConfusionCounts()
    for example in examples:
        counts = counts.add(bool(decide(example)), example.is_relevant())
    metrics = classification_metrics(counts)
    metrics.update({"tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn})
    return metrics


def evaluate_generation(produce, examples) -> dict:
    """Run ``produce(example) -> candidate tokens`` over the relevant test
    examples and average ROUGE against each held-out clause."""
    examples = [ex for ex in examples if ex.is_relevant() and ex.held_out_clause is not None]
    if not examples:
        raise EvaluationError("no relevant examples with held-out clauses to evaluate")
    scores = [rouge(produce(ex), ex.held_out_clause.tokens) for ex in examples]
    averaged = mean_rouge(scores)
    out = averaged.to_dict()
    out["examples"] = len(examples)
    return out


def report_row(task: str, clause_type: str, method: str, metrics: dict, config_fingerprint: str) -> dict:
    if task not in ("relevance", "generation"):
        raise EvaluationError(f"unknown task {task!r}")
    return {
        "task": task,
        "clause_type": clause_type,
        "method": method,
        "metrics": metrics,
        "config_fingerprint": config_fingerprint,
    }


def render_report_json(rows) -> str:
    """Canonical JSON for a report: sorted keys, no whitespace, no timestamps."""
    return json.dumps(list(rows), sort_keys=True, separators=(",", ":"))


def render_relevance_table(rows) -> str:
    """Aligned text table for relevance rows."""
    header = ("clause type", "method", "precision", "recall", "accuracy", "f1")
    body = []
    for row in rows:
        m = row["metrics"]
        body.append(
            (
                row["clause_type"],
                row["method"],
                f"{m['precision']:.4f}",
                f"{m['recall']:.4f}",
                f"{m['accuracy']:.4f}",
                f"{m['f1']:.4f}",
            )
        )
    return _render_table(header, body)


def render_generation_table(rows) -> str:
    """Aligned text table for generation/retrieval ROUGE rows."""
    header = ("clause type", "method", "rouge1-f1", "rouge2-f1", "rougeL-f1")
    body = []
    for row in rows:
        m = row["metrics"]
        body.append(
            (
                row["clause_type"],
                row["method"],
                f"{m['rouge1']['f1']:.4f}",
                f"{m['rouge2']['f1']:.4f}",
                f"{m['rougeL']['f1']:.4f}",
            )
        )
    return _render_table(header, body)


def _render_table(header, body) -> str:
    widths = [len(h) for h in header]
    for row in body:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
