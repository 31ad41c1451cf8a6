"""Metric tests anchored on hand-computed values and brute-force oracles."""

from functools import lru_cache

import numpy as np
import pytest

from clausekit.corpus import Clause, Contract, ClauseTypeId, ProxyExample, RELEVANT, NOT_RELEVANT
from clausekit.evaluation import (
    ConfusionCounts,
    EvaluationError,
    RougeScores,
    classification_metrics,
    evaluate_generation,
    evaluate_relevance,
    mean_rouge,
    render_generation_table,
    render_relevance_table,
    render_report_json,
    report_row,
    rouge,
)


def oracle_ngram_overlap(candidate, reference, n):
    """Clipped multiset n-gram overlap computed with explicit dict loops."""
    def grams(seq):
        out = {}
        for i in range(len(seq) - n + 1):
            g = tuple(seq[i : i + n])
            out[g] = out.get(g, 0) + 1
        return out

    c, r = grams(candidate), grams(reference)
    if not c or not r:
        return (0.0, 0.0, 0.0)
    overlap = 0
    for g, count in c.items():
        overlap += min(count, r.get(g, 0))
    p = overlap / sum(c.values())
    rec = overlap / sum(r.values())
    f1 = 0.0 if p + rec == 0 else 2 * p * rec / (p + rec)
    return (p, rec, f1)


def oracle_lcs(a, b):
    """Recursive memoized longest common subsequence length."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def oracle_rouge_l(candidate, reference):
    if not candidate or not reference:
        return (0.0, 0.0, 0.0)
    lcs = oracle_lcs(candidate, reference)
    p, r = lcs / len(candidate), lcs / len(reference)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return (p, r, f1)


class TestClassificationMetrics:
    def test_perfect_predictor(self):
        m = classification_metrics(ConfusionCounts(tp=1, fp=0, tn=1, fn=0))
        assert m == {"precision": 1.0, "recall": 1.0, "accuracy": 1.0, "f1": 1.0}

    def test_zero_denominator_precision(self):
        m = classification_metrics(ConfusionCounts(tp=0, fp=0, tn=3, fn=2))
        assert m["precision"] == 0.0
        assert m["f1"] == 0.0

    def test_hand_computed_example(self):
        m = classification_metrics(ConfusionCounts(tp=3, fp=1, tn=4, fn=2))
        assert m["precision"] == pytest.approx(0.75)
        assert m["recall"] == pytest.approx(0.6)
        assert m["accuracy"] == pytest.approx(0.7)
        assert m["f1"] == pytest.approx(2 * (0.75 * 0.6) / 1.35)

    def test_counts_sum_to_total(self):
        c = ConfusionCounts(tp=2, fp=3, tn=4, fn=1)
        assert c.total == 10

    def test_negative_counts_rejected(self):
        with pytest.raises(EvaluationError):
            ConfusionCounts(tp=-1)

    def test_add_routes_to_correct_cell(self):
        c = ConfusionCounts()
        c = c.add(True, True).add(True, False).add(False, False).add(False, True)
        assert (c.tp, c.fp, c.tn, c.fn) == (1, 1, 1, 1)


class TestRouge:
    def test_identical_sequences_score_one(self):
        s = rouge(["aa", "bb", "cc"], ["aa", "bb", "cc"])
        assert s.r1[2] == 1.0 and s.r2[2] == 1.0 and s.rl[2] == 1.0

    def test_disjoint_sequences_score_zero(self):
        s = rouge(["aa", "bb"], ["cc", "dd"])
        assert s.r1 == (0.0, 0.0, 0.0)
        assert s.r2 == (0.0, 0.0, 0.0)
        assert s.rl == (0.0, 0.0, 0.0)

    def test_hand_computed_example(self):
        candidate = ["the", "cat", "sat"]
        reference = ["the", "cat", "sat", "on", "the", "mat"]
        s = rouge(candidate, reference)
        # unigrams: all 3 candidate tokens hit; reference holds 6 (with "the" twice)
        assert s.r1[0] == pytest.approx(1.0)
        assert s.r1[1] == pytest.approx(0.5)
        assert s.r1[2] == pytest.approx(2 * 0.5 / 1.5)
        # bigrams: 2 of 2 candidate bigrams hit, reference holds 5
        assert s.r2[0] == pytest.approx(1.0)
        assert s.r2[1] == pytest.approx(0.4)
        assert s.r2[2] == pytest.approx(2 * 0.4 / 1.4)
        # LCS is the whole candidate
        assert s.rl[0] == pytest.approx(1.0)
        assert s.rl[1] == pytest.approx(0.5)
        assert s.rl[2] == pytest.approx(2 * 0.5 / 1.5)

    def test_empty_sides_score_zero(self):
        assert rouge([], ["aa"]).r1 == (0.0, 0.0, 0.0)
        assert rouge(["aa"], []).rl == (0.0, 0.0, 0.0)

    def test_matches_brute_force_oracles_exactly(self):
        rng = np.random.default_rng(13)
        alphabet = [f"w{i}" for i in range(6)]
        for _ in range(50):
            cand = [alphabet[int(i)] for i in rng.integers(0, 6, size=int(rng.integers(0, 13)))]
            ref = [alphabet[int(i)] for i in rng.integers(0, 6, size=int(rng.integers(0, 13)))]
            s = rouge(cand, ref)
            assert s.r1 == oracle_ngram_overlap(cand, ref, 1)
            assert s.r2 == oracle_ngram_overlap(cand, ref, 2)
            assert s.rl == oracle_rouge_l(cand, ref)

    def test_f1_bounded_by_max_component(self):
        rng = np.random.default_rng(17)
        alphabet = ["x", "y", "z"]
        for _ in range(30):
            cand = [alphabet[int(i)] for i in rng.integers(0, 3, size=int(rng.integers(1, 10)))]
            ref = [alphabet[int(i)] for i in rng.integers(0, 3, size=int(rng.integers(1, 10)))]
            s = rouge(cand, ref)
            for p, r, f1 in (s.r1, s.r2, s.rl):
                assert f1 <= max(p, r) + 1e-12

    def test_mean_rouge_componentwise(self):
        a = RougeScores((1.0, 0.5, 0.6), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        b = RougeScores((0.0, 0.5, 0.2), (1.0, 1.0, 1.0), (0.0, 0.0, 0.0))
        m = mean_rouge([a, b])
        assert m.r1 == (0.5, 0.5, pytest.approx(0.4))
        assert m.r2 == (0.5, 0.5, 0.5)
        assert m.rl == (0.5, 0.5, 0.5)

    def test_mean_rouge_empty_raises(self):
        with pytest.raises(EvaluationError):
            mean_rouge([])


def make_example(idx, relevant):
    target = ClauseTypeId(0, "target")
    clause = Clause.make("target", f"held out clause body {idx}")
    contract = Contract(id=f"c{idx}", clauses=(Clause.make("other", f"other body {idx}"),))
    if relevant:
        return ProxyExample(contract, target, RELEVANT, clause)
    return ProxyExample(contract, target, NOT_RELEVANT, None)


class TestEvaluateRelevance:
    def test_perfect_predictor_scores_one(self):
        examples = [make_example(i, i % 2 == 0) for i in range(10)]
        m = evaluate_relevance(lambda ex: ex.is_relevant(), examples)
        assert m["f1"] == 1.0 and m["accuracy"] == 1.0

    def test_permutation_invariant(self):
        examples = [make_example(i, i % 3 == 0) for i in range(12)]
        decide = lambda ex: int(ex.contract.id[1:]) % 2 == 0
        forward = evaluate_relevance(decide, examples)
        backward = evaluate_relevance(decide, list(reversed(examples)))
        assert forward == backward

    def test_empty_split_raises(self):
        with pytest.raises(EvaluationError):
            evaluate_relevance(lambda ex: True, [])

    def test_confusion_cells_included(self):
        examples = [make_example(i, i < 3) for i in range(6)]
        m = evaluate_relevance(lambda ex: True, examples)
        assert (m["tp"], m["fp"], m["tn"], m["fn"]) == (3, 3, 0, 0)


class TestEvaluateGeneration:
    def test_echoing_reference_scores_one(self):
        examples = [make_example(i, True) for i in range(4)]
        m = evaluate_generation(lambda ex: list(ex.held_out_clause.tokens), examples)
        assert m["rouge1"]["f1"] == 1.0
        assert m["examples"] == 4

    def test_irrelevant_examples_are_skipped(self):
        examples = [make_example(0, True), make_example(1, False)]
        m = evaluate_generation(lambda ex: list(ex.held_out_clause.tokens), examples)
        assert m["examples"] == 1

    def test_no_relevant_examples_raises(self):
        with pytest.raises(EvaluationError):
            evaluate_generation(lambda ex: [], [make_example(0, False)])


class TestReports:
    def rows(self):
        return [
            report_row(
                "relevance",
                "governing laws",
                "cf",
                {"precision": 0.5, "recall": 1.0, "accuracy": 0.75, "f1": 2 / 3},
                "fp-1",
            ),
            report_row(
                "generation",
                "governing laws",
                "retrieval-ct_only",
                rouge(["aa"], ["aa", "bb"]).to_dict(),
                "fp-1",
            ),
        ]

    def test_unknown_task_rejected(self):
        with pytest.raises(EvaluationError):
            report_row("ranking", "x", "m", {}, "fp")

    def test_canonical_json_is_stable_under_key_order(self):
        row_a = {"task": "relevance", "clause_type": "x", "method": "cf", "metrics": {"f1": 1.0, "accuracy": 1.0}, "config_fingerprint": "fp"}
        row_b = {"config_fingerprint": "fp", "metrics": {"accuracy": 1.0, "f1": 1.0}, "method": "cf", "clause_type": "x", "task": "relevance"}
        assert render_report_json([row_a]) == render_report_json([row_b])

    def test_canonical_json_has_no_whitespace(self):
        text = render_report_json(self.rows())
        assert ": " not in text and ", " not in text

    def test_relevance_table_alignment(self):
        table = render_relevance_table([r for r in self.rows() if r["task"] == "relevance"])
        lines = table.splitlines()
        assert lines[0].startswith("clause type")
        assert "0.6667" in table

    def test_generation_table_contains_scores(self):
        table = render_generation_table([r for r in self.rows() if r["task"] == "generation"])
        assert "retrieval-ct_only" in table
        assert "rouge1-f1" in table
