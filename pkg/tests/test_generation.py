"""Generator tests: vocabulary, conditioning, decoder mechanics, training."""

import math

import numpy as np
import pytest

from clausekit import nn
from clausekit.corpus import Clause, ClauseLibrary, Contract, TypeIndex, build_proxy_dataset
from clausekit.encoding import HashedTextEncoder
from clausekit.generation import (
    ClauseGenerator,
    GenerationError,
    TransformerDecoder,
    Vocabulary,
    condition,
    pairs_from_split,
    sinusoidal_positions,
)


class TestVocabulary:
    def test_min_frequency_one_admits_all(self):
        vocab = Vocabulary.build([["aa", "bb"], ["aa", "cc"]], min_frequency=1)
        assert len(vocab) == 4 + 3
        # aa has frequency 2 → first content id; bb/cc tie broken lexicographically
        assert vocab.encode(["aa", "bb", "cc"]) == [4, 5, 6]

    def test_min_frequency_two_maps_rare_tokens_to_unk(self):
        vocab = Vocabulary.build([["aa", "bb"], ["aa", "cc"]], min_frequency=2)
        assert len(vocab) == 4 + 1
        assert vocab.encode(["aa", "bb"]) == [4, Vocabulary.UNK]

    def test_rebuild_is_deterministic(self):
        seqs = [["gamma", "alpha"], ["alpha", "beta"], ["beta", "alpha"]]
        a = Vocabulary.build(seqs, 1)
        b = Vocabulary.build(list(seqs), 1)
        assert a.encode(["alpha", "beta", "gamma"]) == b.encode(["alpha", "beta", "gamma"])

    def test_decode_skips_control_ids_keeps_unk(self):
        vocab = Vocabulary.build([["aa", "aa"]], 1)
        ids = [Vocabulary.SOS, 4, Vocabulary.UNK, Vocabulary.EOS, Vocabulary.PAD]
        assert vocab.decode(ids) == ["aa", "<unk>"]

    def test_decode_out_of_range_raises(self):
        vocab = Vocabulary.build([["aa", "aa"]], 1)
        with pytest.raises(GenerationError):
            vocab.decode([99])

    def test_specials_distinct_and_reserved(self):
        vocab = Vocabulary.build([["aa", "aa"]], 1)
        assert len({Vocabulary.PAD, Vocabulary.UNK, Vocabulary.SOS, Vocabulary.EOS}) == 4
        assert "<pad>" in vocab and "<sos>" in vocab

    def test_roundtrip_through_dict(self):
        vocab = Vocabulary.build([["zz", "yy", "zz"]], 1)
        clone = Vocabulary.from_dict(vocab.to_dict())
        assert clone.encode(["zz", "yy"]) == vocab.encode(["zz", "yy"])

    def test_empty_training_raises(self):
        with pytest.raises(GenerationError):
            Vocabulary.build([], 1)


class TestCondition:
    def test_identical_inputs_return_same_vector(self):
        rep = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(condition(rep, rep), rep)

    def test_elementwise_mean(self):
        np.testing.assert_array_equal(
            condition(np.array([1.0, 0.0]), np.array([0.0, 1.0])), [0.5, 0.5]
        )

    def test_commutative(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=8), rng.normal(size=8)
        np.testing.assert_array_equal(condition(a, b), condition(b, a))

    def test_dimension_mismatch_raises(self):
        with pytest.raises(GenerationError):
            condition(np.ones(3), np.ones(4))


class TestPositionalEncoding:
    def test_shape_and_range(self):
        table = sinusoidal_positions(50, 16)
        assert table.shape == (50, 16)
        assert np.abs(table).max() <= 1.0

    def test_position_zero_alternates_zero_one(self):
        table = sinusoidal_positions(4, 8)
        np.testing.assert_allclose(table[0, 0::2], 0.0, atol=1e-7)
        np.testing.assert_allclose(table[0, 1::2], 1.0, atol=1e-7)

    def test_rows_are_distinct(self):
        table = sinusoidal_positions(20, 12)
        assert len({tuple(np.round(row, 6)) for row in table}) == 20


def tiny_decoder(vocab=11, hidden=8, layers=1, heads=2, max_len=16, seed=0, dtype=np.float64):
    rng = np.random.default_rng(seed)
    return TransformerDecoder(vocab, hidden, layers, heads, 0.0, max_len, rng, dtype)


class TestDecoderMechanics:
    def test_output_shape(self):
        model = tiny_decoder()
        ids = np.array([[2, 4, 5], [2, 6, 3]])
        memory = np.random.default_rng(1).normal(size=(2, 1, 8))
        logits = model(ids, memory)
        assert logits.data.shape == (2, 3, 11)

    def test_memory_must_be_single_vector(self):
        model = tiny_decoder()
        ids = np.array([[2, 4]])
        with pytest.raises(GenerationError):
            model(ids, np.zeros((1, 2, 8)))

    def test_memory_dimension_mismatch_raises(self):
        model = tiny_decoder()
        with pytest.raises(GenerationError):
            model(np.array([[2, 4]]), np.zeros((1, 1, 9)))

    def test_sequence_longer_than_max_len_raises(self):
        model = tiny_decoder(max_len=4)
        with pytest.raises(GenerationError):
            model(np.array([[2, 4, 5, 6, 7]]), np.zeros((1, 1, 8)))

    def test_causality_is_exact(self):
        model = tiny_decoder(seed=3)
        rng = np.random.default_rng(4)
        memory = rng.normal(size=(1, 1, 8))
        ids = np.array([[2, 4, 5, 6, 7, 8]])
        base = model(ids, memory).data.copy()
        for t in range(1, ids.shape[1]):
            perturbed = ids.copy()
            perturbed[0, t] = (perturbed[0, t] + 1) % 11
            out = model(perturbed, memory).data
            np.testing.assert_array_equal(out[0, :t], base[0, :t])
            assert np.abs(out[0, t:] - base[0, t:]).max() > 0

    def test_distinct_memories_change_first_step_logits(self):
        model = tiny_decoder(seed=5)
        rng = np.random.default_rng(6)
        ids = np.array([[2]])
        a = model(ids, rng.normal(size=(1, 1, 8))).data
        b = model(ids, rng.normal(size=(1, 1, 8))).data
        assert np.abs(a - b).max() > 1e-8

    def test_gradcheck_against_finite_differences(self):
        model = tiny_decoder(seed=7)
        rng = np.random.default_rng(8)
        memory = rng.normal(size=(1, 1, 8))
        inputs = np.array([[2, 5, 7, 4]])
        targets = np.array([[5, 7, 4, 3]])

        def loss_tensor():
            logits = model(inputs, memory)
            flat = nn.reshape(logits, (-1, 11))
            return nn.cross_entropy_with_logits(flat, targets.reshape(-1))

        loss = loss_tensor()
        loss.backward()
        h = 1e-5
        worst = 0.0
        for _, param in model.named_parameters():
            analytic = param.grad.copy()
            flat_data = param.data.reshape(-1)
            numeric = np.zeros_like(flat_data)
            for i in range(flat_data.size):
                orig = flat_data[i]
                flat_data[i] = orig + h
                with nn.no_grad():
                    up = loss_tensor().item()
                flat_data[i] = orig - h
                with nn.no_grad():
                    down = loss_tensor().item()
                flat_data[i] = orig
                numeric[i] = (up - down) / (2 * h)
            numeric = numeric.reshape(param.data.shape)
            # gradients below 1e-6 on both sides are zero up to finite-difference noise
            denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-6)
            worst = max(worst, float((np.abs(analytic - numeric) / denom).max()))
        assert worst < 1e-3


def toy_pairs(n=6, hidden=16, length=5, vocab_words=8, seed=0):
    rng = np.random.default_rng(seed)
    words = [f"tok{i:02d}" for i in range(vocab_words)]
    pairs = []
    for i in range(n):
        memory = rng.normal(size=hidden)
        tokens = [words[int(rng.integers(vocab_words))] for _ in range(length)]
        pairs.append((memory, tokens))
    return pairs


class TestClauseGeneratorTraining:
    def test_first_batch_loss_near_log_vocab(self):
        pairs = toy_pairs(n=16, hidden=16, vocab_words=10, seed=1)
        gen = ClauseGenerator(
            hidden=16, layers=1, heads=2, lr=1e-4, batch_size=16, max_epochs=1,
            min_frequency=1, max_len=32, seed=0,
        )
        gen.fit(pairs)
        expected = math.log(len(gen.vocab_))
        assert abs(gen.first_batch_loss_ - expected) / expected < 0.10

    def test_same_seed_identical_loss_traces(self):
        pairs = toy_pairs(seed=2)
        traces = []
        for _ in range(2):
            gen = ClauseGenerator(
                hidden=16, layers=1, heads=2, lr=1e-3, batch_size=4, max_epochs=5,
                min_frequency=1, max_len=32, seed=9,
            )
            gen.fit(pairs)
            traces.append(gen.loss_history_)
        assert traces[0] == traces[1]

    def test_memorizes_small_dataset(self):
        pairs = toy_pairs(n=6, hidden=16, length=4, vocab_words=6, seed=3)
        gen = ClauseGenerator(
            hidden=16, layers=2, heads=2, lr=3e-3, batch_size=6, max_epochs=400,
            max_steps=400, min_frequency=1, max_len=16, seed=4,
        )
        gen.fit(pairs)
        result = gen.score(pairs)
        assert result["token_accuracy"] >= 0.95

    def test_single_pair_greedy_reproduction(self):
        tokens = ["omega", "kappa", "sigma", "delta"]
        memory = np.random.default_rng(5).normal(size=16)
        gen = ClauseGenerator(
            hidden=16, layers=1, heads=2, lr=5e-3, batch_size=1, max_epochs=200,
            max_steps=200, min_frequency=1, max_len=16, seed=6,
        )
        gen.fit([(memory, tokens)])
        out = gen.generate(memory)
        assert list(out.tokens) == tokens
        assert not out.truncated
        assert out.text == "omega kappa sigma delta"

    def test_long_clauses_dropped(self):
        short = (np.zeros(16), ["aa", "bb"])
        long = (np.zeros(16), ["cc"] * 20)
        gen = ClauseGenerator(
            hidden=16, layers=1, heads=2, lr=1e-3, batch_size=2, max_epochs=1,
            min_frequency=1, max_len=10, seed=0,
        )
        gen.fit([short, long, short])
        assert gen.dropped_long_clauses_ == 1

    def test_all_clauses_too_long_raises(self):
        gen = ClauseGenerator(hidden=8, layers=1, heads=2, max_len=4, min_frequency=1)
        with pytest.raises(GenerationError):
            gen.fit([(np.zeros(8), ["aa"] * 10)])

    def test_empty_training_raises(self):
        with pytest.raises(GenerationError):
            ClauseGenerator(hidden=8).fit([])

    def test_memory_dimension_mismatch_raises(self):
        gen = ClauseGenerator(hidden=8, layers=1, heads=2, min_frequency=1)
        with pytest.raises(GenerationError):
            gen.fit([(np.zeros(9), ["aa", "bb"])])


class TestGenerate:
    def make_fitted(self, **overrides):
        params = dict(
            hidden=16, layers=1, heads=2, lr=1e-3, batch_size=4, max_epochs=3,
            min_frequency=1, max_len=12, seed=1,
        )
        params.update(overrides)
        gen = ClauseGenerator(**params)
        gen.fit(toy_pairs(n=8, hidden=params["hidden"], length=4, seed=7))
        return gen

    def test_max_len_two_forces_empty_content(self):
        gen = self.make_fitted()
        out = gen.generate(np.zeros(16), max_len=2)
        assert out.tokens == ()
        assert out.text == ""

    def test_greedy_is_deterministic(self):
        gen = self.make_fitted()
        memory = np.random.default_rng(8).normal(size=16)
        assert gen.generate(memory) == gen.generate(memory)

    def test_top_k_sampling_is_seed_deterministic(self):
        gen = self.make_fitted()
        memory = np.random.default_rng(9).normal(size=16)
        a = gen.generate(memory, mode="top_k", top_k=3, seed=11)
        b = gen.generate(memory, mode="top_k", top_k=3, seed=11)
        assert a == b

    def test_generated_ids_within_vocab_and_length_bound(self):
        gen = self.make_fitted()
        for seed in range(5):
            memory = np.random.default_rng(seed).normal(size=16)
            out = gen.generate(memory, mode="top_k", top_k=5, seed=seed)
            assert len(out.token_ids) <= gen.max_len - 2
            assert all(0 <= i < len(gen.vocab_) for i in out.token_ids)

    def test_unknown_mode_raises(self):
        gen = self.make_fitted()
        with pytest.raises(GenerationError):
            gen.generate(np.zeros(16), mode="beam")

    def test_unfitted_generate_raises(self):
        with pytest.raises(GenerationError):
            ClauseGenerator(hidden=8).generate(np.zeros(8))


class TestGeneratorPersistence:
    def test_save_load_preserves_generations(self, tmp_path):
        gen = ClauseGenerator(
            hidden=16, layers=1, heads=2, lr=1e-3, batch_size=4, max_epochs=3,
            min_frequency=1, max_len=12, seed=2,
        )
        gen.fit(toy_pairs(n=8, hidden=16, length=4, seed=10))
        path = tmp_path / "generator.json"
        gen.save(path, encoder_fingerprint="fp-abc")
        loaded = ClauseGenerator.load(path, encoder_fingerprint="fp-abc")
        memory = np.random.default_rng(11).normal(size=16)
        assert loaded.generate(memory) == gen.generate(memory)

    def test_load_with_wrong_fingerprint_raises(self, tmp_path):
        gen = ClauseGenerator(
            hidden=16, layers=1, heads=2, max_epochs=1, min_frequency=1, max_len=12
        )
        gen.fit(toy_pairs(n=4, hidden=16, length=3, seed=12))
        path = tmp_path / "generator.json"
        gen.save(path, encoder_fingerprint="fp-abc")
        with pytest.raises(GenerationError):
            ClauseGenerator.load(path, encoder_fingerprint="fp-other")


class TestPairsFromSplit:
    def test_pairs_use_held_out_clause_and_reduced_contract(self):
        contracts = []
        for i in range(12):
            clauses = [Clause.make("anchor", f"anchor body {'common' if i % 2 else 'words'} {i}")]
            if i % 2 == 0:
                clauses.append(Clause.make("target", f"target clause body variant {i % 3}"))
            contracts.append(Contract(id=f"c{i:02d}", clauses=tuple(clauses)))
        labels = {"anchor", "target"}
        library = ClauseLibrary(contracts, TypeIndex(labels))
        split = build_proxy_dataset(contracts, "target", seed=0)
        encoder = HashedTextEncoder(dimension=24, seed=1)
        pairs = pairs_from_split(split, encoder, library, part="train")
        relevant = [ex for ex in split.train if ex.is_relevant()]
        assert len(pairs) == len(relevant)
        for (memory, tokens), example in zip(pairs, relevant):
            assert memory.shape == (24,)
            assert tokens == list(example.held_out_clause.tokens)
            assert "target" not in example.contract.type_labels()
