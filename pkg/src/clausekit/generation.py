"""Conditional clause generation.

A small transformer decoder is conditioned on a single vector — the mean of
the contract representation and the target clause-type representation — used
as a length-1 cross-attention memory, and trained with teacher forcing to
emit the held-out clause of that type.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import nn
from .corpus import DatasetSplit
from .encoding import clause_type_rep, contract_rep

DECODING_MODES = ("greedy", "top_k")


class GenerationError(ValueError):
    """Invalid input to a generation operation."""


class Vocabulary:
    """Token-id bijection with reserved PAD/UNK/SOS/EOS ids.

    Tokens are admitted when their training frequency reaches
    ``min_frequency`` and ordered by descending frequency, then
    lexicographically, so a rebuild over the same clauses reproduces the same
    id assignment.
    """

    PAD, UNK, SOS, EOS = 0, 1, 2, 3
    SPECIALS = ("<pad>", "<unk>", "<sos>", "<eos>")

    def __init__(self, tokens):
        self._tokens = list(self.SPECIALS) + list(tokens)
        if len(set(self._tokens)) != len(self._tokens):
            raise GenerationError("vocabulary tokens must be unique")
        self._ids = {tok: i for i, tok in enumerate(self._tokens)}

    @classmethod
    def build(cls, token_seqs, min_frequency: int = 2) -> "Vocabulary":
        counts = Counter()
        for seq in token_seqs:
            counts.update(seq)
        if not counts:
            raise GenerationError("cannot build a vocabulary from empty training clauses")
        kept = [t for t, c in counts.items() if c >= min_frequency and t not in cls.SPECIALS]
        kept.sort(key=lambda t: (-counts[t], t))
        return cls(kept)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def encode(self, tokens) -> list[int]:
        return [self._ids.get(t, self.UNK) for t in tokens]

    def decode(self, ids) -> list[str]:
        out = []
        for i in ids:
            if i < 0 or i >= len(self._tokens):
                raise GenerationError(f"token id {i} outside vocabulary of size {len(self._tokens)}")
            if i in (self.PAD, self.SOS, self.EOS):
                continue
            out.append(self._tokens[i])
        return out

    def to_dict(self) -> dict:
        return {"tokens": self._tokens[len(self.SPECIALS) :]}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(data["tokens"])


def condition(rep_c: np.ndarray, rep_t: np.ndarray) -> np.ndarray:
    """Elementwise mean of contract and clause-type representations."""
    rep_c = np.asarray(rep_c, dtype=np.float64)
    rep_t = np.asarray(rep_t, dtype=np.float64)
    if rep_c.shape != rep_t.shape:
        raise GenerationError(
            f"conditioning inputs disagree in shape: {rep_c.shape} vs {rep_t.shape}"
        )
    return (rep_c + rep_t) / 2.0


def sinusoidal_positions(max_len: int, dim: int, dtype=np.float32) -> np.ndarray:
    """Fixed sine/cosine positional table of shape (max_len, dim)."""
    positions = np.arange(max_len, dtype=np.float64)[:, None]
    index = np.arange(0, dim, 2, dtype=np.float64)
    angles = positions / np.power(10000.0, index / dim)
    table = np.zeros((max_len, dim), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)[:, : table[:, 1::2].shape[1]]
    return table.astype(dtype)


class DecoderBlock(nn.Module):
    """Pre-norm block: causal self-attention, cross-attention, feed-forward."""

    def __init__(self, hidden: int, heads: int, rng: np.random.Generator, dtype=np.float32):
        self.norm1 = nn.LayerNorm(hidden, dtype)
        self.self_attn = nn.MultiHeadAttention(hidden, heads, rng, dtype)
        self.norm2 = nn.LayerNorm(hidden, dtype)
        self.cross_attn = nn.MultiHeadAttention(hidden, heads, rng, dtype)
        self.norm3 = nn.LayerNorm(hidden, dtype)
        self.ffn = nn.FeedForward(hidden, 4 * hidden, rng, dtype)

    def __call__(self, x, memory, dropout_p, training, rng):
        normed = self.norm1(x)
        x = nn.add(x, nn.dropout(self.self_attn(normed, normed, normed, causal=True), dropout_p, rng, training))
        normed = self.norm2(x)
        x = nn.add(x, nn.dropout(self.cross_attn(normed, memory, memory), dropout_p, rng, training))
        normed = self.norm3(x)
        return nn.add(x, nn.dropout(self.ffn(normed), dropout_p, rng, training))


class TransformerDecoder(nn.Module):
    """Token embedding + sinusoidal positions + decoder blocks + vocab projection.

    The conditioning memory is exactly one vector per sequence; its dimension
    must equal the hidden size.
    """

    def __init__(
        self,
        vocab_size: int,
        hidden: int,
        layers: int,
        heads: int,
        dropout_p: float,
        max_len: int,
        rng: np.random.Generator,
        dtype=np.float32,
    ):
        if max_len < 2:
            raise GenerationError(f"max_len must be >= 2, got {max_len}")
        self.embedding = nn.Embedding(vocab_size, hidden, rng, dtype)
        self.blocks = [DecoderBlock(hidden, heads, rng, dtype) for _ in range(layers)]
        self.final_norm = nn.LayerNorm(hidden, dtype)
        self.out_proj = nn.Linear(hidden, vocab_size, rng, dtype)
        # small-variance head init keeps fresh-model logits near uniform
        self.out_proj.weight.data = rng.normal(0.0, 0.02, size=(hidden, vocab_size)).astype(dtype)
        self.positions = sinusoidal_positions(max_len, hidden, dtype)
        self.hidden = hidden
        self.vocab_size = vocab_size
        self.dropout_p = dropout_p
        self.max_len = max_len
        self.dtype = dtype

    def _check_memory(self, memory, batch: int):
        mem = np.asarray(memory, dtype=self.dtype)
        if mem.ndim == 2:
            mem = mem[:, None, :]
        if mem.shape != (batch, 1, self.hidden):
            raise GenerationError(
                f"memory must be one {self.hidden}-dim vector per sequence; got shape {mem.shape}"
            )
        return mem

    def __call__(self, ids, memory, training: bool = False, rng=None):
        ids = np.asarray(ids)
        if ids.ndim != 2:
            raise GenerationError(f"token ids must be 2-d (batch, time), got shape {ids.shape}")
        batch, length = ids.shape
        if length > self.max_len:
            raise GenerationError(f"sequence length {length} exceeds max_len {self.max_len}")
        mem = nn.as_tensor(self._check_memory(memory, batch))
        x = nn.add(self.embedding(ids), nn.as_tensor(self.positions[:length]))
        x = nn.dropout(x, self.dropout_p, rng, training)
        for block in self.blocks:
            x = block(x, mem, self.dropout_p, training, rng)
        return self.out_proj(self.final_norm(x))


@dataclass(frozen=True)
class GenerationResult:
    """Generated clause content (specials excluded) plus a truncation flag."""

    token_ids: tuple
    tokens: tuple
    text: str
    truncated: bool


class ClauseGenerator(BaseEstimator):
    """Trainable decoder for clause text, conditioned on one memory vector.

    ``fit`` consumes (memory vector, token sequence) pairs: teacher-forced
    next-token cross entropy with PAD positions masked, Adam at a constant
    learning rate, and the checkpoint with the best validation loss is kept.
    Sequences longer than ``max_len`` - 2 content tokens are dropped before
    training (the bound counts the start and end markers).

    Parameters
    ----------
    hidden : decoder width; must equal the conditioning vector dimension.
    layers, heads : decoder depth and attention heads per block.
    dropout : dropout probability on residual branches.
    lr, batch_size, max_epochs : optimization settings.
    max_steps : optional hard cap on optimizer steps (overrides epochs).
    min_frequency : vocabulary admission threshold.
    max_len : maximum sequence length including start/end markers.
    seed : RNG seed covering init, shuffling, and dropout.
    """

    def __init__(
        self,
        hidden: int = 768,
        layers: int = 3,
        heads: int = 4,
        dropout: float = 0.1,
        lr: float = 1e-5,
        batch_size: int = 16,
        max_epochs: int = 300,
        max_steps: int | None = None,
        min_frequency: int = 2,
        max_len: int = 400,
        seed: int = 0,
    ):
        self.hidden = hidden
        self.layers = layers
        self.heads = heads
        self.dropout = dropout
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.max_steps = max_steps
        self.min_frequency = min_frequency
        self.max_len = max_len
        self.seed = seed

    # ------------------------------------------------------------------ fit

    def _prepare(self, pairs, vocab: Vocabulary):
        memories, sequences, dropped = [], [], 0
        for memory, tokens in pairs:
            memory = np.asarray(memory, dtype=np.float32).reshape(-1)
            if memory.shape[0] != self.hidden:
                raise GenerationError(
                    f"memory dimension {memory.shape[0]} != decoder hidden size {self.hidden}"
                )
            if len(tokens) > self.max_len - 2:
                dropped += 1
                continue
            ids = [Vocabulary.SOS, *vocab.encode(tokens), Vocabulary.EOS]
            memories.append(memory)
            sequences.append(np.array(ids, dtype=np.int64))
        return memories, sequences, dropped

    def _batch(self, memories, sequences, idx):
        mem = np.stack([memories[i] for i in idx])[:, None, :]
        width = max(len(sequences[i]) for i in idx)
        block = np.full((len(idx), width), Vocabulary.PAD, dtype=np.int64)
        for row, i in enumerate(idx):
            block[row, : len(sequences[i])] = sequences[i]
        return mem, block[:, :-1], block[:, 1:]

    def _loss_and_accuracy(self, model, memories, sequences):
        total_loss, total_correct, total_tokens = 0.0, 0, 0
        with nn.no_grad():
            for start in range(0, len(sequences), self.batch_size):
                idx = list(range(start, min(start + self.batch_size, len(sequences))))
                mem, inputs, targets = self._batch(memories, sequences, idx)
                logits = model(inputs, mem, training=False)
                flat = logits.data.reshape(-1, model.vocab_size)
                flat_targets = targets.reshape(-1)
                valid = flat_targets != Vocabulary.PAD
                loss = nn.cross_entropy_with_logits(
                    nn.as_tensor(flat), flat_targets, ignore_id=Vocabulary.PAD
                )
                n = int(valid.sum())
                total_loss += loss.item() * n
                total_correct += int((flat.argmax(axis=1)[valid] == flat_targets[valid]).sum())
                total_tokens += n
        return total_loss / max(total_tokens, 1), total_correct / max(total_tokens, 1)

    def fit(self, pairs, validation=None) -> "ClauseGenerator":
        pairs = list(pairs)
        if not pairs:
            raise GenerationError("cannot train a generator on an empty dataset")
        vocab = Vocabulary.build((tokens for _, tokens in pairs), self.min_frequency)
        memories, sequences, dropped = self._prepare(pairs, vocab)
        if not sequences:
            raise GenerationError(
                f"all {len(pairs)} training clauses exceed the {self.max_len - 2}-token bound"
            )
        if validation is None:
            val_memories, val_sequences = memories, sequences
        else:
            val_memories, val_sequences, _ = self._prepare(list(validation), vocab)
            if not val_sequences:
                raise GenerationError("validation set is empty after the length bound")

        rng = np.random.default_rng(self.seed)
        model = TransformerDecoder(
            len(vocab), self.hidden, self.layers, self.heads, self.dropout, self.max_len, rng
        )
        opt = nn.Adam(model.parameters(), lr=self.lr)

        best_state = model.state_arrays()
        best_val = float("inf")
        history, val_history = [], []
        step = 0
        first_batch_loss = None
        done = False
        for _ in range(self.max_epochs):
            order = rng.permutation(len(sequences))
            epoch_losses = []
            for start in range(0, len(order), self.batch_size):
                idx = order[start : start + self.batch_size].tolist()
                mem, inputs, targets = self._batch(memories, sequences, idx)
                logits = model(inputs, mem, training=True, rng=rng)
                flat = nn.reshape(logits, (-1, model.vocab_size))
                loss = nn.cross_entropy_with_logits(
                    flat, targets.reshape(-1), ignore_id=Vocabulary.PAD
                )
                loss.backward()
                opt.step()
                value = loss.item()
                if first_batch_loss is None:
                    first_batch_loss = value
                epoch_losses.append(value)
                step += 1
                if self.max_steps is not None and step >= self.max_steps:
                    done = True
                    break
            history.append(float(np.mean(epoch_losses)))
            val_loss, _ = self._loss_and_accuracy(model, val_memories, val_sequences)
            val_history.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_state = model.state_arrays()
            if done:
                break

        model.load_state_arrays(best_state)
        self.model_ = model
        self.vocab_ = vocab
        self.dropped_long_clauses_ = dropped
        self.loss_history_ = history
        self.validation_loss_history_ = val_history
        self.best_validation_loss_ = best_val
        self.first_batch_loss_ = first_batch_loss
        self.steps_ = step
        return self

    def score(self, pairs) -> dict:
        """Teacher-forced loss and next-token accuracy over the given pairs."""
        self._check_fitted()
        memories, sequences, _ = self._prepare(list(pairs), self.vocab_)
        if not sequences:
            raise GenerationError("no sequences to score after the length bound")
        loss, accuracy = self._loss_and_accuracy(self.model_, memories, sequences)
        return {"loss": loss, "token_accuracy": accuracy}

    # ------------------------------------------------------------- generate

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise GenerationError("generator is not fitted; call fit() or load a saved model")

    def generate(
        self,
        memory,
        mode: str = "greedy",
        top_k: int = 10,
        seed: int | None = None,
        max_len: int | None = None,
    ) -> GenerationResult:
        """Autoregressive decode from the start marker until the end marker
        or the length bound; the result excludes both markers."""
        self._check_fitted()
        if mode not in DECODING_MODES:
            raise GenerationError(f"unknown decoding mode {mode!r}; expected one of {DECODING_MODES}")
        bound = self.model_.max_len if max_len is None else max_len
        if bound < 2 or bound > self.model_.max_len:
            raise GenerationError(
                f"max_len must be between 2 and {self.model_.max_len}, got {bound}"
            )
        rng = np.random.default_rng(seed)
        ids = [Vocabulary.SOS]
        truncated = True
        with nn.no_grad():
            while len(ids) < bound:
                logits = self.model_(np.array([ids]), self._memory_for(memory), training=False)
                last = logits.data[0, -1].astype(np.float64)
                token = self._pick(last, mode, top_k, rng)
                if token == Vocabulary.EOS:
                    truncated = False
                    break
                if len(ids) == bound - 1:
                    break
                ids.append(token)
        content = ids[1:]
        tokens = tuple(self.vocab_.decode(content))
        return GenerationResult(
            token_ids=tuple(content), tokens=tokens, text=" ".join(tokens), truncated=truncated
        )

    def _memory_for(self, memory) -> np.ndarray:
        mem = np.asarray(memory, dtype=np.float32).reshape(-1)
        if mem.shape[0] != self.model_.hidden:
            raise GenerationError(
                f"memory dimension {mem.shape[0]} != decoder hidden size {self.model_.hidden}"
            )
        return mem[None, None, :]

    @staticmethod
    def _pick(logits: np.ndarray, mode: str, top_k: int, rng) -> int:
        if mode == "greedy":
            return int(logits.argmax())
        if top_k < 1:
            raise GenerationError(f"top_k must be >= 1, got {top_k}")
        k = min(top_k, logits.shape[0])
        top = np.argpartition(-logits, k - 1)[:k]
        shifted = logits[top] - logits[top].max()
        probs = np.exp(shifted) / np.exp(shifted).sum()
        return int(rng.choice(top, p=probs))

    # ---------------------------------------------------------- persistence

    def save(self, path, encoder_fingerprint: str) -> None:
        self._check_fitted()
        nn.save_model(
            path,
            model_kind="clause-generator",
            config=self.get_params(),
            params=self.model_.state_arrays(),
            encoder_fingerprint=encoder_fingerprint,
            extra={
                "vocab": self.vocab_.to_dict(),
                "dropped_long_clauses": self.dropped_long_clauses_,
            },
        )

    @classmethod
    def load(cls, path, encoder_fingerprint: str | None = None) -> "ClauseGenerator":
        payload = nn.load_model(path, expected_kind="clause-generator")
        if encoder_fingerprint is not None and payload["encoder_fingerprint"] != encoder_fingerprint:
            raise GenerationError(
                "generator was trained against a different encoder "
                f"(stored fingerprint {payload['encoder_fingerprint'][:12]}..., "
                f"current {encoder_fingerprint[:12]}...)"
            )
        gen = cls(**payload["config"])
        vocab = Vocabulary.from_dict(payload["extra"]["vocab"])
        model = TransformerDecoder(
            len(vocab),
            gen.hidden,
            gen.layers,
            gen.heads,
            gen.dropout,
            gen.max_len,
            np.random.default_rng(gen.seed),
        )
        model.load_state_arrays(payload["params"])
        gen.model_ = model
        gen.vocab_ = vocab
        gen.dropped_long_clauses_ = payload["extra"].get("dropped_long_clauses", 0)
        return gen


def pairs_from_split(split: DatasetSplit, encoder, library, part: str = "train"):
    """(memory, clause tokens) training pairs from the relevant examples of one split part.

    The memory is the mean of the example contract's representation (with the
    target clauses already removed) and the target type representation from
    the library; the sequence is the held-out clause of that example.
    """
    type_rep = clause_type_rep(encoder, library, split.target.label)
    pairs = []
    for example in getattr(split, part):
        if not example.is_relevant() or example.held_out_clause is None:
            continue
        rep = contract_rep(encoder, example.contract)
        pairs.append((condition(rep, type_rep), list(example.held_out_clause.tokens)))
    return pairs
