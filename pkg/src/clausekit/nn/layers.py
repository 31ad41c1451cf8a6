"""Layers built on the tensor core: linear, norm, embedding, attention blocks."""

from __future__ import annotations

import numpy as np

from .tensor import (
    NNError,
    Tensor,
    add,
    dropout,
    layer_norm,
    matmul,
    multi_head_attention,
    parameter,
    relu,
)


class Module:
    """Parameter-holding building block; submodules are discovered by attribute."""

    def parameters(self) -> list[Tensor]:
        params = []
        for value in vars(self).values():
            if isinstance(value, Tensor) and value.requires_grad:
                params.append(value)
            elif isinstance(value, Module):
                params.extend(value.parameters())
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        params.extend(item.parameters())
        return params

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        named = []
        for name, value in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                named.append((key, value))
            elif isinstance(value, Module):
                named.extend(value.named_parameters(f"{key}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        named.extend(item.named_parameters(f"{key}.{i}."))
        return named

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_arrays(self, state: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            if name not in state:
                raise NNError(f"missing parameter {name!r} in state")
            if state[name].shape != p.data.shape:
                raise NNError(
                    f"parameter {name!r}: stored shape {state[name].shape} != model shape {p.data.shape}"
                )
            p.data = state[name].astype(p.data.dtype)


class Linear(Module):
    """Affine map with Xavier-uniform weight init and zero bias."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32):
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        self.weight = parameter(rng.uniform(-limit, limit, size=(in_dim, out_dim)), dtype)
        self.bias = parameter(np.zeros(out_dim), dtype)
        self.in_dim = in_dim
        self.out_dim = out_dim

    def __call__(self, x: Tensor) -> Tensor:
        if x.data.shape[-1] != self.in_dim:
            raise NNError(f"linear: input dim {x.data.shape[-1]} != expected {self.in_dim}")
        return add(matmul(x, self.weight), self.bias)


class LayerNorm(Module):
    def __init__(self, dim: int, dtype=np.float32):
        self.gamma = parameter(np.ones(dim), dtype)
        self.beta = parameter(np.zeros(dim), dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta)


class Embedding(Module):
    """Token embedding table, N(0, 0.02) init."""

    def __init__(self, vocab_size: int, dim: int, rng: np.random.Generator, dtype=np.float32):
        self.table = parameter(rng.normal(0.0, 0.02, size=(vocab_size, dim)), dtype)

    def __call__(self, ids) -> Tensor:
        from .tensor import embedding_lookup

        return embedding_lookup(self.table, ids)


class MultiHeadAttention(Module):
    """Projected multi-head attention; query and key/value sources may differ."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator, dtype=np.float32):
        if dim % heads != 0:
            raise NNError(f"attention dim {dim} not divisible by heads {heads}")
        self.heads = heads
        self.q_proj = Linear(dim, dim, rng, dtype)
        self.k_proj = Linear(dim, dim, rng, dtype)
        self.v_proj = Linear(dim, dim, rng, dtype)
        self.out_proj = Linear(dim, dim, rng, dtype)

    def __call__(self, query: Tensor, keys: Tensor, values: Tensor, causal: bool = False) -> Tensor:
        attended = multi_head_attention(
            self.q_proj(query), self.k_proj(keys), self.v_proj(values), heads=self.heads, causal=causal
        )
        return self.out_proj(attended)


class FeedForward(Module):
    def __init__(self, dim: int, inner_dim: int, rng: np.random.Generator, dtype=np.float32):
        self.up = Linear(dim, inner_dim, rng, dtype)
        self.down = Linear(inner_dim, dim, rng, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return self.down(relu(self.up(x)))


class MLP(Module):
    """Stack of linear layers with ReLU + dropout after each hidden layer."""

    def __init__(self, dims, dropout_p: float, rng: np.random.Generator, dtype=np.float32):
        if len(dims) < 2:
            raise NNError("MLP needs at least input and output dims")
        self.layers = [Linear(dims[i], dims[i + 1], rng, dtype) for i in range(len(dims) - 1)]
        self.dropout_p = dropout_p

    def __call__(self, x: Tensor, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        for layer in self.layers[:-1]:
            x = dropout(relu(layer(x)), self.dropout_p, rng=rng, training=training)
        return self.layers[-1](x)
