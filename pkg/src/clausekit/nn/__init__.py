"""Minimal reverse-mode autodiff stack used by the relevance classifier and generator."""

from .artifacts import load_model, save_model
from .layers import MLP, Embedding, FeedForward, LayerNorm, Linear, Module, MultiHeadAttention
from .optim import Adam
from .tensor import (
    NNError,
    Tensor,
    add,
    as_tensor,
    bce_with_logits,
    cross_entropy_with_logits,
    dropout,
    embedding_lookup,
    layer_norm,
    matmul,
    mul,
    multi_head_attention,
    no_grad,
    parameter,
    relu,
    reshape,
    scale,
    sigmoid,
    softmax,
    tensor_mean,
    tensor_sum,
    transpose,
)

__all__ = [
    "Adam",
    "Embedding",
    "FeedForward",
    "LayerNorm",
    "Linear",
    "MLP",
    "Module",
    "MultiHeadAttention",
    "NNError",
    "Tensor",
    "add",
    "as_tensor",
    "bce_with_logits",
    "cross_entropy_with_logits",
    "dropout",
    "embedding_lookup",
    "layer_norm",
    "load_model",
    "matmul",
    "mul",
    "multi_head_attention",
    "no_grad",
    "parameter",
    "relu",
    "reshape",
    "save_model",
    "scale",
    "sigmoid",
    "softmax",
    "tensor_mean",
    "tensor_sum",
    "transpose",
]
