"""Minimal dense-tensor reverse-mode autodiff core on numpy arrays.

Every operation records its parents and a backward closure; `backward()` on a
scalar loss topologically sorts the tape and accumulates gradients into every
tensor on a grad-requiring path. Only the broadcasting cases these models need
are supported (bias rows, mask planes); this is not a general array library.
"""

from __future__ import annotations

import contextlib

import numpy as np


class NNError(ValueError):
    """Shape mismatches, detached graphs, and other tensor-core misuse."""


_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (evaluation / generation)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad=False, _parents=(), _backward_fn=None):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if _grad_enabled else ()
        self._backward_fn = _backward_fn if _grad_enabled else None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        if self.data.size != 1:
            raise NNError(f"backward requires a scalar loss, got shape {self.data.shape}")
        if not self._parents:
            raise NNError("backward on a detached graph: no recorded operations")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen and parent.requires_grad:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward_fn is None or node.grad is None:
                continue
            for parent, grad in zip(node._parents, node._backward_fn(node.grad)):
                if grad is None or not parent.requires_grad:
                    continue
                parent.grad = grad if parent.grad is None else parent.grad + grad

    # Operator sugar used throughout the layers.
    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data, dtype=np.float32) -> Tensor:
    return Tensor(np.asarray(data, dtype=dtype), requires_grad=True)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_same_shape(op, a, b):
    if a.data.shape != b.data.shape:
        raise NNError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError:
        raise NNError(f"add: incompatible shapes {a.data.shape} vs {b.data.shape}") from None

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return Tensor(out, _parents=(a, b), _backward_fn=backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError:
        raise NNError(f"mul: incompatible shapes {a.data.shape} vs {b.data.shape}") from None

    def backward(g):
        return _unbroadcast(g * b.data, a.data.shape), _unbroadcast(g * a.data, b.data.shape)

    return Tensor(out, _parents=(a, b), _backward_fn=backward)


def scale(a, factor: float) -> Tensor:
    a = as_tensor(a)
    out = a.data * a.data.dtype.type(factor)

    def backward(g):
        return (g * a.data.dtype.type(factor),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise NNError(f"matmul needs >=2-d operands, got {a.data.shape} and {b.data.shape}")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise NNError(f"matmul: inner dims differ, {a.data.shape} vs {b.data.shape}")
    out = a.data @ b.data

    def backward(g):
        ga = _unbroadcast(g @ b.data.swapaxes(-1, -2), a.data.shape)
        gb = _unbroadcast(a.data.swapaxes(-1, -2) @ g, b.data.shape)
        return ga, gb

    return Tensor(out, _parents=(a, b), _backward_fn=backward)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.data, 0)

    def backward(g):
        return (g * (a.data > 0),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = _stable_sigmoid(a.data).astype(a.data.dtype)

    def backward(g):
        return (g * out * (1.0 - out),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    out = exp / exp.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return ((g - inner) * out,)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis; gamma and beta are 1-d over that axis."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    dim = x.data.shape[-1]
    if gamma.data.shape != (dim,) or beta.data.shape != (dim,):
        raise NNError(
            f"layer_norm: gamma/beta must have shape ({dim},), got {gamma.data.shape} and {beta.data.shape}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    var = ((x.data - mu) ** 2).mean(axis=-1, keepdims=True)
    sigma = np.sqrt(var + eps)
    xhat = (x.data - mu) / sigma
    out = xhat * gamma.data + beta.data

    def backward(g):
        ghat = g * gamma.data
        m1 = ghat.mean(axis=-1, keepdims=True)
        m2 = (ghat * xhat).mean(axis=-1, keepdims=True)
        dx = (ghat - m1 - xhat * m2) / sigma
        reduce_axes = tuple(range(g.ndim - 1))
        dgamma = (g * xhat).sum(axis=reduce_axes)
        dbeta = g.sum(axis=reduce_axes)
        return dx, dgamma, dbeta

    return Tensor(out, _parents=(x, gamma, beta), _backward_fn=backward)


def dropout(x, p: float, rng: np.random.Generator | None = None, training: bool = False) -> Tensor:
    """Inverted dropout: scales by 1/(1-p) at train time, identity in eval mode."""
    x = as_tensor(x)
    if not training or p == 0.0:
        return x
    if not 0.0 <= p < 1.0:
        raise NNError(f"dropout probability must be in [0, 1), got {p}")
    if rng is None:
        raise NNError("dropout in training mode requires an rng")
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)
    mask = mask.astype(x.data.dtype)
    out = x.data * mask

    def backward(g):
        return (g * mask,)

    return Tensor(out, _parents=(x,), _backward_fn=backward)


def embedding_lookup(table, ids) -> Tensor:
    """Row lookup into a (vocab, dim) table; ids is an integer array."""
    table = as_tensor(table)
    ids = np.asarray(ids)
    if ids.min(initial=0) < 0 or (ids.size and ids.max() >= table.data.shape[0]):
        raise NNError("embedding_lookup: id out of range")
    out = table.data[ids]

    def backward(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, ids, g)
        return (grad,)

    return Tensor(out, _parents=(table,), _backward_fn=backward)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = a.data.reshape(shape)

    def backward(g):
        return (g.reshape(a.data.shape),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    out = a.data.transpose(axes)
    inverse = np.argsort(axes)

    def backward(g):
        return (g.transpose(inverse),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def tensor_sum(a) -> Tensor:
    a = as_tensor(a)
    out = np.asarray(a.data.sum(), dtype=a.data.dtype)

    def backward(g):
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def tensor_mean(a) -> Tensor:
    a = as_tensor(a)
    out = np.asarray(a.data.mean(), dtype=a.data.dtype)

    def backward(g):
        return (np.broadcast_to(g / a.data.size, a.data.shape).copy(),)

    return Tensor(out, _parents=(a,), _backward_fn=backward)


def multi_head_attention(q, k, v, heads: int = 1, causal: bool = False) -> Tensor:
    """Scaled dot-product attention over (batch, time, dim) tensors.

    With `causal=True` position t attends to positions <= t (mask applied to
    the score matrix before softmax). Query and key/value lengths may differ;
    the causal mask requires them equal.
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    if q.data.ndim != 3 or k.data.ndim != 3 or v.data.ndim != 3:
        raise NNError(
            f"attention expects (batch, time, dim) operands, got {q.data.shape}, {k.data.shape}, {v.data.shape}"
        )
    batch, t_q, dim = q.data.shape
    t_k = k.data.shape[1]
    if k.data.shape != (batch, t_k, dim) or v.data.shape != (batch, t_k, dim):
        raise NNError(f"attention: k/v shapes {k.data.shape}/{v.data.shape} do not match q {q.data.shape}")
    if dim % heads != 0:
        raise NNError(f"attention: dim {dim} not divisible by heads {heads}")
    if causal and t_q != t_k:
        raise NNError("causal attention requires equal query and key lengths")
    d_head = dim // heads

    def split(x, t):
        return transpose(reshape(x, (batch, t, heads, d_head)), (0, 2, 1, 3))

    qh, kh, vh = split(q, t_q), split(k, t_k), split(v, t_k)
    scores = scale(matmul(qh, transpose(kh, (0, 1, 3, 2))), 1.0 / np.sqrt(d_head))
    if causal:
        mask = np.triu(np.full((t_q, t_k), -1e9, dtype=q.data.dtype), k=1)
        scores = add(scores, Tensor(mask))
    weights = softmax(scores, axis=-1)
    mixed = matmul(weights, vh)
    return reshape(transpose(mixed, (0, 2, 1, 3)), (batch, t_q, dim))


def cross_entropy_with_logits(logits, targets, ignore_id: int | None = None) -> Tensor:
    """Mean token-level cross entropy. Positions whose target equals
    `ignore_id` contribute nothing to the loss or the gradient."""
    logits = as_tensor(logits)
    if logits.data.ndim != 2:
        raise NNError(f"cross entropy expects (n, vocab) logits, got {logits.data.shape}")
    targets = np.asarray(targets)
    n, vocab = logits.data.shape
    valid = np.ones(n, dtype=bool) if ignore_id is None else targets != ignore_id
    count = int(valid.sum())
    if count == 0:
        raise NNError("cross entropy: every target position is ignored")
    safe_targets = np.where(valid, targets, 0)
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    nll = -log_probs[np.arange(n), safe_targets]
    out = np.asarray((nll * valid).sum() / count, dtype=logits.data.dtype)

    def backward(g):
        probs = np.exp(log_probs)
        probs[np.arange(n), safe_targets] -= 1.0
        probs *= (valid / count)[:, None]
        return (g * probs.astype(logits.data.dtype),)

    return Tensor(out, _parents=(logits,), _backward_fn=backward)


def bce_with_logits(logits, targets) -> Tensor:
    """Mean binary cross entropy on logits (numerically stable softplus form)."""
    logits = as_tensor(logits)
    if isinstance(targets, Tensor):
        targets = targets.data
    z = logits.data.reshape(-1)
    y = np.asarray(targets, dtype=z.dtype).reshape(-1)
    if z.shape != y.shape:
        raise NNError(f"bce: logits {z.shape} vs targets {y.shape}")
    softplus = np.maximum(z, 0) + np.log1p(np.exp(-np.abs(z)))
    out = np.asarray((softplus - z * y).mean(), dtype=z.dtype)

    def backward(g):
        p = _stable_sigmoid(z)
        grad = (p - y) / z.size
        return (g * grad.reshape(logits.data.shape).astype(logits.data.dtype),)

    return Tensor(out, _parents=(logits,), _backward_fn=backward)
