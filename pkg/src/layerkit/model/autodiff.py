"""Minimal reverse-mode autodiff over float64 numpy arrays.

Just the operations the toy transformer needs: batched linear maps,
layer norm, GELU, embeddings, token concatenation/slicing, the biased
multi-head attention (sharing its forward kernel with the attention
core), and mean-squared-error reduction.  Values are (B, N, d) unless
stated otherwise.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..attention.attention import masked_softmax
from ..attention.bias import BiasMatrix

_LN_EPS = 1e-6


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "parents", "backward_fn", "name")

    def __init__(self, value, requires_grad=False, parents=(), backward_fn=None, name=""):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.parents = parents
        self.backward_fn = backward_fn
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64)
        else:
            self.grad += grad

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Reverse-mode sweep from a scalar output."""
        if self.value.size != 1:
            raise ValueError("backward() starts from a scalar")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                stack.append((parent, False))
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node.backward_fn is not None and node.grad is not None:
                node.backward_fn(node.grad)


def const(value) -> Tensor:
    return Tensor(value, requires_grad=False)


def parameter(value, name: str = "") -> Tensor:
    return Tensor(value, requires_grad=True, name=name)


def _sum_to_shape(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Undo numpy broadcasting in the backward pass."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.value + b.value, parents=(a, b))

    def backward(grad):
        if a.requires_grad:
            a.accumulate(_sum_to_shape(grad, a.value.shape))
        if b.requires_grad:
            b.accumulate(_sum_to_shape(grad, b.value.shape))

    out.backward_fn = backward
    return out


def scale(x: Tensor, factor: float) -> Tensor:
    out = Tensor(x.value * factor, parents=(x,))

    def backward(grad):
        if x.requires_grad:
            x.accumulate(grad * factor)

    out.backward_fn = backward
    return out


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """y = x @ W^T (+ b) over the trailing feature axis of (B, N, d_in)."""
    value = x.value @ weight.value.T
    if bias is not None:
        value = value + bias.value
    parents = (x, weight) if bias is None else (x, weight, bias)
    out = Tensor(value, parents=parents)

    def backward(grad):
        if x.requires_grad:
            x.accumulate(grad @ weight.value)
        if weight.requires_grad:
            weight.accumulate(np.einsum("...no,...nd->od", grad, x.value, optimize=True))
        if bias is not None and bias.requires_grad:
            bias.accumulate(grad.reshape(-1, grad.shape[-1]).sum(axis=0))

    out.backward_fn = backward
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    mu = x.value.mean(axis=-1, keepdims=True)
    centered = x.value - mu
    var = (centered**2).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + _LN_EPS)
    norm = centered * inv_std
    out = Tensor(norm * gain.value + bias.value, parents=(x, gain, bias))

    def backward(grad):
        if bias.requires_grad:
            bias.accumulate(grad.reshape(-1, grad.shape[-1]).sum(axis=0))
        if gain.requires_grad:
            gain.accumulate((grad * norm).reshape(-1, grad.shape[-1]).sum(axis=0))
        if x.requires_grad:
            gy = grad * gain.value
            mean_gy = gy.mean(axis=-1, keepdims=True)
            mean_gy_norm = (gy * norm).mean(axis=-1, keepdims=True)
            x.accumulate(inv_std * (gy - mean_gy - norm * mean_gy_norm))

    out.backward_fn = backward
    return out


def gelu(x: Tensor) -> Tensor:
    phi = 0.5 * (1.0 + erf(x.value / np.sqrt(2.0)))
    out = Tensor(x.value * phi, parents=(x,))

    def backward(grad):
        if x.requires_grad:
            pdf = np.exp(-0.5 * x.value**2) / np.sqrt(2.0 * np.pi)
            x.accumulate(grad * (phi + x.value * pdf))

    out.backward_fn = backward
    return out


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup: (B,) int ids -> (B, 1, d)."""
    ids = np.asarray(ids, dtype=np.int64)
    out = Tensor(table.value[ids][:, None, :], parents=(table,))

    def backward(grad):
        if table.requires_grad:
            acc = np.zeros_like(table.value)
            np.add.at(acc, ids, grad[:, 0, :])
            table.accumulate(acc)

    out.backward_fn = backward
    return out


def concat_tokens(parts: list[Tensor]) -> Tensor:
    out = Tensor(np.concatenate([p.value for p in parts], axis=1), parents=tuple(parts))
    splits = np.cumsum([p.value.shape[1] for p in parts])[:-1]

    def backward(grad):
        for part, piece in zip(parts, np.split(grad, splits, axis=1)):
            if part.requires_grad:
                part.accumulate(piece)

    out.backward_fn = backward
    return out


def slice_tokens(x: Tensor, start: int, stop: int) -> Tensor:
    out = Tensor(x.value[:, start:stop], parents=(x,))

    def backward(grad):
        if x.requires_grad:
            full = np.zeros_like(x.value)
            full[:, start:stop] = grad
            x.accumulate(full)

    out.backward_fn = backward
    return out


def _split_heads(a: np.ndarray, heads: int) -> np.ndarray:
    b, n, d = a.shape
    return a.reshape(b, n, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(a: np.ndarray) -> np.ndarray:
    b, h, n, dh = a.shape
    return a.transpose(0, 2, 1, 3).reshape(b, n, h * dh)


def biased_attention(q: Tensor, k: Tensor, v: Tensor, bias: BiasMatrix, heads: int) -> Tensor:
    """Multi-head softmax attention with the additive cue bias.

    Forward uses the attention core's masked-softmax kernel, so blocked
    entries carry exactly zero weight (and therefore exactly zero
    gradient).
    """
    qh, kh, vh = (_split_heads(t.value, heads) for t in (q, k, v))
    dk = qh.shape[-1]
    logits = qh @ kh.transpose(0, 1, 3, 2) / np.sqrt(dk) + bias.finite
    weights = masked_softmax(logits, bias.blocked)
    out = Tensor(_merge_heads(weights @ vh), parents=(q, k, v))

    def backward(grad):
        gh = _split_heads(grad, heads)
        if v.requires_grad:
            v.accumulate(_merge_heads(weights.transpose(0, 1, 3, 2) @ gh))
        if q.requires_grad or k.requires_grad:
            d_weights = gh @ vh.transpose(0, 1, 3, 2)
            d_logits = weights * (d_weights - (d_weights * weights).sum(axis=-1, keepdims=True))
            if q.requires_grad:
                q.accumulate(_merge_heads(d_logits @ kh / np.sqrt(dk)))
            if k.requires_grad:
                k.accumulate(_merge_heads(d_logits.transpose(0, 1, 3, 2) @ qh / np.sqrt(dk)))

    out.backward_fn = backward
    return out


def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    diff = pred.value - np.asarray(target, dtype=np.float64)
    out = Tensor(np.array((diff**2).mean()), parents=(pred,))

    def backward(grad):
        if pred.requires_grad:
            pred.accumulate(grad * 2.0 * diff / diff.size)

    out.backward_fn = backward
    return out
