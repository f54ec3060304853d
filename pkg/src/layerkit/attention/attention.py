"""Biased softmax attention with exact-zero handling of blocked entries."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateRowError, InvalidArgumentError
from .bias import BiasMatrix


def masked_softmax(logits: np.ndarray, blocked: np.ndarray) -> np.ndarray:
    """Row softmax over non-blocked entries; blocked weights are literal zeros.

    Max-subtraction runs over the non-blocked entries only, so stability
    does not depend on the bias magnitude.  Raises if any row is fully
    blocked.  Works on (..., L, L) stacks with a shared (L, L) mask.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if blocked.shape != logits.shape[-2:]:
        raise InvalidArgumentError("mask shape must match the logit matrix")
    open_mask = ~blocked
    if not open_mask.any(axis=-1).all():
        raise DegenerateRowError("attention row with every column blocked")
    shifted = np.where(open_mask, logits, -np.inf)
    row_max = shifted.max(axis=-1, keepdims=True)
    weights = np.zeros_like(logits)
    np.exp(logits - row_max, out=weights, where=open_mask)
    weights /= weights.sum(axis=-1, keepdims=True)
    return weights


def attention(Q: np.ndarray, K: np.ndarray, V: np.ndarray, bias: BiasMatrix, heads: int = 1) -> np.ndarray:
    """Softmax((Q K^T) / sqrt(d_k) + B) V with per-cue isolation.

    Single-head by default (d_k = d); `heads` splits the feature dim
    evenly and applies the same head-independent bias to every head.
    """
    Q, K, V = (np.asarray(m, dtype=np.float64) for m in (Q, K, V))
    if Q.shape != K.shape or K.shape != V.shape or Q.ndim != 2:
        raise InvalidArgumentError("Q, K, V must be equal-shape L x d matrices")
    L, d = Q.shape
    if bias.size != L:
        raise InvalidArgumentError(f"bias is {bias.size} x {bias.size} but streams total {L}")
    if heads < 1 or d % heads != 0:
        raise InvalidArgumentError("heads must divide the feature dim")
    dk = d // heads
    out = np.empty_like(Q)
    for h in range(heads):
        sl = slice(h * dk, (h + 1) * dk)
        logits = (Q[:, sl] @ K[:, sl].T) / np.sqrt(dk) + bias.finite
        weights = masked_softmax(logits, bias.blocked)
        out[:, sl] = weights @ V[:, sl]
    return out


def attention_weights(Q: np.ndarray, K: np.ndarray, bias: BiasMatrix, heads: int = 1) -> np.ndarray:
    """The (heads, L, L) softmax weight stack, for tests and diagnostics."""
    Q, K = np.asarray(Q, dtype=np.float64), np.asarray(K, dtype=np.float64)
    L, d = Q.shape
    dk = d // heads
    stack = np.empty((heads, L, L), dtype=np.float64)
    for h in range(heads):
        sl = slice(h * dk, (h + 1) * dk)
        logits = (Q[:, sl] @ K[:, sl].T) / np.sqrt(dk) + bias.finite
        stack[h] = masked_softmax(logits, bias.blocked)
    return stack
