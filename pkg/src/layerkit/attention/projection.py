"""Shared QKV projection and the low-rank adapted cue branch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from .streams import Role, TokenStream


@dataclass(frozen=True)
class ProjectionWeights:
    """Square projection matrices shared by the text/image/context branches."""

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray

    def __post_init__(self):
        for name in ("w_q", "w_k", "w_v"):
            m = np.asarray(getattr(self, name), dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InvalidArgumentError(f"{name} must be square")
            if not np.all(np.isfinite(m)):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, m)
        if not (self.w_q.shape == self.w_k.shape == self.w_v.shape):
            raise InvalidArgumentError("projection matrices must share one shape")

    @property
    def dim(self) -> int:
        return self.w_q.shape[0]


@dataclass(frozen=True)
class LoraAdapter:
    """Rank-r additive update (B @ A) per projection, zero-initialized B = no-op."""

    a_q: np.ndarray
    a_k: np.ndarray
    a_v: np.ndarray
    b_q: np.ndarray
    b_k: np.ndarray
    b_v: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("a_q", "a_k", "a_v", "b_q", "b_k", "b_v"):
            arrays[name] = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arrays[name])
        r, d = arrays["a_q"].shape
        if r > d:
            raise InvalidArgumentError("rank must not exceed the feature dim")
        for name in ("a_q", "a_k", "a_v"):
            if arrays[name].shape != (r, d):
                raise InvalidArgumentError("A matrices must all be r x d")
        for name in ("b_q", "b_k", "b_v"):
            if arrays[name].shape != (d, r):
                raise InvalidArgumentError("B matrices must all be d x r")

    @property
    def rank(self) -> int:
        return self.a_q.shape[0]

    @classmethod
    def zeros(cls, rank: int, dim: int, rng: np.random.Generator | None = None) -> "LoraAdapter":
        """Fresh adapter: A random (or zero), B zero, so the delta starts as a no-op."""
        if rng is None:
            a = [np.zeros((rank, dim)) for _ in range(3)]
        else:
            a = [rng.normal(0.0, 0.02, size=(rank, dim)) for _ in range(3)]
        b = [np.zeros((dim, rank)) for _ in range(3)]
        return cls(a[0], a[1], a[2], b[0], b[1], b[2])


def project_qkv(stream: TokenStream, weights: ProjectionWeights):
    """Q = Z W_Q^T etc., row-wise over the stream's tokens (shared weights)."""
    if stream.role not in (Role.TEXT, Role.NOISY_IMAGE, Role.CONTEXT):
        raise InvalidArgumentError("cue streams go through project_qkv_cue")
    z = stream.features
    if z.shape[1] != weights.dim:
        raise InvalidArgumentError(
            f"feature dim {z.shape[1]} does not match projection dim {weights.dim}"
        )
    return z @ weights.w_q.T, z @ weights.w_k.T, z @ weights.w_v.T


def project_qkv_cue(stream: TokenStream, weights: ProjectionWeights, lora: LoraAdapter):
    """Cue branch: shared projection plus the low-rank delta B (A Z)."""
    if stream.role is not Role.CUE:
        raise InvalidArgumentError("project_qkv_cue only accepts cue streams")
    z = stream.features
    if z.shape[1] != weights.dim:
        raise InvalidArgumentError(
            f"feature dim {z.shape[1]} does not match projection dim {weights.dim}"
        )
    if lora.a_q.shape[1] != weights.dim:
        raise InvalidArgumentError("adapter dim does not match projection dim")
    q = z @ weights.w_q.T + (z @ lora.a_q.T) @ lora.b_q.T
    k = z @ weights.w_k.T + (z @ lora.a_k.T) @ lora.b_k.T
    v = z @ weights.w_v.T + (z @ lora.a_v.T) @ lora.b_v.T
    return q, k, v
