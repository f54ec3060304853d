"""Per-cue attention bias: guidance strengths and stream isolation.

The bias over concatenated streams [text; x; y; c_1 ... c_K] is
    log(sigma_k)  for x-rows attending cue-k columns,
    blocked       for cue-k rows attending anything outside cue-k,
    0             everywhere else,
with sigma_k = 0 blocking the x->cue block outright.  Blocked entries are
a sentinel resolved before exponentiation (exact-zero weight), never a
large negative float.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError
from .streams import Role, StreamLayout


@dataclass(frozen=True)
class ModulationSpec:
    """Per-cue guidance strengths sigma_k >= 0 (1 = neutral, 0 = disabled)."""

    strengths: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for cue_id, sigma in self.strengths.items():
            if not np.isfinite(sigma) or sigma < 0:
                raise InvalidArgumentError(f"sigma for cue {cue_id!r} must be finite and >= 0")

    def sigma(self, cue_id: str) -> float:
        if cue_id not in self.strengths:
            raise InvalidArgumentError(f"no strength given for cue {cue_id!r}")
        return float(self.strengths[cue_id])


@dataclass(frozen=True)
class BiasMatrix:
    """Additive attention-logit bias with an explicit blocked mask.

    `finite` carries the log-sigma values (0 elsewhere); `blocked` marks
    entries whose softmax weight must be exactly zero.
    """

    finite: np.ndarray
    blocked: np.ndarray
    layout: StreamLayout

    def __post_init__(self):
        finite = np.asarray(self.finite, dtype=np.float64)
        blocked = np.asarray(self.blocked, dtype=bool)
        if finite.shape != blocked.shape or finite.ndim != 2 or finite.shape[0] != finite.shape[1]:
            raise InvalidArgumentError("bias must be square with matching mask")
        if not np.all(np.isfinite(finite)):
            raise InvalidArgumentError("finite part must contain no inf/nan")
        object.__setattr__(self, "finite", finite)
        object.__setattr__(self, "blocked", blocked)

    @property
    def size(self) -> int:
        return self.finite.shape[0]

    def dense(self) -> np.ndarray:
        """The matrix with -inf at blocked entries, for inspection only."""
        out = self.finite.copy()
        out[self.blocked] = -np.inf
        return out


def build_bias(layout: StreamLayout, spec: ModulationSpec, strict: bool = False) -> BiasMatrix:
    """Construct the bias matrix for a concatenated-stream layout.

    Every cue in the layout must have a strength.  sigma_k = 0 blocks the
    x->cue-k block; with `strict` it additionally blocks text and context
    rows from that cue's columns, making the cue equivalent to deletion
    for every stream (by default only x-rows carry that guarantee).
    """
    total = layout.total
    finite = np.zeros((total, total), dtype=np.float64)
    blocked = np.zeros((total, total), dtype=bool)
    x_idx = layout.indices(Role.NOISY_IMAGE)
    for cue_id in layout.cue_ids:
        sigma = spec.sigma(cue_id)
        start, stop = layout.cue_range(cue_id)
        # Cue rows see nothing outside their own stream.
        blocked[start:stop, :] = True
        blocked[start:stop, start:stop] = False
        if x_idx.size:
            if sigma == 0.0:
                blocked[np.ix_(x_idx, np.arange(start, stop))] = True
            else:
                finite[np.ix_(x_idx, np.arange(start, stop))] = np.log(sigma)
        if strict and sigma == 0.0:
            for role in (Role.TEXT, Role.CONTEXT):
                rows = layout.indices(role)
                if rows.size:
                    blocked[np.ix_(rows, np.arange(start, stop))] = True
    return BiasMatrix(finite=finite, blocked=blocked, layout=layout)
