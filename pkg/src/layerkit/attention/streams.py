"""Role-tagged token streams, the unit everything in the attention core consumes."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import InvalidArgumentError


class Role(Enum):
    TEXT = "text"
    NOISY_IMAGE = "noisy_image"
    CONTEXT = "context"
    CUE = "cue"


@dataclass(frozen=True)
class TokenStream:
    """A sequence of N feature vectors with a stream role.

    `positions` holds (P_i, P_j) grid coordinates per token (text streams
    carry none).  `cue_id` is set exactly when role is CUE.
    """

    role: Role
    features: np.ndarray
    positions: Optional[np.ndarray] = None
    cue_id: Optional[str] = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise InvalidArgumentError("features must be an N x d matrix with N >= 1")
        object.__setattr__(self, "features", feats)
        if self.role is Role.CUE and not self.cue_id:
            raise InvalidArgumentError("cue streams need a cue_id")
        if self.role is not Role.CUE and self.cue_id is not None:
            raise InvalidArgumentError("cue_id is only valid on cue streams")
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=np.float64)
            if pos.shape != (feats.shape[0], 2):
                raise InvalidArgumentError("positions must be N pairs of coordinates")
            object.__setattr__(self, "positions", pos)

    @property
    def n_tokens(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def validate_streams(streams: list[TokenStream]) -> None:
    """Check the invariants of one attention call's stream collection."""
    if not streams:
        raise InvalidArgumentError("at least one stream is required")
    dims = {s.dim for s in streams}
    if len(dims) != 1:
        raise InvalidArgumentError(f"all streams must share one feature dim, got {sorted(dims)}")
    cue_ids = [s.cue_id for s in streams if s.role is Role.CUE]
    if len(cue_ids) != len(set(cue_ids)):
        raise InvalidArgumentError("cue ids must be unique within a call")


@dataclass(frozen=True)
class StreamLayout:
    """Contiguous, disjoint index ranges of concatenated streams.

    Concatenation order is fixed as [text; noisy image; context; cues...],
    matching the order the model assembles its final Q/K/V.
    """

    entries: tuple = field(default_factory=tuple)  # (role, cue_id, start, stop)

    @classmethod
    def from_counts(
        cls,
        n_text: int = 0,
        n_image: int = 0,
        n_context: int = 0,
        cues: Optional[dict[str, int]] = None,
    ) -> "StreamLayout":
        entries = []
        offset = 0
        for role, count in ((Role.TEXT, n_text), (Role.NOISY_IMAGE, n_image), (Role.CONTEXT, n_context)):
            if count < 0:
                raise InvalidArgumentError("stream sizes must be non-negative")
            if count:
                entries.append((role, None, offset, offset + count))
                offset += count
        for cue_id, count in (cues or {}).items():
            if count < 1:
                raise InvalidArgumentError(f"cue {cue_id!r} must have at least one token")
            entries.append((Role.CUE, cue_id, offset, offset + count))
            offset += count
        if offset == 0:
            raise InvalidArgumentError("layout is empty")
        return cls(entries=tuple(entries))

    @classmethod
    def from_streams(cls, streams: list[TokenStream]) -> "StreamLayout":
        validate_streams(streams)
        order = {Role.TEXT: 0, Role.NOISY_IMAGE: 1, Role.CONTEXT: 2, Role.CUE: 3}
        if [order[s.role] for s in streams] != sorted(order[s.role] for s in streams):
            raise InvalidArgumentError("streams must arrive in [text; x; y; cues] order")
        counts = {Role.TEXT: 0, Role.NOISY_IMAGE: 0, Role.CONTEXT: 0}
        cues: dict[str, int] = {}
        for s in streams:
            if s.role is Role.CUE:
                cues[s.cue_id] = s.n_tokens
            else:
                counts[s.role] += s.n_tokens
        return cls.from_counts(counts[Role.TEXT], counts[Role.NOISY_IMAGE], counts[Role.CONTEXT], cues)

    @property
    def total(self) -> int:
        return self.entries[-1][3] if self.entries else 0

    def indices(self, role: Role, cue_id: Optional[str] = None) -> np.ndarray:
        for r, cid, start, stop in self.entries:
            if r is role and cid == cue_id:
                return np.arange(start, stop)
        return np.arange(0)

    @property
    def cue_ids(self) -> list[str]:
        return [cid for r, cid, _, _ in self.entries if r is Role.CUE]

    def cue_range(self, cue_id: str) -> tuple[int, int]:
        for r, cid, start, stop in self.entries:
            if r is Role.CUE and cid == cue_id:
                return start, stop
        raise InvalidArgumentError(f"cue {cue_id!r} not in layout")
