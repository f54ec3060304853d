"""In-memory edit sessions with serialized per-session mutations.

Each session owns an immutable base image and a LayerStack snapshot; a
revision counter increases on every mutation, and all reads/composites
run against consistent snapshots.  Optimistic concurrency uses If-Match
on the revision: a stale value never mutates anything.
"""

from __future__ import annotations

import base64
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..compositor import FlattenResult, LayerStack, flatten
from ..raster import content_digest, save_png


class SessionNotFound(KeyError):
    pass


class RevisionConflict(RuntimeError):
    pass


@dataclass
class CompositeArtifacts:
    """PNG bytes and digests of one revision's flatten result."""

    revision: int
    result: FlattenResult
    pngs: dict[str, bytes]
    digests: dict[str, Optional[str]]


@dataclass
class Session:
    session_id: str
    base: np.ndarray
    stack: LayerStack
    revision: int = 0
    layer_counter: int = 0
    last_generation: Optional[dict] = None
    lock: threading.RLock = field(default_factory=threading.RLock)
    _composite_cache: Optional[CompositeArtifacts] = None

    def next_layer_id(self) -> str:
        self.layer_counter += 1
        return f"L{self.layer_counter}"

    def composite(self) -> CompositeArtifacts:
        with self.lock:
            if self._composite_cache is not None and self._composite_cache.revision == self.revision:
                return self._composite_cache
            result = flatten(self.stack, self.base)
            pngs: dict[str, bytes] = {"image": save_png(result.image)}
            if result.mask is not None:
                pngs["mask"] = save_png(result.mask)
            if result.edges is not None:
                pngs["edges"] = save_png(result.edges)
            if result.colors is not None:
                pngs["colors"] = save_png(result.colors)
            digests = {
                key: (content_digest(pngs[key]) if key in pngs else None)
                for key in ("image", "mask", "edges", "colors")
            }
            artifacts = CompositeArtifacts(self.revision, result, pngs, digests)
            self._composite_cache = artifacts
            return artifacts


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, base: np.ndarray) -> Session:
        session_id = uuid.uuid4().hex[:12]
        session = Session(
            session_id=session_id,
            base=np.asarray(base, dtype=np.float64),
            stack=LayerStack(height=base.shape[0], width=base.shape[1]),
        )
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFound(session_id)
        return session

    def mutate(self, session_id: str, expected_revision: Optional[int], fn) -> Session:
        """Apply fn(session) under the session lock; bump the revision.

        `expected_revision` mismatches raise before fn runs, leaving the
        session untouched.
        """
        session = self.get(session_id)
        with session.lock:
            if expected_revision is not None and expected_revision != session.revision:
                raise RevisionConflict(
                    f"expected revision {expected_revision}, session is at {session.revision}"
                )
            fn(session)
            session.revision += 1
        return session


def png_b64(arr_bytes: bytes) -> str:
    return base64.b64encode(arr_bytes).decode("ascii")
