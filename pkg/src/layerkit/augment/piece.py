"""Foreground pieces: an extracted object image with its binary mask."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class ForegroundPiece:
    image: np.ndarray  # (h, w, 3) in [0, 1]
    mask: np.ndarray   # (h, w) binary
    origin: tuple[int, int] = (0, 0)  # (y, x) offset in the source image

    def __post_init__(self):
        image = np.asarray(self.image, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=np.float64)
        if image.shape[:2] != mask.shape:
            raise InvalidArgumentError("piece image and mask sizes differ")
        if mask.sum() == 0:
            raise InvalidArgumentError("piece mask is empty")
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "mask", (mask > 0.5).astype(np.float64))

    @property
    def size(self) -> tuple[int, int]:
        """(h, w) of the piece canvas."""
        return self.mask.shape

    def with_rasters(self, image: np.ndarray, mask: np.ndarray | None = None) -> "ForegroundPiece":
        return replace(self, image=image, mask=self.mask if mask is None else mask)


def extract_piece(image: np.ndarray, mask: np.ndarray) -> ForegroundPiece:
    """Crop the masked object (with its bbox) out of a source image."""
    mask = np.asarray(mask) > 0.5
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise InvalidArgumentError("mask selects nothing")
    y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    return ForegroundPiece(
        image=np.asarray(image, dtype=np.float64)[y0:y1, x0:x1],
        mask=mask[y0:y1, x0:x1].astype(np.float64),
        origin=(int(y0), int(x0)),
    )


def paste_piece(canvas: np.ndarray, piece: ForegroundPiece) -> np.ndarray:
    """Alpha-paste a piece back at its recorded origin."""
    out = np.asarray(canvas, dtype=np.float64).copy()
    y0, x0 = piece.origin
    h, w = piece.size
    region = out[y0 : y0 + h, x0 : x0 + w]
    if region.shape[:2] != (h, w):
        raise InvalidArgumentError("piece does not fit the canvas at its origin")
    alpha = piece.mask[..., None]
    out[y0 : y0 + h, x0 : x0 + w] = alpha * piece.image + (1 - alpha) * region
    return out
