"""Positional remapping from a reduced cue grid to full-resolution coordinates."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError


def remap_positions(h: int, w: int, H: int, W: int) -> np.ndarray:
    """Map each cell of an h x w grid to its original H x W coordinates.

    Cell (i, j) lands at (i * H / h, j * W / w), kept as exact reals so
    that reduced-resolution cue tokens line up with the full-resolution
    tokens covering the same region.  Returns an (h * w, 2) array in
    row-major cell order.
    """
    if min(h, w, H, W) <= 0:
        raise InvalidArgumentError("grid dimensions must be positive")
    if h > H or w > W:
        raise InvalidArgumentError("reduced grid cannot exceed the original size")
    rows = np.arange(h, dtype=np.float64) * (H / h)
    cols = np.arange(w, dtype=np.float64) * (W / w)
    pi, pj = np.meshgrid(rows, cols, indexing="ij")
    return np.stack([pi.ravel(), pj.ravel()], axis=1)


def sinusoidal_encoding(positions: np.ndarray, dim: int, base: float = 10000.0) -> np.ndarray:
    """Fixed sin/cos features of (P_i, P_j) coordinate pairs.

    Half the channels encode P_i, half P_j; `dim` must be divisible by 4
    so each coordinate gets full sin/cos pairs.
    """
    if dim % 4 != 0:
        raise InvalidArgumentError("encoding dim must be divisible by 4")
    pos = np.asarray(positions, dtype=np.float64)
    quarter = dim // 4
    freqs = base ** (-np.arange(quarter, dtype=np.float64) / quarter)
    out = np.empty((pos.shape[0], dim), dtype=np.float64)
    for axis in (0, 1):
        angles = pos[:, axis : axis + 1] * freqs[None, :]
        out[:, 2 * axis * quarter : (2 * axis + 1) * quarter] = np.sin(angles)
        out[:, (2 * axis + 1) * quarter : (2 * axis + 2) * quarter] = np.cos(angles)
    return out
