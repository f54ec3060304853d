"""Spatial-layer mask derivation from source/edited pairs.

Change detection happens in CIELAB; the suprathreshold pixel set is
covered by its (global) convex hull, smoothed with a rolling circle
(morphological closing then opening with a disc), and accepted only when
the hull-area ratio falls inside [0.001, 0.75].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.ndimage import binary_closing, binary_opening

from ..errors import InvalidArgumentError
from ..raster import disc_element
from .hull import convex_hull, fill_convex_polygon
from .lab import lab_distance_map

DEFAULT_DELTA_E = 6.0
RATIO_WINDOW = (0.001, 0.75)
PRESCREEN_THRESHOLDS = (6.0, 3.0, 12.0)


def default_smoothing_radius(height: int, width: int) -> int:
    return max(4, round(0.01 * min(height, width)))


@dataclass(frozen=True)
class ChangeMask:
    mask: np.ndarray
    hull_area_ratio: float
    delta_threshold: float


@dataclass(frozen=True)
class MaskRejection:
    reason: str  # no-change | too-small | too-large
    hull_area_ratio: float = 0.0
    delta_threshold: float = 0.0


DeriveResult = Union[ChangeMask, MaskRejection]


def derive_mask(
    src: np.ndarray,
    edited: np.ndarray,
    threshold: float = DEFAULT_DELTA_E,
    radius: Optional[int] = None,
) -> DeriveResult:
    """Derive the spatial edit mask for one (source, edited) pair.

    Returns a ChangeMask, or a MaskRejection when nothing changed or the
    hull-area ratio leaves the acceptance window.
    """
    src = np.asarray(src, dtype=np.float64)
    edited = np.asarray(edited, dtype=np.float64)
    if src.shape != edited.shape:
        raise InvalidArgumentError(f"shape mismatch: {src.shape} vs {edited.shape}")
    if threshold <= 0:
        raise InvalidArgumentError("threshold must be positive")
    h, w = src.shape[:2]
    if radius is None:
        radius = default_smoothing_radius(h, w)

    delta = lab_distance_map(src, edited)
    ys, xs = np.nonzero(delta > threshold)
    if ys.size == 0:
        return MaskRejection(reason="no-change", delta_threshold=threshold)

    hull = convex_hull(np.stack([xs, ys], axis=1))
    filled = fill_convex_polygon(hull, h, w)
    disc = disc_element(radius)
    smoothed = binary_opening(binary_closing(filled, structure=disc), structure=disc)
    # Opening of tiny hulls can erase them entirely; they count as too-small.
    ratio = float(smoothed.sum()) / float(h * w)
    if ratio < RATIO_WINDOW[0]:
        return MaskRejection(reason="too-small", hull_area_ratio=ratio, delta_threshold=threshold)
    if ratio > RATIO_WINDOW[1]:
        return MaskRejection(reason="too-large", hull_area_ratio=ratio, delta_threshold=threshold)
    return ChangeMask(mask=smoothed, hull_area_ratio=ratio, delta_threshold=threshold)


def derive_mask_multi(
    src: np.ndarray,
    edited: np.ndarray,
    thresholds: tuple[float, ...] = PRESCREEN_THRESHOLDS,
    radius: Optional[int] = None,
) -> DeriveResult:
    """Pre-screening over several thresholds: accept the first in-window
    result, reject only when every threshold fails."""
    last: DeriveResult = MaskRejection(reason="no-change")
    for threshold in thresholds:
        result = derive_mask(src, edited, threshold=threshold, radius=radius)
        if isinstance(result, ChangeMask):
            return result
        last = result
    return last
