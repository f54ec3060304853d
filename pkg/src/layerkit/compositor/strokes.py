"""Brush-stroke rasterization: polylines swept with a circular brush."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError


def rasterize_stroke(
    polyline: list[tuple[float, float]],
    radius: float,
    height: int,
    width: int,
) -> np.ndarray:
    """Binary mask of all pixels within `radius` of the polyline.

    Points are (x, y) with pixel centers at integer coordinates.  A single
    point paints a disc; repeated points collapse to the same disc.
    """
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    pts = np.asarray(polyline, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise InvalidArgumentError("polyline needs at least one point")
    mask = np.zeros((height, width), dtype=bool)
    segments = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)] or [(pts[0], pts[0])]
    r2 = radius * radius
    for a, b in segments:
        x_min = max(int(np.floor(min(a[0], b[0]) - radius)), 0)
        x_max = min(int(np.ceil(max(a[0], b[0]) + radius)), width - 1)
        y_min = max(int(np.floor(min(a[1], b[1]) - radius)), 0)
        y_max = min(int(np.ceil(max(a[1], b[1]) + radius)), height - 1)
        if x_min > x_max or y_min > y_max:
            continue
        ys, xs = np.mgrid[y_min : y_max + 1, x_min : x_max + 1]
        ab = b - a
        length2 = ab @ ab
        if length2 == 0.0:
            dist2 = (xs - a[0]) ** 2 + (ys - a[1]) ** 2
        else:
            t = ((xs - a[0]) * ab[0] + (ys - a[1]) * ab[1]) / length2
            t = np.clip(t, 0.0, 1.0)
            dist2 = (xs - (a[0] + t * ab[0])) ** 2 + (ys - (a[1] + t * ab[1])) ** 2
        mask[y_min : y_max + 1, x_min : x_max + 1] |= dist2 <= r2
    return mask.astype(np.float64)
