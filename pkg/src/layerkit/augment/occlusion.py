"""Brushstroke occlusion for completion-training data.

Random white polyline strokes simulate occluded regions on an extracted
object; the learning target is the unoccluded piece.  Strokes must land
mostly on the object (at least 30% of painted area inside its mask).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..compositor import rasterize_stroke
from .piece import ForegroundPiece

MIN_OVERLAP = 0.3
MAX_STROKES = 4


@dataclass(frozen=True)
class OcclusionRecord:
    strokes: tuple  # ((points, radius), ...) with points as ((x, y), ...)

    def to_json(self) -> dict:
        return {
            "strokes": [
                {"points": [list(p) for p in points], "radius": radius}
                for points, radius in self.strokes
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "OcclusionRecord":
        return cls(
            strokes=tuple(
                (tuple(tuple(map(float, p)) for p in s["points"]), float(s["radius"]))
                for s in data["strokes"]
            )
        )


def _draw_stroke(h: int, w: int, mask: np.ndarray, rng: np.random.Generator):
    ys, xs = np.nonzero(mask > 0.5)
    start = int(rng.integers(0, ys.size))
    x, y = float(xs[start]), float(ys[start])
    step = max(4.0, 0.25 * min(h, w))
    points = [(x, y)]
    for _ in range(int(rng.integers(2, 7))):
        x = float(np.clip(x + rng.uniform(-step, step), 0, w - 1))
        y = float(np.clip(y + rng.uniform(-step, step), 0, h - 1))
        points.append((x, y))
    radius = max(2.0, float(rng.uniform(0.04, 0.12)) * min(h, w))
    return tuple(points), radius


def sample_occlusion_record(piece: ForegroundPiece, rng: np.random.Generator) -> OcclusionRecord:
    """Sample 1-4 strokes, resampling until the 30% overlap floor holds."""
    h, w = piece.size
    best: tuple[float, OcclusionRecord] | None = None
    for _ in range(20):
        n = int(rng.integers(1, MAX_STROKES + 1))
        strokes = tuple(_draw_stroke(h, w, piece.mask, rng) for _ in range(n))
        union = np.zeros((h, w))
        for points, radius in strokes:
            union = np.maximum(union, rasterize_stroke(list(points), radius, h, w))
        area = union.sum()
        overlap = float((union * piece.mask).sum() / area) if area else 0.0
        record = OcclusionRecord(strokes=strokes)
        if overlap >= MIN_OVERLAP:
            return record
        if best is None or overlap > best[0]:
            best = (overlap, record)
    return best[1]


def stroke_union(record: OcclusionRecord, h: int, w: int) -> np.ndarray:
    union = np.zeros((h, w))
    for points, radius in record.strokes:
        union = np.maximum(union, rasterize_stroke(list(points), radius, h, w))
    return union


def apply_occlusion(piece: ForegroundPiece, record: OcclusionRecord) -> tuple[ForegroundPiece, np.ndarray]:
    """Paint the strokes white; returns (occluded piece, union stroke mask)."""
    h, w = piece.size
    union = stroke_union(record, h, w)
    occluded = piece.image.copy()
    occluded[union > 0.5] = 1.0
    return piece.with_rasters(occluded), union


def occlusion_strokes(piece: ForegroundPiece, rng: np.random.Generator):
    """Spec op: returns (occluded piece, stroke mask, record)."""
    record = sample_occlusion_record(piece, rng)
    occluded, union = apply_occlusion(piece, record)
    return occluded, union, record
