"""Resolution and relight augmentations.

Relighting is a multiplicative stand-in for a neural relighting model: a
smooth scalar field (linear gradient plus one Gaussian blob, normalized to
[0.4, 1.6]) tinted by a category-dependent chroma.  Categories follow the
50/30/20 grayscale / low-saturation / high-saturation split.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..raster import resize_bilinear
from .piece import ForegroundPiece

SCALE_RANGE = (0.15, 0.9)
LIGHTMAP_RANGE = (0.4, 1.6)
RELIGHT_CATEGORIES = ("grayscale", "low_saturation", "high_saturation")
RELIGHT_PROBS = (0.5, 0.3, 0.2)
LOW_SAT_MAX = 0.2
HIGH_SAT_MAX = 0.8


@dataclass(frozen=True)
class ResolutionRecord:
    scale: float

    def to_json(self) -> dict:
        return {"scale": self.scale}

    @classmethod
    def from_json(cls, data: dict) -> "ResolutionRecord":
        return cls(scale=float(data["scale"]))


def sample_resolution_record(rng: np.random.Generator) -> ResolutionRecord:
    return ResolutionRecord(scale=float(rng.uniform(*SCALE_RANGE)))


def apply_resolution(piece: ForegroundPiece, record: ResolutionRecord) -> ForegroundPiece:
    """Bilinear down to `scale` of the original size, bilinear back up."""
    h, w = piece.size
    s = record.scale
    if s == 1.0:
        return piece
    small_h, small_w = max(1, round(h * s)), max(1, round(w * s))
    if min(h, w) * SCALE_RANGE[0] < 1:
        raise InvalidArgumentError("piece too small for resolution augmentation")
    small = resize_bilinear(piece.image, small_h, small_w)
    return piece.with_rasters(np.clip(resize_bilinear(small, h, w), 0.0, 1.0))


def resolution_aug(piece: ForegroundPiece, rng: np.random.Generator) -> tuple[ForegroundPiece, ResolutionRecord]:
    record = sample_resolution_record(rng)
    return apply_resolution(piece, record), record


@dataclass(frozen=True)
class RelightRecord:
    category: str
    hue: float
    saturation: float
    gradient_angle: float
    gradient_amp: float
    blob_center: tuple[float, float]  # fractional (y, x)
    blob_sigma: float                 # fraction of min(h, w)
    blob_amp: float

    def to_json(self) -> dict:
        return {
            "category": self.category,
            "hue": self.hue,
            "saturation": self.saturation,
            "gradient_angle": self.gradient_angle,
            "gradient_amp": self.gradient_amp,
            "blob_center": list(self.blob_center),
            "blob_sigma": self.blob_sigma,
            "blob_amp": self.blob_amp,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RelightRecord":
        return cls(
            category=data["category"],
            hue=float(data["hue"]),
            saturation=float(data["saturation"]),
            gradient_angle=float(data["gradient_angle"]),
            gradient_amp=float(data["gradient_amp"]),
            blob_center=tuple(map(float, data["blob_center"])),
            blob_sigma=float(data["blob_sigma"]),
            blob_amp=float(data["blob_amp"]),
        )


def sample_relight_category(rng: np.random.Generator) -> str:
    return RELIGHT_CATEGORIES[int(rng.choice(len(RELIGHT_CATEGORIES), p=RELIGHT_PROBS))]


def sample_relight_record(rng: np.random.Generator) -> RelightRecord:
    category = sample_relight_category(rng)
    if category == "grayscale":
        saturation = 0.0
    elif category == "low_saturation":
        saturation = float(rng.uniform(0.02, LOW_SAT_MAX))
    else:
        saturation = float(rng.uniform(LOW_SAT_MAX, HIGH_SAT_MAX))
    return RelightRecord(
        category=category,
        hue=float(rng.uniform(0.0, 1.0)),
        saturation=saturation,
        gradient_angle=float(rng.uniform(0.0, 2.0 * np.pi)),
        gradient_amp=float(rng.uniform(0.3, 1.0)),
        blob_center=(float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.0, 1.0))),
        blob_sigma=float(rng.uniform(0.15, 0.4)),
        blob_amp=float(rng.uniform(-1.0, 1.0)),
    )


def lightmap_from_record(h: int, w: int, record: RelightRecord) -> np.ndarray:
    """(h, w, 3) multiplicative lightmap; grayscale categories have R=G=B."""
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    gx = np.cos(record.gradient_angle) * (xs / max(w - 1, 1))
    gy = np.sin(record.gradient_angle) * (ys / max(h - 1, 1))
    field = record.gradient_amp * (gx + gy)
    cy, cx = record.blob_center
    sigma = record.blob_sigma * min(h, w)
    blob = np.exp(-(((ys - cy * (h - 1)) ** 2 + (xs - cx * (w - 1)) ** 2) / (2.0 * sigma**2)))
    field = field + record.blob_amp * blob
    lo, hi = field.min(), field.max()
    if hi - lo < 1e-12:
        value = np.full((h, w), 1.0)
    else:
        value = LIGHTMAP_RANGE[0] + (field - lo) / (hi - lo) * (LIGHTMAP_RANGE[1] - LIGHTMAP_RANGE[0])
    tint = np.array(colorsys.hsv_to_rgb(record.hue, record.saturation, 1.0))
    return value[..., None] * tint[None, None, :]


def apply_relight(piece: ForegroundPiece, record: RelightRecord) -> ForegroundPiece:
    h, w = piece.size
    lightmap = lightmap_from_record(h, w, record)
    return piece.with_rasters(np.clip(piece.image * lightmap, 0.0, 1.0))


def relight_aug(piece: ForegroundPiece, rng: np.random.Generator) -> tuple[ForegroundPiece, RelightRecord]:
    record = sample_relight_record(rng)
    return apply_relight(piece, record), record
