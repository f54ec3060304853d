"""Condition-map compositing: edge add/subtract, color alpha blending,
and color-map degradation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..raster import downsample_area, resize_bilinear

COLOR_GRID = 16
DEFAULT_STROKE_ALPHA = 0.4


@dataclass(frozen=True)
class ColorStroke:
    """One painted color region: binary mask, RGB color, opacity."""

    mask: np.ndarray
    color: tuple[float, float, float]
    alpha: float = DEFAULT_STROKE_ALPHA

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=np.float64)
        if not np.isin(np.unique(mask), (0.0, 1.0)).all():
            raise InvalidArgumentError("stroke masks must be binary")
        object.__setattr__(self, "mask", mask)
        if not all(0.0 <= c <= 1.0 for c in self.color):
            raise InvalidArgumentError("color components must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgumentError("alpha must lie in [0, 1]")


def composite_edge(edge: np.ndarray, m_add: np.ndarray, m_sub: np.ndarray) -> np.ndarray:
    """Subtract strokes erase edges, then add strokes introduce new ones:
    E_sub = E * (1 - M_sub);  E_cond = E_sub + M_add * (1 - E_sub)."""
    edge = np.asarray(edge, dtype=np.float64)
    m_add = np.asarray(m_add, dtype=np.float64)
    m_sub = np.asarray(m_sub, dtype=np.float64)
    if not (edge.shape == m_add.shape == m_sub.shape):
        raise InvalidArgumentError("edge map and stroke masks must share one shape")
    if edge.min() < 0 or edge.max() > 1:
        raise InvalidArgumentError("edge map must lie in [0, 1]")
    e_sub = edge * (1.0 - m_sub)
    return e_sub + m_add * (1.0 - e_sub)


def composite_color(color_map: np.ndarray, strokes: list[ColorStroke]) -> np.ndarray:
    """Alpha-blend color strokes in order onto a color map:
    C <- (1 - alpha * M) * C + alpha * M * c, per channel."""
    out = np.asarray(color_map, dtype=np.float64).copy()
    if out.ndim != 3 or out.shape[-1] != 3:
        raise InvalidArgumentError("color map must be (H, W, 3)")
    for stroke in strokes:
        if stroke.mask.shape != out.shape[:2]:
            raise InvalidArgumentError("stroke mask size must match the color map")
        m = stroke.mask[..., None]
        c = np.asarray(stroke.color, dtype=np.float64)
        out = (1.0 - stroke.alpha * m) * out + stroke.alpha * m * c
    return out


def degrade_color_map(image: np.ndarray, cue_size: int | tuple[int, int] = 512) -> np.ndarray:
    """Strip high frequencies: area-average down to the 16x16 palette grid,
    then bilinear back up to the cue resolution."""
    img = np.asarray(image, dtype=np.float64)
    if img.min() < 0 or img.max() > 1:
        raise InvalidArgumentError("image must lie in [0, 1]")
    out_h, out_w = (cue_size, cue_size) if isinstance(cue_size, int) else cue_size
    grid_h = min(COLOR_GRID, img.shape[0])
    grid_w = min(COLOR_GRID, img.shape[1])
    small = downsample_area(img, grid_h, grid_w)
    return np.clip(resize_bilinear(small, out_h, out_w), 0.0, 1.0)
