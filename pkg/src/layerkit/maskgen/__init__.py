"""Spatial-layer data construction: perceptual change masks and removal pairs."""

from .derive import (
    ChangeMask,
    MaskRejection,
    derive_mask,
    derive_mask_multi,
    default_smoothing_radius,
    DEFAULT_DELTA_E,
    PRESCREEN_THRESHOLDS,
    RATIO_WINDOW,
)
from .hull import brute_force_hull, convex_hull, fill_convex_polygon
from .lab import lab_distance_map, lab_to_srgb, srgb_to_lab
from .removal import RemovalPair, synthesize_removal_pair

__all__ = [
    "ChangeMask",
    "MaskRejection",
    "derive_mask",
    "derive_mask_multi",
    "default_smoothing_radius",
    "DEFAULT_DELTA_E",
    "PRESCREEN_THRESHOLDS",
    "RATIO_WINDOW",
    "brute_force_hull",
    "convex_hull",
    "fill_convex_polygon",
    "lab_distance_map",
    "lab_to_srgb",
    "srgb_to_lab",
    "RemovalPair",
    "synthesize_removal_pair",
]
