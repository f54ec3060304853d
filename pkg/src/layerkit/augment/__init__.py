"""Foreground augmentations: perspective, resolution, relight, occlusion."""

from .occlusion import (
    OcclusionRecord,
    apply_occlusion,
    occlusion_strokes,
    sample_occlusion_record,
    stroke_union,
)
from .perspective import (
    Homography,
    PerspectiveRecord,
    apply_perspective,
    corner_points,
    perspective_aug,
    perspective_points,
    sample_perspective,
    sample_perspective_record,
    solve_homography,
    warp,
)
from .photometric import (
    RELIGHT_CATEGORIES,
    RELIGHT_PROBS,
    RelightRecord,
    ResolutionRecord,
    apply_relight,
    apply_resolution,
    lightmap_from_record,
    relight_aug,
    resolution_aug,
    sample_relight_category,
    sample_relight_record,
    sample_resolution_record,
)
from .piece import ForegroundPiece, extract_piece, paste_piece

__all__ = [
    "OcclusionRecord",
    "apply_occlusion",
    "occlusion_strokes",
    "sample_occlusion_record",
    "stroke_union",
    "Homography",
    "PerspectiveRecord",
    "apply_perspective",
    "corner_points",
    "perspective_aug",
    "perspective_points",
    "sample_perspective",
    "sample_perspective_record",
    "solve_homography",
    "warp",
    "RELIGHT_CATEGORIES",
    "RELIGHT_PROBS",
    "RelightRecord",
    "ResolutionRecord",
    "apply_relight",
    "apply_resolution",
    "lightmap_from_record",
    "relight_aug",
    "resolution_aug",
    "sample_relight_category",
    "sample_relight_record",
    "sample_resolution_record",
    "ForegroundPiece",
    "extract_piece",
    "paste_piece",
]
