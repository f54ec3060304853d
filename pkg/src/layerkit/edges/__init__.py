"""Structural-map extraction: Canny plus file-backed external providers."""

from .canny import CannyParams, canny
from .registry import (
    ExtractorRegistry,
    canny_extractor,
    default_registry,
    file_backed_extractor,
    pick_extractor,
)

__all__ = [
    "CannyParams",
    "canny",
    "ExtractorRegistry",
    "canny_extractor",
    "default_registry",
    "file_backed_extractor",
    "pick_extractor",
]
