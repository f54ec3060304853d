"""Layer stacks, compositing math, and brush rasterization."""

from .composite import (
    COLOR_GRID,
    DEFAULT_STROKE_ALPHA,
    ColorStroke,
    composite_color,
    composite_edge,
    degrade_color_map,
)
from .stack import (
    ColorLayer,
    ColorStrokeSpec,
    ContentLayer,
    FlattenResult,
    Layer,
    LayerStack,
    SpatialLayer,
    Stroke,
    StructuralLayer,
    Transform,
    flatten,
    layer_from_json,
    layer_to_json,
    stack_from_json,
    stack_to_json,
)
from .strokes import rasterize_stroke

__all__ = [
    "COLOR_GRID",
    "DEFAULT_STROKE_ALPHA",
    "ColorStroke",
    "composite_color",
    "composite_edge",
    "degrade_color_map",
    "ColorLayer",
    "ColorStrokeSpec",
    "ContentLayer",
    "FlattenResult",
    "Layer",
    "LayerStack",
    "SpatialLayer",
    "Stroke",
    "StructuralLayer",
    "Transform",
    "flatten",
    "layer_from_json",
    "layer_to_json",
    "stack_from_json",
    "stack_to_json",
    "rasterize_stroke",
]
