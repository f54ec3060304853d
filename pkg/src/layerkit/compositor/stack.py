"""Layer stacks and their deterministic flattening into condition maps.

A stack is an ordered snapshot of content / spatial / structural / color
layers over a fixed canvas.  Flattening composites content pieces onto a
base image (source-over, z-order) and reduces the control layers to the
condition maps the model consumes, together with their per-cue strengths.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Union

import numpy as np

from ..errors import InvalidArgumentError, LayerOutOfBoundsError
from ..raster import load_png, save_png
from .composite import (
    DEFAULT_STROKE_ALPHA,
    ColorStroke,
    composite_color,
    composite_edge,
    degrade_color_map,
)
from .strokes import rasterize_stroke


@dataclass(frozen=True)
class Stroke:
    """A brush polyline in canvas coordinates."""

    points: tuple[tuple[float, float], ...]
    radius: float

    def __post_init__(self):
        if len(self.points) < 1:
            raise InvalidArgumentError("stroke needs at least one point")
        if self.radius <= 0:
            raise InvalidArgumentError("stroke radius must be positive")

    def mask(self, height: int, width: int) -> np.ndarray:
        return rasterize_stroke(list(self.points), self.radius, height, width)


@dataclass(frozen=True)
class ColorStrokeSpec(Stroke):
    color: tuple[float, float, float] = (0.0, 0.0, 0.0)
    alpha: float = DEFAULT_STROKE_ALPHA

    def __post_init__(self):
        super().__post_init__()
        if not all(0.0 <= c <= 1.0 for c in self.color):
            raise InvalidArgumentError("color components must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgumentError("alpha must lie in [0, 1]")


@dataclass(frozen=True)
class Transform:
    """Content placement: translate to (x, y), uniform scale, rotate (deg)."""

    x: float = 0.0
    y: float = 0.0
    scale: float = 1.0
    rotation: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise InvalidArgumentError("scale must be positive")


@dataclass(frozen=True)
class ContentLayer:
    layer_id: str
    image: np.ndarray
    mask: np.ndarray
    transform: Transform = Transform()
    strength: float = 1.0
    visible: bool = True
    kind: str = field(default="content", init=False)


@dataclass(frozen=True)
class SpatialLayer:
    layer_id: str
    mask: Optional[np.ndarray] = None
    strokes: tuple[Stroke, ...] = ()
    strength: float = 1.0
    visible: bool = True
    kind: str = field(default="spatial", init=False)


@dataclass(frozen=True)
class StructuralLayer:
    layer_id: str
    base_edges: Optional[np.ndarray] = None
    add_strokes: tuple[Stroke, ...] = ()
    sub_strokes: tuple[Stroke, ...] = ()
    strength: float = 1.0
    visible: bool = True
    kind: str = field(default="structural", init=False)


@dataclass(frozen=True)
class ColorLayer:
    layer_id: str
    base: Literal["source", "blank"] = "source"
    strokes: tuple[ColorStrokeSpec, ...] = ()
    strength: float = 1.0
    visible: bool = True
    kind: str = field(default="color", init=False)


Layer = Union[ContentLayer, SpatialLayer, StructuralLayer, ColorLayer]


@dataclass(frozen=True)
class LayerStack:
    height: int
    width: int
    layers: tuple[Layer, ...] = ()

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise InvalidArgumentError("canvas must be non-empty")
        ids = [l.layer_id for l in self.layers]
        if len(ids) != len(set(ids)):
            raise InvalidArgumentError("layer ids must be unique")
        for layer in self.layers:
            if layer.strength < 0:
                raise InvalidArgumentError("layer strength must be >= 0")

    def with_layer(self, layer: Layer, index: Optional[int] = None) -> "LayerStack":
        layers = list(self.layers)
        if index is None:
            layers.append(layer)
        else:
            layers.insert(index, layer)
        return replace(self, layers=tuple(layers))

    def without_layer(self, layer_id: str) -> "LayerStack":
        layers = tuple(l for l in self.layers if l.layer_id != layer_id)
        if len(layers) == len(self.layers):
            raise InvalidArgumentError(f"no layer {layer_id!r}")
        return replace(self, layers=layers)

    def replace_layer(self, layer: Layer) -> "LayerStack":
        layers = tuple(layer if l.layer_id == layer.layer_id else l for l in self.layers)
        if all(l.layer_id != layer.layer_id for l in self.layers):
            raise InvalidArgumentError(f"no layer {layer.layer_id!r}")
        return replace(self, layers=layers)

    def reorder_layer(self, layer_id: str, new_index: int) -> "LayerStack":
        layers = list(self.layers)
        current = next((i for i, l in enumerate(layers) if l.layer_id == layer_id), None)
        if current is None:
            raise InvalidArgumentError(f"no layer {layer_id!r}")
        if not 0 <= new_index < len(layers):
            raise InvalidArgumentError("reorder index out of range")
        layer = layers.pop(current)
        layers.insert(new_index, layer)
        return replace(self, layers=tuple(layers))

    def get_layer(self, layer_id: str) -> Layer:
        for layer in self.layers:
            if layer.layer_id == layer_id:
                return layer
        raise InvalidArgumentError(f"no layer {layer_id!r}")


@dataclass(frozen=True)
class FlattenResult:
    """Model-facing view of a stack: composited input plus condition maps."""

    image: np.ndarray
    mask: Optional[np.ndarray]
    edges: Optional[np.ndarray]
    colors: Optional[np.ndarray]
    strengths: dict[str, float]


def _place_content(canvas: np.ndarray, layer: ContentLayer) -> np.ndarray:
    """Source-over placement with inverse-mapped bilinear resampling."""
    h, w = canvas.shape[:2]
    piece = np.asarray(layer.image, dtype=np.float64)
    pmask = np.asarray(layer.mask, dtype=np.float64)
    ph, pw = pmask.shape
    t = layer.transform
    theta = np.deg2rad(t.rotation)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    # Inverse transform: canvas -> piece coordinates (piece center anchored at (x, y)).
    dx, dy = xs - t.x, ys - t.y
    px = (cos_t * dx + sin_t * dy) / t.scale + (pw - 1) / 2.0
    py = (-sin_t * dx + cos_t * dy) / t.scale + (ph - 1) / 2.0
    inside = (px >= -0.5) & (px <= pw - 0.5) & (py >= -0.5) & (py <= ph - 0.5)
    if not inside.any():
        raise LayerOutOfBoundsError(layer.layer_id)

    pxc = np.clip(px, 0, pw - 1)
    pyc = np.clip(py, 0, ph - 1)
    x0 = np.floor(pxc).astype(int)
    y0 = np.floor(pyc).astype(int)
    x1 = np.minimum(x0 + 1, pw - 1)
    y1 = np.minimum(y0 + 1, ph - 1)
    fx = (pxc - x0)[..., None]
    fy = (pyc - y0)[..., None]
    sampled = (
        piece[y0, x0] * (1 - fx) * (1 - fy)
        + piece[y0, x1] * fx * (1 - fy)
        + piece[y1, x0] * (1 - fx) * fy
        + piece[y1, x1] * fx * fy
    )
    alpha = pmask[np.clip(np.round(pyc), 0, ph - 1).astype(int), np.clip(np.round(pxc), 0, pw - 1).astype(int)]
    alpha = np.where(inside, alpha, 0.0)[..., None]
    return alpha * sampled + (1.0 - alpha) * canvas


def _union_strokes(strokes, height: int, width: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=np.float64)
    for stroke in strokes:
        out = np.maximum(out, stroke.mask(height, width))
    return out


def flatten(stack: LayerStack, base: np.ndarray) -> FlattenResult:
    """Reduce a stack over a base image to {y, M, E_cond, C_cond, strengths}.

    Hidden layers are skipped.  At most one spatial layer may be visible.
    Structural layers merge by elementwise max of their individual
    composites; color strokes apply in z-order over the bottom-most color
    layer's base map.  Strength per cue comes from the topmost visible
    layer of that kind.
    """
    base = np.asarray(base, dtype=np.float64)
    if base.shape[:2] != (stack.height, stack.width):
        raise InvalidArgumentError("base image does not match canvas size")
    h, w = stack.height, stack.width

    image = base.copy()
    strengths: dict[str, float] = {}
    mask = None
    edges = None
    colors = None

    visible = [l for l in stack.layers if l.visible]
    spatial_layers = [l for l in visible if isinstance(l, SpatialLayer)]
    if len(spatial_layers) > 1:
        raise InvalidArgumentError("at most one spatial layer may be active")

    for layer in visible:
        if isinstance(layer, ContentLayer):
            image = _place_content(image, layer)

    if spatial_layers:
        layer = spatial_layers[0]
        mask = _union_strokes(layer.strokes, h, w)
        if layer.mask is not None:
            if layer.mask.shape != (h, w):
                raise InvalidArgumentError("spatial mask does not match canvas size")
            mask = np.maximum(mask, (np.asarray(layer.mask) > 0.5).astype(np.float64))
        strengths["spatial"] = layer.strength

    structural = [l for l in visible if isinstance(l, StructuralLayer)]
    if structural:
        merged = np.zeros((h, w), dtype=np.float64)
        for layer in structural:
            base_e = np.zeros((h, w)) if layer.base_edges is None else np.asarray(layer.base_edges, dtype=np.float64)
            if base_e.shape != (h, w):
                raise InvalidArgumentError("edge map does not match canvas size")
            m_add = _union_strokes(layer.add_strokes, h, w)
            m_sub = _union_strokes(layer.sub_strokes, h, w)
            merged = np.maximum(merged, composite_edge(base_e, m_add, m_sub))
        edges = merged
        strengths["structural"] = structural[-1].strength

    color_layers = [l for l in visible if isinstance(l, ColorLayer)]
    if color_layers:
        # Strokes blend onto the degraded source map (training-time base)
        # unless the bottom color layer asks for a blank canvas.
        if color_layers[0].base == "source":
            cmap = degrade_color_map(np.clip(image, 0, 1), (h, w))
        else:
            cmap = np.full((h, w, 3), 0.5)
        all_strokes = []
        for layer in color_layers:
            for spec in layer.strokes:
                all_strokes.append(ColorStroke(mask=spec.mask(h, w), color=spec.color, alpha=spec.alpha))
        colors = composite_color(cmap, all_strokes)
        strengths["color"] = color_layers[-1].strength

    return FlattenResult(image=image, mask=mask, edges=edges, colors=colors, strengths=strengths)


# ---------------------------------------------------------------------------
# JSON schema (the wire format used by the edit service and the UI)

def _hex_to_rgb(value: str) -> tuple[float, float, float]:
    value = value.lstrip("#")
    if len(value) != 6:
        raise InvalidArgumentError(f"bad hex color {value!r}")
    return tuple(int(value[i : i + 2], 16) / 255.0 for i in (0, 2, 4))


def _rgb_to_hex(rgb) -> str:
    return "#" + "".join(f"{int(round(c * 255)):02x}" for c in rgb)


def _png_b64(arr: Optional[np.ndarray]) -> Optional[str]:
    if arr is None:
        return None
    return base64.b64encode(save_png(arr)).decode("ascii")


def _b64_png(data: Optional[str]) -> Optional[np.ndarray]:
    if data is None:
        return None
    return load_png(base64.b64decode(data))


def _strokes_to_json(strokes) -> list[dict]:
    out = []
    for s in strokes:
        entry = {"points": [list(p) for p in s.points], "radius": s.radius}
        if isinstance(s, ColorStrokeSpec):
            entry["color"] = _rgb_to_hex(s.color)
            entry["alpha"] = s.alpha
        out.append(entry)
    return out


def _strokes_from_json(items, color: bool):
    strokes = []
    for item in items or []:
        points = tuple(tuple(map(float, p)) for p in item["points"])
        if color:
            strokes.append(
                ColorStrokeSpec(
                    points=points,
                    radius=float(item["radius"]),
                    color=_hex_to_rgb(item.get("color", "#000000")),
                    alpha=float(item.get("alpha", DEFAULT_STROKE_ALPHA)),
                )
            )
        else:
            strokes.append(Stroke(points=points, radius=float(item["radius"])))
    return tuple(strokes)


def layer_to_json(layer: Layer) -> dict:
    common = {
        "id": layer.layer_id,
        "kind": layer.kind,
        "visible": layer.visible,
        "strength": layer.strength,
    }
    if isinstance(layer, ContentLayer):
        t = layer.transform
        common.update(
            image=_png_b64(layer.image),
            mask=_png_b64(layer.mask),
            transform={"x": t.x, "y": t.y, "scale": t.scale, "rotation": t.rotation},
        )
    elif isinstance(layer, SpatialLayer):
        common.update(mask=_png_b64(layer.mask), strokes=_strokes_to_json(layer.strokes))
    elif isinstance(layer, StructuralLayer):
        common.update(
            base_edges=_png_b64(layer.base_edges),
            add_strokes=_strokes_to_json(layer.add_strokes),
            sub_strokes=_strokes_to_json(layer.sub_strokes),
        )
    elif isinstance(layer, ColorLayer):
        common.update(base=layer.base, strokes=_strokes_to_json(layer.strokes))
    return common


def layer_from_json(data: dict) -> Layer:
    kind = data.get("kind")
    common = dict(
        layer_id=data["id"],
        strength=float(data.get("strength", 1.0)),
        visible=bool(data.get("visible", True)),
    )
    if kind == "content":
        t = data.get("transform") or {}
        image = _b64_png(data.get("image"))
        mask = _b64_png(data.get("mask"))
        if image is None:
            raise InvalidArgumentError("content layer needs an image")
        if mask is None:
            mask = np.ones(image.shape[:2])
        return ContentLayer(
            image=image,
            mask=(mask > 0.5).astype(np.float64),
            transform=Transform(
                x=float(t.get("x", 0.0)),
                y=float(t.get("y", 0.0)),
                scale=float(t.get("scale", 1.0)),
                rotation=float(t.get("rotation", 0.0)),
            ),
            **common,
        )
    if kind == "spatial":
        mask = _b64_png(data.get("mask"))
        return SpatialLayer(
            mask=None if mask is None else (mask > 0.5).astype(np.float64),
            strokes=_strokes_from_json(data.get("strokes"), color=False),
            **common,
        )
    if kind == "structural":
        return StructuralLayer(
            base_edges=_b64_png(data.get("base_edges")),
            add_strokes=_strokes_from_json(data.get("add_strokes"), color=False),
            sub_strokes=_strokes_from_json(data.get("sub_strokes"), color=False),
            **common,
        )
    if kind == "color":
        base = data.get("base", "source")
        if base not in ("source", "blank"):
            raise InvalidArgumentError("color base must be 'source' or 'blank'")
        return ColorLayer(base=base, strokes=_strokes_from_json(data.get("strokes"), color=True), **common)
    raise InvalidArgumentError(f"unknown layer kind {kind!r}")


def stack_to_json(stack: LayerStack) -> dict:
    return {
        "canvas": {"height": stack.height, "width": stack.width},
        "layers": [layer_to_json(l) for l in stack.layers],
    }


def stack_from_json(data: dict) -> LayerStack:
    canvas = data.get("canvas") or {}
    return LayerStack(
        height=int(canvas["height"]),
        width=int(canvas["width"]),
        layers=tuple(layer_from_json(l) for l in data.get("layers", [])),
    )
