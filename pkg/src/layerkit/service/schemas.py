"""Pydantic request/response models for the edit-session API.

Rasters travel as base64 PNG strings inside JSON; stroke geometry is
vector data (polylines + radius) rasterized server-side so the
compositing math lives in exactly one place.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class PointList(BaseModel):
    points: list[tuple[float, float]] = Field(min_length=1)
    radius: float = Field(gt=0)


class ColorStrokePayload(PointList):
    color: str = "#000000"  # hex
    alpha: float = Field(default=0.4, ge=0.0, le=1.0)


class TransformPayload(BaseModel):
    x: float = 0.0
    y: float = 0.0
    scale: float = Field(default=1.0, gt=0)
    rotation: float = 0.0


class LayerCreate(BaseModel):
    kind: Literal["content", "spatial", "structural", "color"]
    visible: bool = True
    strength: float = Field(default=1.0, ge=0.0)
    # content
    image_b64: Optional[str] = None
    mask_b64: Optional[str] = None
    transform: Optional[TransformPayload] = None
    # structural
    base_edges_b64: Optional[str] = None
    use_canny_base: bool = False
    add_strokes: list[PointList] = Field(default_factory=list)
    sub_strokes: list[PointList] = Field(default_factory=list)
    # spatial
    strokes: list[PointList] = Field(default_factory=list)
    # color
    base: Literal["source", "blank"] = "source"
    color_strokes: list[ColorStrokePayload] = Field(default_factory=list)


class LayerUpdate(BaseModel):
    """Partial update; stroke lists append to the existing layer."""

    visible: Optional[bool] = None
    strength: Optional[float] = Field(default=None, ge=0.0)
    transform: Optional[TransformPayload] = None
    mask_b64: Optional[str] = None
    add_strokes: list[PointList] = Field(default_factory=list)
    sub_strokes: list[PointList] = Field(default_factory=list)
    strokes: list[PointList] = Field(default_factory=list)
    color_strokes: list[ColorStrokePayload] = Field(default_factory=list)
    reorder_to: Optional[int] = Field(default=None, ge=0)


class CreateSessionRequest(BaseModel):
    image_b64: str


class LayerSummary(BaseModel):
    id: str
    kind: str
    visible: bool
    strength: float
    stroke_count: int = 0


class Digests(BaseModel):
    image: str
    mask: Optional[str] = None
    edges: Optional[str] = None
    colors: Optional[str] = None


class SessionSummary(BaseModel):
    id: str
    revision: int
    width: int
    height: int
    layers: list[LayerSummary]
    digests: Digests


class MutateResponse(BaseModel):
    id: str
    revision: int
    layer_id: Optional[str] = None
    digests: Digests


class CompositeResponse(BaseModel):
    revision: int
    digests: Digests
    image_b64: str
    mask_b64: Optional[str] = None
    edges_b64: Optional[str] = None
    colors_b64: Optional[str] = None
    strengths: dict[str, float] = Field(default_factory=dict)


class GenerateRequest(BaseModel):
    seed: int = 0
    steps: Optional[int] = Field(default=None, ge=1)


class GenerateResponse(BaseModel):
    revision: int
    seed: int
    steps: int
    strengths: dict[str, float]
    checkpoint_tag: str
    image_b64: str
    result_digest: str


class ExportedSession(BaseModel):
    version: Literal["session-export-v1"] = "session-export-v1"
    base_b64: str
    stack: dict
    revision: int


class ErrorBody(BaseModel):
    detail: str
