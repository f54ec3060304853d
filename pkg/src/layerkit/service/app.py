"""FastAPI edit-session service wrapping the compositor and the toy model.

Sessions hold a base image and a layer stack; clients mutate layers with
optimistic concurrency (If-Match on the revision), pull composited
condition maps, and trigger seeded generation against a loaded
checkpoint.  The built canvas UI, when present, is served at /.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Header, HTTPException, Response
from fastapi.staticfiles import StaticFiles

from ..compositor import (
    ColorLayer,
    ColorStrokeSpec,
    ContentLayer,
    LayerStack,
    SpatialLayer,
    Stroke,
    StructuralLayer,
    Transform,
    stack_from_json,
    stack_to_json,
)
from ..edges import canny
from ..errors import InvalidArgumentError, LayerOutOfBoundsError
from ..model import ToyDiT, load_checkpoint, sample
from ..raster import content_digest, downsample_area, load_png, resize_bilinear, save_png
from .queue import GenerationQueue
from .schemas import (
    ColorStrokePayload,
    CompositeResponse,
    CreateSessionRequest,
    Digests,
    ExportedSession,
    GenerateRequest,
    GenerateResponse,
    LayerCreate,
    LayerSummary,
    LayerUpdate,
    MutateResponse,
    PointList,
    SessionSummary,
)
from .sessions import RevisionConflict, Session, SessionNotFound, SessionStore, png_b64

DEFAULT_PORT = 8787
DEFAULT_MAX_IMAGE_SIDE = 1024


@dataclass
class ServiceConfig:
    checkpoint: Optional[str] = None
    strict_sigma_zero: bool = False
    max_image_side: int = DEFAULT_MAX_IMAGE_SIDE
    seed: int = 0
    generation_workers: int = 1
    ui_dir: Optional[str] = None


def _hex_to_rgb(value: str) -> tuple[float, float, float]:
    value = value.lstrip("#")
    if len(value) != 6:
        raise HTTPException(status_code=400, detail=f"bad hex color {value!r}")
    try:
        return tuple(int(value[i : i + 2], 16) / 255.0 for i in (0, 2, 4))
    except ValueError as err:
        raise HTTPException(status_code=400, detail=f"bad hex color {value!r}") from err


def _decode_png(data_b64: str, what: str) -> np.ndarray:
    try:
        raw = base64.b64decode(data_b64, validate=True)
        return load_png(raw)
    except (binascii.Error, OSError, ValueError) as err:
        raise HTTPException(status_code=400, detail=f"cannot decode {what}: {err}") from err


def _strokes(payloads: list[PointList]) -> tuple[Stroke, ...]:
    return tuple(Stroke(points=tuple(map(tuple, p.points)), radius=p.radius) for p in payloads)


def _color_strokes(payloads: list[ColorStrokePayload]) -> tuple[ColorStrokeSpec, ...]:
    return tuple(
        ColorStrokeSpec(
            points=tuple(map(tuple, p.points)),
            radius=p.radius,
            color=_hex_to_rgb(p.color),
            alpha=p.alpha,
        )
        for p in payloads
    )


def _layer_from_create(payload: LayerCreate, layer_id: str, session: Session):
    if payload.kind == "content":
        if payload.image_b64 is None:
            raise HTTPException(status_code=400, detail="content layer needs image_b64")
        image = _decode_png(payload.image_b64, "content image")
        mask = (
            (_decode_png(payload.mask_b64, "content mask") > 0.5).astype(np.float64)
            if payload.mask_b64
            else np.ones(image.shape[:2])
        )
        if mask.ndim == 3:
            mask = (mask.mean(axis=-1) > 0.5).astype(np.float64)
        t = payload.transform or None
        transform = Transform(x=t.x, y=t.y, scale=t.scale, rotation=t.rotation) if t else Transform()
        return ContentLayer(layer_id, image, mask, transform,
                            strength=payload.strength, visible=payload.visible)
    if payload.kind == "spatial":
        mask = None
        if payload.mask_b64:
            raster = _decode_png(payload.mask_b64, "spatial mask")
            if raster.ndim == 3:
                raster = raster.mean(axis=-1)
            mask = (raster > 0.5).astype(np.float64)
        return SpatialLayer(layer_id, mask=mask, strokes=_strokes(payload.strokes),
                            strength=payload.strength, visible=payload.visible)
    if payload.kind == "structural":
        base_edges = None
        if payload.base_edges_b64:
            raster = _decode_png(payload.base_edges_b64, "edge map")
            base_edges = raster.mean(axis=-1) if raster.ndim == 3 else raster
        elif payload.use_canny_base:
            base_edges = canny(session.base)
        return StructuralLayer(layer_id, base_edges=base_edges,
                               add_strokes=_strokes(payload.add_strokes),
                               sub_strokes=_strokes(payload.sub_strokes),
                               strength=payload.strength, visible=payload.visible)
    return ColorLayer(layer_id, base=payload.base, strokes=_color_strokes(payload.color_strokes),
                      strength=payload.strength, visible=payload.visible)


def _apply_update(layer, payload: LayerUpdate):
    updates = {}
    if payload.visible is not None:
        updates["visible"] = payload.visible
    if payload.strength is not None:
        updates["strength"] = payload.strength
    if payload.transform is not None:
        if not isinstance(layer, ContentLayer):
            raise HTTPException(status_code=400, detail="only content layers have transforms")
        t = payload.transform
        updates["transform"] = Transform(x=t.x, y=t.y, scale=t.scale, rotation=t.rotation)
    if payload.mask_b64 is not None:
        if not isinstance(layer, SpatialLayer):
            raise HTTPException(status_code=400, detail="only spatial layers take mask uploads")
        raster = _decode_png(payload.mask_b64, "spatial mask")
        if raster.ndim == 3:
            raster = raster.mean(axis=-1)
        updates["mask"] = (raster > 0.5).astype(np.float64)
    if payload.strokes:
        if not isinstance(layer, SpatialLayer):
            raise HTTPException(status_code=400, detail="plain strokes belong to spatial layers")
        updates["strokes"] = layer.strokes + _strokes(payload.strokes)
    if payload.add_strokes or payload.sub_strokes:
        if not isinstance(layer, StructuralLayer):
            raise HTTPException(status_code=400, detail="edge strokes belong to structural layers")
        if payload.add_strokes:
            updates["add_strokes"] = layer.add_strokes + _strokes(payload.add_strokes)
        if payload.sub_strokes:
            updates["sub_strokes"] = layer.sub_strokes + _strokes(payload.sub_strokes)
    if payload.color_strokes:
        if not isinstance(layer, ColorLayer):
            raise HTTPException(status_code=400, detail="color strokes belong to color layers")
        updates["strokes"] = layer.strokes + _color_strokes(payload.color_strokes)
    return dc_replace(layer, **updates) if updates else layer


def _summary(session: Session) -> SessionSummary:
    artifacts = session.composite()
    layers = []
    for layer in session.stack.layers:
        count = 0
        if isinstance(layer, SpatialLayer):
            count = len(layer.strokes)
        elif isinstance(layer, StructuralLayer):
            count = len(layer.add_strokes) + len(layer.sub_strokes)
        elif isinstance(layer, ColorLayer):
            count = len(layer.strokes)
        layers.append(LayerSummary(id=layer.layer_id, kind=layer.kind, visible=layer.visible,
                                   strength=layer.strength, stroke_count=count))
    return SessionSummary(
        id=session.session_id,
        revision=session.revision,
        width=session.stack.width,
        height=session.stack.height,
        layers=layers,
        digests=Digests(**session.composite().digests),
    )


def _mutate_response(session: Session, layer_id: Optional[str] = None) -> MutateResponse:
    return MutateResponse(
        id=session.session_id,
        revision=session.revision,
        layer_id=layer_id,
        digests=Digests(**session.composite().digests),
    )


def _parse_if_match(if_match: Optional[str]) -> Optional[int]:
    if if_match is None:
        return None
    try:
        return int(if_match.strip().strip('"'))
    except ValueError as err:
        raise HTTPException(status_code=400, detail="If-Match must be a revision number") from err


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = SessionStore()
    gen_queue = GenerationQueue(workers=config.generation_workers)

    model: Optional[ToyDiT] = None
    checkpoint_tag = ""
    if config.checkpoint:
        model = load_checkpoint(config.checkpoint)
        digest = hashlib.sha256(Path(config.checkpoint).read_bytes()).hexdigest()[:12]
        checkpoint_tag = f"{Path(config.checkpoint).name}@{digest}"

    app = FastAPI(
        title="layerkit edit service",
        description="Layered-composition edit sessions: layer CRUD, composite previews, seeded generation.",
        version="0.1.0",
    )

    def get_session_or_404(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except SessionNotFound:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")

    def run_mutation(session_id: str, if_match: Optional[str], fn) -> Session:
        try:
            return store.mutate(session_id, _parse_if_match(if_match), fn)
        except SessionNotFound:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        except RevisionConflict as err:
            raise HTTPException(status_code=409, detail=str(err))
        except LayerOutOfBoundsError as err:
            raise HTTPException(status_code=400, detail=str(err))
        except InvalidArgumentError as err:
            raise HTTPException(status_code=400, detail=str(err))

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "checkpoint_loaded": model is not None}

    @app.post("/sessions", response_model=SessionSummary, status_code=201)
    def create_session(body: CreateSessionRequest) -> SessionSummary:
        image = _decode_png(body.image_b64, "base image")
        if image.ndim == 2:
            image = np.stack([image] * 3, axis=-1)
        h, w = image.shape[:2]
        if max(h, w) > config.max_image_side:
            raise HTTPException(
                status_code=413,
                detail=f"image side {max(h, w)} exceeds the limit of {config.max_image_side}",
            )
        return _summary(store.create(image))

    @app.get("/sessions/{session_id}", response_model=SessionSummary)
    def get_session(session_id: str) -> SessionSummary:
        return _summary(get_session_or_404(session_id))

    @app.post("/sessions/{session_id}/layers", response_model=MutateResponse, status_code=201)
    def add_layer(session_id: str, body: LayerCreate,
                  if_match: Optional[str] = Header(default=None)) -> MutateResponse:
        created: dict = {}

        def fn(session: Session):
            layer_id = session.next_layer_id()
            layer = _layer_from_create(body, layer_id, session)
            new_stack = session.stack.with_layer(layer)
            # Surface compositing errors before committing the mutation.
            probe = Session(session_id="probe", base=session.base, stack=new_stack)
            probe.composite()
            session.stack = new_stack
            created["layer_id"] = layer_id

        session = run_mutation(session_id, if_match, fn)
        return _mutate_response(session, created["layer_id"])

    @app.patch("/sessions/{session_id}/layers/{layer_id}", response_model=MutateResponse)
    def update_layer(session_id: str, layer_id: str, body: LayerUpdate,
                     if_match: Optional[str] = Header(default=None)) -> MutateResponse:
        def fn(session: Session):
            layer = session.stack.get_layer(layer_id)
            updated = _apply_update(layer, body)
            stack = session.stack.replace_layer(updated)
            if body.reorder_to is not None:
                stack = stack.reorder_layer(layer_id, body.reorder_to)
            probe = Session(session_id="probe", base=session.base, stack=stack)
            probe.composite()
            session.stack = stack

        session = run_mutation(session_id, if_match, fn)
        return _mutate_response(session, layer_id)

    @app.delete("/sessions/{session_id}/layers/{layer_id}", response_model=MutateResponse)
    def delete_layer(session_id: str, layer_id: str,
                     if_match: Optional[str] = Header(default=None)) -> MutateResponse:
        def fn(session: Session):
            session.stack = session.stack.without_layer(layer_id)

        session = run_mutation(session_id, if_match, fn)
        return _mutate_response(session, layer_id)

    @app.post("/sessions/{session_id}/composite", response_model=CompositeResponse)
    def composite(session_id: str) -> CompositeResponse:
        session = get_session_or_404(session_id)
        try:
            artifacts = session.composite()
        except (InvalidArgumentError, LayerOutOfBoundsError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        pngs = artifacts.pngs
        return CompositeResponse(
            revision=artifacts.revision,
            digests=Digests(**artifacts.digests),
            image_b64=png_b64(pngs["image"]),
            mask_b64=png_b64(pngs["mask"]) if "mask" in pngs else None,
            edges_b64=png_b64(pngs["edges"]) if "edges" in pngs else None,
            colors_b64=png_b64(pngs["colors"]) if "colors" in pngs else None,
            strengths=artifacts.result.strengths,
        )

    @app.post("/sessions/{session_id}/generate", response_model=GenerateResponse)
    def generate(session_id: str, body: GenerateRequest) -> GenerateResponse:
        if model is None:
            raise HTTPException(
                status_code=503,
                detail="no checkpoint loaded; start the service with --checkpoint "
                       "(train one with `layerkit train-toy`)",
            )
        session = get_session_or_404(session_id)

        def run() -> GenerateResponse:
            with session.lock:
                artifacts = session.composite()
                revision = session.revision
            result = artifacts.result
            size = model.config.cue_size
            cues: dict[str, np.ndarray] = {}
            strengths = dict(result.strengths)
            if result.colors is not None:
                cues["color"] = downsample_area(result.colors, size, size)[None]
            if result.edges is not None:
                cues["structural"] = downsample_area(result.edges, size, size)[None]
            if result.mask is not None:
                cues["spatial"] = downsample_area(result.mask, size, size)[None]
            cues = {k: v for k, v in cues.items() if k in model.config.cue_types}
            strengths = {k: v for k, v in strengths.items() if k in cues}
            context = downsample_area(result.image, model.config.image_size,
                                      model.config.image_size)[None]
            steps = body.steps or model.config.denoise_steps
            out = sample(
                model,
                np.array([0]),
                context=context,
                cues=cues or None,
                strengths=strengths or None,
                steps=steps,
                seed=body.seed,
                strict_sigma_zero=config.strict_sigma_zero,
            )[0]
            upscaled = np.clip(
                resize_bilinear(out, session.stack.height, session.stack.width), 0.0, 1.0
            )
            png = save_png(upscaled)
            response = GenerateResponse(
                revision=revision,
                seed=body.seed,
                steps=steps,
                strengths=strengths,
                checkpoint_tag=checkpoint_tag,
                image_b64=png_b64(png),
                result_digest=content_digest(png),
            )
            with session.lock:
                session.last_generation = {
                    "seed": body.seed, "steps": steps, "digest": response.result_digest,
                }
            return response

        return gen_queue.submit(run).result()

    @app.get("/sessions/{session_id}/export", response_model=ExportedSession)
    def export_session(session_id: str) -> ExportedSession:
        session = get_session_or_404(session_id)
        with session.lock:
            return ExportedSession(
                base_b64=png_b64(save_png(session.base)),
                stack=stack_to_json(session.stack),
                revision=session.revision,
            )

    @app.post("/sessions/import", response_model=SessionSummary, status_code=201)
    def import_session(body: ExportedSession) -> SessionSummary:
        base = _decode_png(body.base_b64, "base image")
        try:
            stack = stack_from_json(body.stack)
        except (KeyError, InvalidArgumentError, ValueError) as err:
            raise HTTPException(status_code=400, detail=f"bad stack payload: {err}")
        session = store.create(base)
        with session.lock:
            session.stack = stack
            counters = [int(l.layer_id[1:]) for l in stack.layers
                        if l.layer_id.startswith("L") and l.layer_id[1:].isdigit()]
            session.layer_counter = max(counters, default=0)
        return _summary(session)

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
