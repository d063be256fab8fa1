"""REST facade over the session pipeline and the evaluation harness.

The API is a thin projection of pipeline semantics: every 2xx response
reports the session's new state, mutating routes run under the session's
lock, and no route can produce a session the pipeline itself would reject.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import pipeline
from .backends import (
    InpaintParams,
    RemoteEmbeddingBackend,
    RemoteInpaintingBackend,
    RemoteSegmentationBackend,
    make_stub_suite,
)
from .errors import (
    BackendFailure,
    EmptyPrompt,
    HistoryLimitReached,
    IllegalTransition,
    ImageTooLarge,
    IoFailure,
    NothingToUndo,
    OutOfBounds,
    UnknownSegmentId,
    UnsupportedImage,
    UrbanscapeError,
)
from .evaluation import CampaignSpec, run_clip_campaign
from .masking import bounding_box
from .panoptic import Category, Taxonomy, extract_mask, render_overlay
from .rasters import b64_decode, mask_to_png, png_to_rgb, rgb_to_png
from .store import SessionStore

DATA_DIR_ENV = "UGAI_DATA_DIR"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8501"
    data_dir: str = "./urbanscape-data"
    backends: dict = field(
        default_factory=lambda: {"segment": "stub", "inpaint": "stub", "embed": "stub"}
    )
    stub_grid: int = 4
    max_upload_bytes: int = 16 * 1024 * 1024
    session_ttl_s: float | None = 24 * 3600.0
    max_history: int = pipeline.DEFAULT_MAX_HISTORY

    def __post_init__(self):
        override = os.environ.get(DATA_DIR_ENV)
        if override:
            self.data_dir = override
        if self.max_upload_bytes < 1024 * 1024:
            raise ValueError("max_upload_bytes must be at least 1 MiB")

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**doc)

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def _build_backends(config: ServiceConfig):
    suite = make_stub_suite(grid=config.stub_grid)
    spec = config.backends
    segment = spec.get("segment", "stub")
    inpaint = spec.get("inpaint", "stub")
    embed = spec.get("embed", "stub")
    segmentation = (
        suite.segmentation if segment == "stub" else RemoteSegmentationBackend(segment)
    )
    inpainting = suite.inpainting if inpaint == "stub" else RemoteInpaintingBackend(inpaint)
    embedding = suite.embedding if embed == "stub" else RemoteEmbeddingBackend(embed)
    return segmentation, inpainting, embedding


_STATUS_BY_ERROR = (
    (IllegalTransition, 409),
    (NothingToUndo, 409),
    (HistoryLimitReached, 409),
    (BackendFailure, 502),
    (IoFailure, 500),
    (ImageTooLarge, 400),
    (UnsupportedImage, 400),
    (OutOfBounds, 400),
    (EmptyPrompt, 400),
    (UnknownSegmentId, 400),
    (UrbanscapeError, 400),
)


def _error_response(exc: Exception) -> JSONResponse:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return JSONResponse(
                status_code=status,
                content={"code": type(exc).__name__, "message": str(exc)},
            )
    raise exc


def _segment_summary(session: pipeline.Session) -> list[dict]:
    out = []
    for seg in session.segmentation.segments:
        box = bounding_box(extract_mask(session.segmentation, seg.id))
        out.append(
            {
                "id": seg.id,
                "class": seg.class_name,
                "category": seg.category.value,
                "bbox": [box.x0, box.y0, box.x1, box.y1],
                "pixel_count": seg.pixel_count,
            }
        )
    return out


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    probe = data_dir / ".write-probe"
    probe.write_bytes(b"")  # fail fast if the data directory is not writable
    probe.unlink()

    segmentation, inpainting, embedding = _build_backends(config)
    store = SessionStore(data_dir, ttl_s=config.session_ttl_s)
    app = FastAPI(title="urbanscape service", docs_url=None, redoc_url=None)
    # the browser UI is hosted separately and talks cross-origin
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad_request", "message": str(exc.errors()[:3])},
        )

    @app.exception_handler(UrbanscapeError)
    def domain_handler(request: Request, exc: UrbanscapeError):
        return _error_response(exc)

    @app.exception_handler(ValueError)
    def value_handler(request: Request, exc: ValueError):
        # bad domain arguments (radius, sigma, alpha, ...) are caller faults
        return JSONResponse(
            status_code=400, content={"code": "bad_request", "message": str(exc)}
        )

    def _get_session(session_id: str) -> pipeline.Session:
        try:
            return store.get(session_id)
        except KeyError:
            raise _NotFound(session_id)

    class _NotFound(Exception):
        def __init__(self, session_id):
            self.session_id = session_id

    @app.exception_handler(_NotFound)
    def not_found_handler(request: Request, exc: _NotFound):
        return JSONResponse(
            status_code=404,
            content={"code": "not_found", "message": f"no session {exc.session_id}"},
        )

    def _update(session_id: str, fn) -> pipeline.Session:
        try:
            return store.update(session_id, fn)
        except KeyError:
            raise _NotFound(session_id)

    # --- session lifecycle -------------------------------------------------

    @app.get("/v1/health")
    def health():
        return {"ok": True, "backends": dict(config.backends)}

    @app.post("/v1/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        if "image" not in payload:
            return JSONResponse(
                status_code=400,
                content={"code": "bad_request", "message": "missing image"},
            )
        try:
            raw = b64_decode(str(payload["image"]))
        except Exception:
            return JSONResponse(
                status_code=400,
                content={"code": "bad_request", "message": "image is not valid base64"},
            )
        if len(raw) > config.max_upload_bytes:
            return JSONResponse(
                status_code=413,
                content={"code": "payload_too_large", "message": "upload exceeds limit"},
            )
        session = pipeline.create_session(png_to_rgb(raw), max_history=config.max_history)
        store.add(session)
        return {"id": session.id, "state": session.state.value}

    @app.post("/v1/sessions/{session_id}/segment")
    def segment(session_id: str, payload: dict = Body(default={})):
        session = _update(session_id, lambda s: pipeline.run_segmentation(s, segmentation))
        return {"state": session.state.value, "segments": _segment_summary(session)}

    @app.get("/v1/sessions/{session_id}/overlay")
    def overlay(session_id: str, alpha: float = 0.5):
        session = _get_session(session_id)
        if session.segmentation is None:
            raise IllegalTransition("session has no segmentation to overlay")
        raster = render_overlay(pipeline.working_image(session), session.segmentation, alpha=alpha)
        return Response(content=rgb_to_png(raster), media_type="image/png")

    @app.post("/v1/sessions/{session_id}/select")
    def select(session_id: str, payload: dict = Body(...)):
        try:
            x, y = int(payload["x"]), int(payload["y"])
        except (KeyError, TypeError, ValueError):
            return JSONResponse(
                status_code=400,
                content={"code": "bad_request", "message": "body must carry integer x and y"},
            )
        session = _update(session_id, lambda s: pipeline.select_segment(s, x, y))
        seg = session.segmentation.info(session.selection)
        box = bounding_box(extract_mask(session.segmentation, seg.id))
        return {
            "state": session.state.value,
            "segment": {
                "id": seg.id,
                "class": seg.class_name,
                "category": seg.category.value,
                "bbox": [box.x0, box.y0, box.x1, box.y1],
                "pixel_count": seg.pixel_count,
            },
        }

    @app.post("/v1/sessions/{session_id}/mask")
    def mask(session_id: str, payload: dict = Body(default={})):
        radius = payload.get("radius")
        sigma = payload.get("sigma")
        session = _update(
            session_id,
            lambda s: pipeline.prepare_mask(
                s,
                None if radius is None else int(radius),
                None if sigma is None else float(sigma),
            ),
        )
        return {
            "state": session.state.value,
            "mask": f"/v1/sessions/{session_id}/mask",
            "radius": session.prepared.radius,
            "sigma": session.prepared.sigma,
        }

    @app.get("/v1/sessions/{session_id}/mask")
    def mask_raster(session_id: str):
        session = _get_session(session_id)
        if session.prepared is None:
            raise IllegalTransition("session has no prepared mask")
        return Response(
            content=mask_to_png(session.prepared.dilated), media_type="image/png"
        )

    @app.post("/v1/sessions/{session_id}/reconstruct")
    def reconstruct(session_id: str, payload: dict = Body(...)):
        if "prompt" not in payload or "seed" not in payload:
            return JSONResponse(
                status_code=400,
                content={"code": "bad_request", "message": "body must carry prompt and seed"},
            )
        try:
            params = InpaintParams(
                seed=int(payload["seed"]),
                guidance=float(payload.get("guidance", 7.5)),
                strength=float(payload.get("strength", 1.0)),
                steps=int(payload.get("steps", 30)),
            )
        except (TypeError, ValueError) as exc:
            return JSONResponse(
                status_code=400, content={"code": "bad_request", "message": str(exc)}
            )
        session = _update(
            session_id,
            lambda s: pipeline.reconstruct(s, str(payload["prompt"]), params, inpainting),
        )
        index = len(session.history) - 1
        return {
            "state": session.state.value,
            "image": f"/v1/sessions/{session_id}/image/{index}",
            "index": index,
        }

    @app.post("/v1/sessions/{session_id}/undo")
    def undo(session_id: str, payload: dict = Body(default={})):
        session = _update(session_id, pipeline.undo)
        return {"state": session.state.value, "history_depth": len(session.history)}

    @app.get("/v1/sessions/{session_id}/image/{index}")
    def image(session_id: str, index: int):
        session = _get_session(session_id)
        if not 0 <= index < len(session.history):
            return JSONResponse(
                status_code=404,
                content={"code": "not_found", "message": f"no history entry {index}"},
            )
        return Response(content=rgb_to_png(session.history[index]), media_type="image/png")

    @app.post("/v1/sessions/{session_id}/export")
    def export(session_id: str, payload: dict = Body(default={})):
        session = _get_session(session_id)
        with store.lock(session_id):
            manifest = pipeline.export(session, store.root / session_id / "export")
        body = manifest.as_dict()
        body["state"] = session.state.value
        return body

    # --- evaluation ----------------------------------------------------------

    @app.post("/v1/eval/campaign")
    def campaign(payload: dict = Body(...)):
        try:
            categories = tuple(
                Category(c) for c in payload.get("categories", [c.value for c in Category])
            )
            spec = CampaignSpec(
                categories=categories,
                images_per_category=int(payload["images_per_category"]),
                iterations=int(payload["iterations"]),
                prompt_bank={
                    Category(c): tuple(prompts)
                    for c, prompts in payload["prompt_bank"].items()
                },
            )
            seed = int(payload.get("seed", 0))
            parallelism = int(payload.get("parallelism", 1))
        except (KeyError, TypeError, ValueError) as exc:
            return JSONResponse(
                status_code=400, content={"code": "bad_request", "message": str(exc)}
            )
        report = run_clip_campaign(spec, inpainting, embedding, seed, parallelism=parallelism)
        return report.as_dict()

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
