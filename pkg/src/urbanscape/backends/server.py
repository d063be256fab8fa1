"""FastAPI app exposing any backend triple over wire protocol v1.

Serves stub backends for development and doubles as the loopback fixture
for remote-client contract tests. Capabilities left as None answer with
``unsupported``.
"""
from __future__ import annotations

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse

from ..errors import UrbanscapeError
from . import EmbeddingBackend, InpaintingBackend, SegmentationBackend
from . import wire


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def backend_app(
    segmentation: SegmentationBackend | None = None,
    inpainting: InpaintingBackend | None = None,
    embedding: EmbeddingBackend | None = None,
) -> FastAPI:
    app = FastAPI(title="urbanscape model backends", docs_url=None, redoc_url=None)

    @app.get("/v1/health")
    def health():
        return {
            "ok": True,
            "capabilities": {
                "segment": segmentation is not None,
                "inpaint": inpainting is not None,
                "embed": embedding is not None,
            },
        }

    @app.post("/v1/segment")
    def segment(payload: dict = Body(...)):
        if segmentation is None:
            return _error(501, "unsupported", "no segmentation backend configured")
        try:
            image = wire.decode_image(payload["image"])
        except (KeyError, UrbanscapeError) as exc:
            return _error(400, "bad_request", str(exc))
        try:
            return wire.segment_response(segmentation.segment(image))
        except Exception as exc:  # backend fault, not caller fault
            return _error(500, "internal", str(exc))

    @app.post("/v1/inpaint")
    def inpaint(payload: dict = Body(...)):
        if inpainting is None:
            return _error(501, "unsupported", "no inpainting backend configured")
        try:
            image, mask, prompt, params = wire.parse_inpaint_request(payload)
        except (UrbanscapeError, ValueError) as exc:
            return _error(400, "bad_request", str(exc))
        if mask.shape != image.shape[:2]:
            return _error(400, "bad_request", "mask and image dimensions differ")
        try:
            return {"image": wire.encode_image(inpainting.inpaint(image, mask, prompt, params))}
        except Exception as exc:
            return _error(500, "internal", str(exc))

    @app.post("/v1/embed")
    def embed(payload: dict = Body(...)):
        if embedding is None:
            return _error(501, "unsupported", "no embedding backend configured")
        kind = payload.get("kind")
        try:
            if kind == "text":
                vector = embedding.embed_text(str(payload["text"]))
            elif kind == "image":
                vector = embedding.embed_image(wire.decode_image(payload["image"]))
            else:
                return _error(400, "bad_request", "kind must be 'text' or 'image'")
        except (KeyError, UrbanscapeError) as exc:
            return _error(400, "bad_request", str(exc))
        except Exception as exc:
            return _error(500, "internal", str(exc))
        return wire.embedding_response(vector)

    return app
