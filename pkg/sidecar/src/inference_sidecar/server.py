"""HTTP surface: wire protocol v1 endpoints over loaded capabilities.

Request handling is synchronous with a process-wide inference lock, so
concurrent HTTP requests queue for the accelerator instead of fighting
over it.
"""
from __future__ import annotations

import threading

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse

from .codecs import b64_png_to_mask, b64_png_to_rgb, ids_to_rgb, rgb_to_b64_png


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(capabilities: dict[str, object]) -> FastAPI:
    app = FastAPI(title="urbanscape inference sidecar", docs_url=None, redoc_url=None)
    inference_lock = threading.Lock()

    @app.get("/v1/health")
    def health():
        return {
            "ok": True,
            "capabilities": {
                "segment": capabilities.get("segment") is not None,
                "inpaint": capabilities.get("inpaint") is not None,
                "embed": capabilities.get("embed") is not None,
            },
        }

    @app.post("/v1/segment")
    def segment(payload: dict = Body(...)):
        segmenter = capabilities.get("segment")
        if segmenter is None:
            return _error(501, "unsupported", "segmentation model not loaded")
        try:
            image = b64_png_to_rgb(payload["image"])
        except (KeyError, ValueError, OSError) as exc:
            return _error(400, "bad_request", f"bad image payload: {exc}")
        try:
            with inference_lock:
                labels, segments = segmenter.segment(image)
            return {"id_image": rgb_to_b64_png(ids_to_rgb(labels)), "segments": segments}
        except Exception as exc:
            return _error(500, "internal", str(exc))

    @app.post("/v1/inpaint")
    def inpaint(payload: dict = Body(...)):
        inpainter = capabilities.get("inpaint")
        if inpainter is None:
            return _error(501, "unsupported", "inpainting model not loaded")
        try:
            image = b64_png_to_rgb(payload["image"])
            mask = b64_png_to_mask(payload["mask"])
            prompt = str(payload["prompt"])
            seed = int(payload["seed"])
            guidance = float(payload.get("guidance", 7.5))
            strength = float(payload.get("strength", 1.0))
            steps = int(payload.get("steps", 30))
        except (KeyError, TypeError, ValueError, OSError) as exc:
            return _error(400, "bad_request", f"bad inpaint request: {exc}")
        if mask.shape != image.shape[:2]:
            return _error(400, "bad_request", "mask and image dimensions differ")
        try:
            with inference_lock:
                result = inpainter.inpaint(image, mask, prompt, seed, guidance, strength, steps)
            return {"image": rgb_to_b64_png(result)}
        except Exception as exc:
            return _error(500, "internal", str(exc))

    @app.post("/v1/embed")
    def embed(payload: dict = Body(...)):
        embedder = capabilities.get("embed")
        if embedder is None:
            return _error(501, "unsupported", "embedding model not loaded")
        kind = payload.get("kind")
        try:
            if kind == "text":
                with inference_lock:
                    values = embedder.embed_text(str(payload["text"]))
            elif kind == "image":
                image = b64_png_to_rgb(payload["image"])
                with inference_lock:
                    values = embedder.embed_image(image)
            else:
                return _error(400, "bad_request", "kind must be 'text' or 'image'")
        except (KeyError, ValueError, OSError) as exc:
            return _error(400, "bad_request", str(exc))
        except Exception as exc:
            return _error(500, "internal", str(exc))
        return {"dim": len(values), "values": values}

    return app
