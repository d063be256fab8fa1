"""Backend wire protocol v1: JSON bodies, base64 PNG rasters.

    POST /v1/segment  {image}                          -> {id_image, segments}
    POST /v1/inpaint  {image, mask, prompt, seed, ...} -> {image}
    POST /v1/embed    {kind, text? | image?}           -> {dim, values}

Errors travel as non-2xx JSON ``{code, message}`` with code in
{bad_request, internal, unsupported}.
"""
from __future__ import annotations

import numpy as np

from ..errors import ProtocolViolation
from ..panoptic import SegmentMap, Taxonomy, decode_segment_map, encode_segment_map, segments_metadata
from ..rasters import b64_decode, b64_encode, mask_to_png, png_to_mask, png_to_rgb, rgb_to_png
from . import EmbeddingVector, InpaintParams

PROTOCOL_VERSION = "v1"


def encode_image(image: np.ndarray) -> str:
    return b64_encode(rgb_to_png(image))


def decode_image(text: str) -> np.ndarray:
    try:
        return png_to_rgb(b64_decode(text))
    except Exception as exc:
        raise ProtocolViolation(f"bad image payload: {exc}") from exc


def encode_mask(mask: np.ndarray) -> str:
    return b64_encode(mask_to_png(mask))


def decode_mask(text: str) -> np.ndarray:
    try:
        return png_to_mask(b64_decode(text))
    except Exception as exc:
        raise ProtocolViolation(f"bad mask payload: {exc}") from exc


def segment_response(segment_map: SegmentMap) -> dict:
    return {
        "id_image": b64_encode(rgb_to_png(encode_segment_map(segment_map))),
        "segments": segments_metadata(segment_map),
    }


def parse_segment_response(body: dict, taxonomy: Taxonomy | None = None) -> SegmentMap:
    if not isinstance(body, dict) or "id_image" not in body or "segments" not in body:
        raise ProtocolViolation("segment response must carry id_image and segments")
    id_image = decode_image(body["id_image"])
    segments = body["segments"]
    if not isinstance(segments, list):
        raise ProtocolViolation("segments must be a list")
    return decode_segment_map(id_image, segments, taxonomy)


def inpaint_request(
    image: np.ndarray, mask: np.ndarray, prompt: str, params: InpaintParams
) -> dict:
    return {
        "image": encode_image(image),
        "mask": encode_mask(mask),
        "prompt": prompt,
        "seed": params.seed,
        "guidance": params.guidance,
        "strength": params.strength,
        "steps": params.steps,
    }


def parse_inpaint_request(body: dict) -> tuple[np.ndarray, np.ndarray, str, InpaintParams]:
    for key in ("image", "mask", "prompt", "seed"):
        if key not in body:
            raise ProtocolViolation(f"inpaint request missing {key!r}")
    params = InpaintParams(
        seed=int(body["seed"]),
        guidance=float(body.get("guidance", 7.5)),
        strength=float(body.get("strength", 1.0)),
        steps=int(body.get("steps", 30)),
    )
    return decode_image(body["image"]), decode_mask(body["mask"]), str(body["prompt"]), params


def embedding_response(vector: EmbeddingVector) -> dict:
    return {"dim": vector.dim, "values": [float(v) for v in vector.values]}


def parse_embedding_response(body: dict) -> EmbeddingVector:
    try:
        return EmbeddingVector(int(body["dim"]), np.asarray(body["values"], dtype=np.float64))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolViolation(f"bad embedding response: {exc}") from exc
