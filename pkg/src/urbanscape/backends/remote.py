"""HTTP clients for remote backend servers speaking wire protocol v1.

Every response is re-validated against domain invariants before use.
Transport errors are retried exactly once (calls are idempotent for a fixed
seed); anything else fails fast.
"""
from __future__ import annotations

import json

import httpx
import numpy as np

from ..errors import BackendFailure, DimensionMismatch, InvalidSegmentMap, ProtocolViolation, TransportError
from ..errors import UnknownSegmentId, UnknownClassName
from ..panoptic import SegmentMap, Taxonomy
from . import EmbeddingVector, InpaintParams
from . import wire

DEFAULT_TIMEOUT_S = 120.0


class _RemoteClient:
    def __init__(
        self,
        endpoint: str,
        client: httpx.Client | None = None,
        timeout: float = DEFAULT_TIMEOUT_S,
    ):
        self.endpoint = endpoint.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)
        self._timeout = timeout

    def _post(self, path: str, body: dict) -> dict:
        url = f"{self.endpoint}{path}"
        last_exc: Exception | None = None
        for attempt in range(2):  # one retry, transport errors only
            try:
                response = self._client.post(url, json=body)
                break
            except httpx.TransportError as exc:
                last_exc = exc
        else:
            raise TransportError(f"POST {url}: {last_exc}") from last_exc
        if response.status_code // 100 != 2:
            try:
                payload = response.json()
                code, message = payload["code"], payload["message"]
            except Exception:
                raise ProtocolViolation(
                    f"POST {url}: status {response.status_code} without error body"
                ) from None
            raise BackendFailure(f"POST {url}: {code}: {message}")
        try:
            return response.json()
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(f"POST {url}: response is not JSON") from exc


class RemoteSegmentationBackend(_RemoteClient):
    def __init__(self, endpoint, client=None, timeout=DEFAULT_TIMEOUT_S, taxonomy=None):
        super().__init__(endpoint, client, timeout)
        self.taxonomy = taxonomy or Taxonomy.default()

    def segment(self, image: np.ndarray) -> SegmentMap:
        body = self._post("/v1/segment", {"image": wire.encode_image(image)})
        try:
            segment_map = wire.parse_segment_response(body, self.taxonomy)
        except (UnknownSegmentId, UnknownClassName, InvalidSegmentMap) as exc:
            raise InvalidSegmentMap(str(exc)) from exc
        if (segment_map.height, segment_map.width) != image.shape[:2]:
            raise InvalidSegmentMap(
                f"map is {segment_map.width}x{segment_map.height}, "
                f"image is {image.shape[1]}x{image.shape[0]}"
            )
        return segment_map

    def identity(self) -> str:
        return self.endpoint


class RemoteInpaintingBackend(_RemoteClient):
    def inpaint(
        self, image: np.ndarray, mask: np.ndarray, prompt: str, params: InpaintParams
    ) -> np.ndarray:
        if mask.shape != image.shape[:2]:
            raise DimensionMismatch(f"mask {mask.shape} vs image {image.shape[:2]}")
        body = self._post("/v1/inpaint", wire.inpaint_request(image, mask, prompt, params))
        if "image" not in body:
            raise ProtocolViolation("inpaint response missing image")
        out = wire.decode_image(body["image"])
        if out.shape != image.shape:
            raise DimensionMismatch(f"backend returned {out.shape}, expected {image.shape}")
        return out

    def identity(self) -> str:
        return self.endpoint


class RemoteEmbeddingBackend(_RemoteClient):
    def embed_image(self, image: np.ndarray) -> EmbeddingVector:
        body = self._post("/v1/embed", {"kind": "image", "image": wire.encode_image(image)})
        return wire.parse_embedding_response(body)

    def embed_text(self, text: str) -> EmbeddingVector:
        body = self._post("/v1/embed", {"kind": "text", "text": text})
        return wire.parse_embedding_response(body)

    def identity(self) -> str:
        return self.endpoint


def remote_segment(endpoint: str, image: np.ndarray, **kwargs) -> SegmentMap:
    """One-shot segmentation against a remote endpoint."""
    return RemoteSegmentationBackend(endpoint, **kwargs).segment(image)


def remote_inpaint(
    endpoint: str,
    image: np.ndarray,
    mask: np.ndarray,
    prompt: str,
    params: InpaintParams,
    **kwargs,
) -> np.ndarray:
    """One-shot inpainting against a remote endpoint."""
    return RemoteInpaintingBackend(endpoint, **kwargs).inpaint(image, mask, prompt, params)
