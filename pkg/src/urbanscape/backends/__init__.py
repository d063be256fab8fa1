"""Backend capability contracts and their parameter/result types.

Three neural capabilities are consumed, never implemented, by the engine:
panoptic segmentation, mask-and-prompt-conditioned inpainting, and joint
image/text embedding. Each is a small protocol so a session can run against
remote model servers (`remote`), deterministic in-process stubs (`stubs`),
or anything else satisfying the surface.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from ..panoptic import SegmentMap

EMBEDDING_DIM = 64  # dimension declared by the stub embedder


@dataclass(frozen=True)
class InpaintParams:
    """Conditioning parameters forwarded opaquely to the inpainting backend."""

    seed: int
    guidance: float = 7.5
    strength: float = 1.0
    steps: int = 30

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        if not self.guidance > 0:
            raise ValueError("guidance must be positive")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError("strength must be in [0, 1]")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension real feature vector from an embedding backend."""

    dim: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.dim < 2:
            raise ValueError("embedding dimension must be >= 2")
        if values.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding values must be finite")


@runtime_checkable
class SegmentationBackend(Protocol):
    def segment(self, image: np.ndarray) -> SegmentMap: ...


@runtime_checkable
class InpaintingBackend(Protocol):
    def inpaint(
        self, image: np.ndarray, mask: np.ndarray, prompt: str, params: InpaintParams
    ) -> np.ndarray: ...


@runtime_checkable
class EmbeddingBackend(Protocol):
    def embed_image(self, image: np.ndarray) -> EmbeddingVector: ...

    def embed_text(self, text: str) -> EmbeddingVector: ...


from .stubs import (  # noqa: E402
    FillProvenance,
    StubEmbeddingBackend,
    StubInpaintingBackend,
    StubSegmentationBackend,
    StubSuite,
    make_stub_suite,
    stub_fill_color,
    stub_inpaint,
    stub_segment,
)
from .remote import (  # noqa: E402
    RemoteEmbeddingBackend,
    RemoteInpaintingBackend,
    RemoteSegmentationBackend,
    remote_inpaint,
    remote_segment,
)
from .server import backend_app  # noqa: E402

__all__ = [
    "EMBEDDING_DIM",
    "InpaintParams",
    "EmbeddingVector",
    "SegmentationBackend",
    "InpaintingBackend",
    "EmbeddingBackend",
    "FillProvenance",
    "StubSegmentationBackend",
    "StubInpaintingBackend",
    "StubEmbeddingBackend",
    "StubSuite",
    "make_stub_suite",
    "stub_segment",
    "stub_inpaint",
    "stub_fill_color",
    "RemoteSegmentationBackend",
    "RemoteInpaintingBackend",
    "RemoteEmbeddingBackend",
    "remote_segment",
    "remote_inpaint",
    "backend_app",
]
