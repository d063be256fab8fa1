"""Deterministic, GPU-free stand-ins for the three neural capabilities.

The stubs are pinned so any two runs (and any two implementations of the
same conventions) produce bit-identical outputs:

* segmentation partitions the image into a grid of rectangles, assigning
  classes round-robin over the taxonomy;
* inpainting fills masked pixels with a constant colour derived from the
  64-bit FNV-1a hash of (prompt, seed);
* embedding hashes whitespace tokens into 64 buckets and L2-normalizes.

The embedder recovers the prompt that produced an inpainted image through a
fill-colour provenance registry shared with the inpainting stub: the fill
colour acts as the image's provenance tag, and scoring a generated image
against its own prompt yields cosine similarity exactly 1.0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from ..hashing import fnv1a64, fnv1a64_text
from ..panoptic import SegmentInfo, SegmentMap, Taxonomy
from ..rasters import require_mask, require_rgb8
from . import EMBEDDING_DIM, EmbeddingVector, InpaintParams


class FillProvenance:
    """Registry mapping stub fill colours back to the prompts that made them."""

    def __init__(self):
        self._prompts: dict[tuple[int, int, int], str] = {}

    def record(self, color: tuple[int, int, int], prompt: str) -> None:
        self._prompts[color] = prompt

    def lookup(self, color: tuple[int, int, int]) -> str | None:
        return self._prompts.get(color)

    def clear(self) -> None:
        self._prompts.clear()


#: Shared registry used by the module-level stub functions.
DEFAULT_PROVENANCE = FillProvenance()


def stub_segment(
    image: np.ndarray, grid: int, taxonomy: Taxonomy | None = None
) -> SegmentMap:
    """Partition the image into grid x grid rectangles with ids 1..grid^2.

    Classes are assigned round-robin over the taxonomy in table order. The
    effective grid is capped at the image's short side so every cell holds
    at least one pixel.
    """
    require_rgb8(image)
    if grid < 1:
        raise ValueError("grid must be >= 1")
    taxonomy = taxonomy or Taxonomy.default()
    h, w = image.shape[:2]
    g = min(grid, w, h)

    labels = np.zeros((h, w), dtype=np.uint32)
    names = taxonomy.class_names
    segments = []
    for row in range(g):
        y0, y1 = row * h // g, (row + 1) * h // g
        for col in range(g):
            x0, x1 = col * w // g, (col + 1) * w // g
            seg_id = row * g + col + 1
            labels[y0:y1, x0:x1] = seg_id
            class_name = names[(seg_id - 1) % len(names)]
            segments.append(
                SegmentInfo(
                    id=seg_id,
                    class_name=class_name,
                    category=taxonomy.category_of(class_name),
                    kind=taxonomy.kind_of(class_name),
                    pixel_count=(y1 - y0) * (x1 - x0),
                )
            )
    return SegmentMap(labels=labels, segments=tuple(segments))


def stub_fill_color(prompt: str, seed: int) -> tuple[int, int, int]:
    """Bytes 0..2 (least significant first) of FNV-1a64 over (prompt, seed)."""
    h = fnv1a64_text(prompt, seed)
    return (h & 0xFF, (h >> 8) & 0xFF, (h >> 16) & 0xFF)


def stub_inpaint(
    image: np.ndarray,
    mask: np.ndarray,
    prompt: str,
    params: InpaintParams,
    provenance: FillProvenance | None = None,
) -> np.ndarray:
    """Copy the image and paint masked pixels in the (prompt, seed) colour."""
    require_rgb8(image)
    require_mask(mask)
    if mask.shape != image.shape[:2]:
        raise DimensionMismatch(f"mask {mask.shape} vs image {image.shape[:2]}")
    color = stub_fill_color(prompt, params.seed)
    out = image.copy()
    out[mask] = color
    (provenance or DEFAULT_PROVENANCE).record(color, prompt)
    return out


def _bucket_pattern(tokens: list[str]) -> EmbeddingVector:
    weights = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    for token in tokens:
        weights[fnv1a64(token.encode("utf-8")) % EMBEDDING_DIM] += 1.0
    return EmbeddingVector(EMBEDDING_DIM, weights / np.linalg.norm(weights))


def stub_embed_text(text: str) -> EmbeddingVector:
    """Whitespace tokens hashed into 64 buckets, L2-normalized.

    Empty text embeds as the single empty token so the result is always a
    unit vector.
    """
    tokens = text.split() or [""]
    return _bucket_pattern(tokens)


def modal_color(image: np.ndarray) -> tuple[int, int, int]:
    """Most frequent pixel colour; ties break to the lexicographically least."""
    require_rgb8(image)
    flat = image.reshape(-1, 3)
    colors, counts = np.unique(flat, axis=0, return_counts=True)
    winner = colors[int(np.argmax(counts))]  # argmax returns the first maximum
    return (int(winner[0]), int(winner[1]), int(winner[2]))


def stub_embed_image(
    image: np.ndarray, provenance: FillProvenance | None = None
) -> EmbeddingVector:
    """Embed via the image's provenance tag (its dominant fill colour).

    If the dominant colour is a recorded stub fill, the image embeds exactly
    as its originating prompt; otherwise the colour itself becomes a pseudo
    token, keeping the function total and deterministic.
    """
    color = modal_color(image)
    prompt = (provenance or DEFAULT_PROVENANCE).lookup(color)
    if prompt is not None:
        return stub_embed_text(prompt)
    return _bucket_pattern([f"rgb:{color[0]},{color[1]},{color[2]}"])


@dataclass
class StubSegmentationBackend:
    grid: int = 4
    taxonomy: Taxonomy | None = None

    def segment(self, image: np.ndarray) -> SegmentMap:
        return stub_segment(image, self.grid, self.taxonomy)

    def identity(self) -> str:
        return f"stub:grid={self.grid}"


@dataclass
class StubInpaintingBackend:
    provenance: FillProvenance | None = None

    def inpaint(
        self, image: np.ndarray, mask: np.ndarray, prompt: str, params: InpaintParams
    ) -> np.ndarray:
        return stub_inpaint(image, mask, prompt, params, self.provenance)

    def identity(self) -> str:
        return "stub"


@dataclass
class StubEmbeddingBackend:
    provenance: FillProvenance | None = None

    def embed_image(self, image: np.ndarray) -> EmbeddingVector:
        return stub_embed_image(image, self.provenance)

    def embed_text(self, text: str) -> EmbeddingVector:
        return stub_embed_text(text)

    def identity(self) -> str:
        return "stub"


@dataclass(frozen=True)
class StubSuite:
    """One segmentation/inpainting/embedding triple sharing a provenance."""

    segmentation: StubSegmentationBackend
    inpainting: StubInpaintingBackend
    embedding: StubEmbeddingBackend


def make_stub_suite(grid: int = 4, taxonomy: Taxonomy | None = None) -> StubSuite:
    provenance = FillProvenance()
    return StubSuite(
        segmentation=StubSegmentationBackend(grid=grid, taxonomy=taxonomy),
        inpainting=StubInpaintingBackend(provenance=provenance),
        embedding=StubEmbeddingBackend(provenance=provenance),
    )
