"""Panoptic segment-map data model, id-map codec, taxonomy, and overlay.

A segment map is a per-pixel raster of segment ids plus one metadata entry
per id. Ids travel between processes encoded into RGB8 rasters with the
little-endian base-256 convention ``id = R + 256*G + 256**2*B`` (the common
panoptic PNG layout), accompanied by a metadata document listing
``{id, class_name, kind}``. Per-segment categories are derived from a
class -> category taxonomy table.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyImage,
    IdOverflow,
    InvalidSegmentMap,
    OutOfBounds,
    UnknownClassName,
    UnknownSegmentId,
)
from .rasters import require_rgb8, round_half_up

MAX_SEGMENT_ID = 256 ** 3 - 1


class Category(str, Enum):
    """The six aggregate urban feature categories used throughout reporting."""

    BUILDINGS = "Buildings"
    ROADS_PAVEMENTS = "RoadsPavements"
    VEHICLES = "Vehicles"
    PEDESTRIANS_BICYCLES = "PedestriansBicycles"
    NATURAL_ELEMENTS = "NaturalElements"
    STREET_FURNITURE = "StreetFurniture"


#: Human-readable category names, in fixed report row order.
CATEGORY_LABELS: dict[Category, str] = {
    Category.BUILDINGS: "Buildings",
    Category.ROADS_PAVEMENTS: "Roads & pavements",
    Category.VEHICLES: "Vehicles",
    Category.PEDESTRIANS_BICYCLES: "Pedestrians & bicycles",
    Category.NATURAL_ELEMENTS: "Natural elements",
    Category.STREET_FURNITURE: "Street furniture",
}

#: Default overlay colours per category (RGB).
DEFAULT_PALETTE: dict[Category, tuple[int, int, int]] = {
    Category.BUILDINGS: (70, 70, 70),
    Category.ROADS_PAVEMENTS: (128, 64, 128),
    Category.VEHICLES: (0, 0, 142),
    Category.PEDESTRIANS_BICYCLES: (220, 20, 60),
    Category.NATURAL_ELEMENTS: (107, 142, 35),
    Category.STREET_FURNITURE: (153, 153, 153),
}

#: thing/stuff kind for the bundled street-scene classes (countable objects
#: are things, amorphous regions are stuff).
DEFAULT_KINDS: dict[str, str] = {
    "road": "stuff",
    "sidewalk": "stuff",
    "building": "stuff",
    "wall": "stuff",
    "fence": "stuff",
    "pole": "stuff",
    "traffic light": "stuff",
    "traffic sign": "stuff",
    "vegetation": "stuff",
    "terrain": "stuff",
    "sky": "stuff",
    "person": "thing",
    "rider": "thing",
    "car": "thing",
    "truck": "thing",
    "bus": "thing",
    "train": "thing",
    "motorcycle": "thing",
    "bicycle": "thing",
}


class Taxonomy:
    """Ordered fine-class -> Category table.

    The file format is one ``class_name<TAB>category`` line per class; blank
    lines and ``#`` comments are ignored. Order is preserved because the
    stub segmenter assigns classes round-robin in table order.
    """

    def __init__(self, mapping: dict[str, Category]):
        if not mapping:
            raise ValueError("taxonomy must contain at least one class")
        self._mapping = dict(mapping)

    @classmethod
    def parse(cls, text: str) -> "Taxonomy":
        mapping: dict[str, Category] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"taxonomy line {lineno}: expected 'class<TAB>category'")
            name, cat = line.split("\t", 1)
            try:
                mapping[name.strip()] = Category(cat.strip())
            except ValueError as exc:
                raise ValueError(f"taxonomy line {lineno}: unknown category {cat!r}") from exc
        return cls(mapping)

    @classmethod
    def load(cls, path) -> "Taxonomy":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())

    @classmethod
    def default(cls) -> "Taxonomy":
        text = resources.files("urbanscape.data").joinpath("street_classes.tsv").read_text("utf-8")
        return cls.parse(text)

    def category_of(self, class_name: str) -> Category:
        try:
            return self._mapping[class_name]
        except KeyError:
            raise UnknownClassName(f"class {class_name!r} not in taxonomy") from None

    def kind_of(self, class_name: str) -> str:
        """thing/stuff for bundled classes; unknown classes default to stuff."""
        return DEFAULT_KINDS.get(class_name, "stuff")

    @property
    def class_names(self) -> list[str]:
        return list(self._mapping)

    def __contains__(self, class_name: str) -> bool:
        return class_name in self._mapping

    def __len__(self) -> int:
        return len(self._mapping)


@dataclass(frozen=True)
class SegmentInfo:
    id: int
    class_name: str
    category: Category
    kind: str  # "thing" or "stuff"
    pixel_count: int


@dataclass(frozen=True)
class SegmentMap:
    """Per-pixel segment-id raster plus per-segment metadata.

    Invariant (validated on construction): the ids present in `labels` are
    exactly the ids listed in `segments`, every pixel_count matches the
    raster, and all ids fit in 24 bits.
    """

    labels: np.ndarray  # uint32, shape (H, W)
    segments: tuple[SegmentInfo, ...]

    def __post_init__(self):
        labels = self.labels
        if not isinstance(labels, np.ndarray) or labels.ndim != 2:
            raise InvalidSegmentMap("labels must be a 2-D array")
        if labels.shape[0] == 0 or labels.shape[1] == 0:
            raise InvalidSegmentMap("segment map must cover at least one pixel")
        if not np.issubdtype(labels.dtype, np.integer):
            raise InvalidSegmentMap("labels must be integer-typed")
        labels = np.ascontiguousarray(labels, dtype=np.uint32)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "segments", tuple(self.segments))

        ids, counts = np.unique(labels, return_counts=True)
        if ids.size and int(ids[-1]) > MAX_SEGMENT_ID:
            raise InvalidSegmentMap(f"segment id {int(ids[-1])} exceeds 24 bits")
        raster_counts = {int(i): int(c) for i, c in zip(ids, counts)}
        meta_ids = set()
        for seg in self.segments:
            if seg.id in meta_ids:
                raise InvalidSegmentMap(f"duplicate metadata for id {seg.id}")
            meta_ids.add(seg.id)
            if seg.id < 0 or seg.id > MAX_SEGMENT_ID:
                raise InvalidSegmentMap(f"segment id {seg.id} out of range")
            if raster_counts.get(seg.id) != seg.pixel_count:
                raise InvalidSegmentMap(
                    f"id {seg.id}: pixel_count {seg.pixel_count} does not match raster"
                )
        missing = set(raster_counts) - meta_ids
        if missing:
            raise InvalidSegmentMap(f"raster ids without metadata: {sorted(missing)[:8]}")
        extra = meta_ids - set(raster_counts)
        if extra:
            raise InvalidSegmentMap(f"metadata ids absent from raster: {sorted(extra)[:8]}")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def ids(self) -> list[int]:
        return [seg.id for seg in self.segments]

    def info(self, segment_id: int) -> SegmentInfo:
        for seg in self.segments:
            if seg.id == segment_id:
                return seg
        raise UnknownSegmentId(f"id {segment_id} not in segment map")


def decode_segment_map(
    id_image: np.ndarray,
    segments_meta: list[dict],
    taxonomy: Taxonomy | None = None,
) -> SegmentMap:
    """Decode the RGB8 id raster + metadata interchange into a SegmentMap.

    `segments_meta` entries are ``{"id": int, "class_name": str, "kind": str}``
    dicts; pixel counts are recomputed from the raster, and metadata entries
    whose id never occurs in the raster are dropped (tolerant reader). Raster
    ids with no metadata raise UnknownSegmentId.
    """
    require_rgb8(id_image)
    if id_image.shape[0] == 0 or id_image.shape[1] == 0:
        raise EmptyImage("id raster has zero pixels")
    taxonomy = taxonomy or Taxonomy.default()

    px = id_image.astype(np.uint32)
    labels = px[:, :, 0] + 256 * px[:, :, 1] + 65536 * px[:, :, 2]

    ids, counts = np.unique(labels, return_counts=True)
    raster_counts = {int(i): int(c) for i, c in zip(ids, counts)}
    by_id = {}
    for entry in segments_meta:
        by_id[int(entry["id"])] = entry
    missing = [i for i in raster_counts if i not in by_id]
    if missing:
        raise UnknownSegmentId(f"raster ids without metadata: {sorted(missing)[:8]}")

    segments = []
    for seg_id, count in sorted(raster_counts.items()):
        entry = by_id[seg_id]
        class_name = str(entry["class_name"])
        kind = str(entry.get("kind", taxonomy.kind_of(class_name)))
        segments.append(
            SegmentInfo(
                id=seg_id,
                class_name=class_name,
                category=taxonomy.category_of(class_name),
                kind=kind,
                pixel_count=count,
            )
        )
    return SegmentMap(labels=labels, segments=tuple(segments))


def encode_segment_map(segment_map: SegmentMap) -> np.ndarray:
    """Encode labels into the RGB8 raster (exact inverse of decode)."""
    labels = segment_map.labels.astype(np.uint32)
    if labels.size and int(labels.max()) > MAX_SEGMENT_ID:
        raise IdOverflow("segment id exceeds 24-bit RGB encoding")
    out = np.empty(labels.shape + (3,), dtype=np.uint8)
    out[:, :, 0] = labels & 0xFF
    out[:, :, 1] = (labels >> 8) & 0xFF
    out[:, :, 2] = (labels >> 16) & 0xFF
    return out


def segments_metadata(segment_map: SegmentMap) -> list[dict]:
    """The metadata document half of the interchange pair."""
    return [
        {"id": seg.id, "class_name": seg.class_name, "kind": seg.kind}
        for seg in segment_map.segments
    ]


def segment_at(segment_map: SegmentMap, x: int, y: int) -> int:
    """Id of the segment under pixel (x, y); x is the column, y the row."""
    if not (0 <= x < segment_map.width and 0 <= y < segment_map.height):
        raise OutOfBounds(f"({x}, {y}) outside {segment_map.width}x{segment_map.height}")
    return int(segment_map.labels[y, x])


def extract_mask(segment_map: SegmentMap, segment_id: int) -> np.ndarray:
    """Boolean mask of the pixels carrying `segment_id`."""
    if segment_id not in set(segment_map.ids):
        raise UnknownSegmentId(f"id {segment_id} not in segment map")
    return segment_map.labels == np.uint32(segment_id)


def render_overlay(
    image: np.ndarray,
    segment_map: SegmentMap,
    palette: dict[Category, tuple[int, int, int]] | None = None,
    alpha: float = 0.5,
) -> np.ndarray:
    """Blend category colours over the image: out = (1-a)*image + a*colour.

    Rounding is half-up so a fixed palette gives bit-exact output.
    """
    require_rgb8(image)
    if image.shape[:2] != segment_map.labels.shape:
        raise DimensionMismatch(
            f"image {image.shape[:2]} vs map {segment_map.labels.shape}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    palette = palette or DEFAULT_PALETTE

    colour = np.zeros_like(image)
    for seg in segment_map.segments:
        colour[segment_map.labels == np.uint32(seg.id)] = palette[seg.category]
    blended = (1.0 - alpha) * image.astype(np.float64) + alpha * colour.astype(np.float64)
    return round_half_up(blended).astype(np.uint8)
