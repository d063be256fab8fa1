"""Validation machinery: IoU, category IoU tables, CLIP-style scoring,
seeded generation campaigns, and report rendering.

IoU is kept as exact pixel counts and only becomes a float for display.
Campaigns derive one seed per (iteration, category, index) cell from the
root seed, so results are order-independent and reproducible regardless of
execution parallelism.
"""
from __future__ import annotations

import json
import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from .backends import EmbeddingBackend, EmbeddingVector, InpaintingBackend, InpaintParams
from .errors import BackendFailure, DimensionMismatch, UrbanscapeError, ZeroVector
from .hashing import fnv1a64_text
from .panoptic import CATEGORY_LABELS, Category, SegmentMap
from .rasters import require_mask

CAMPAIGN_CANVAS_SIDE = 64  # campaign generations run on a small fixed canvas


@dataclass(frozen=True)
class IoUScore:
    """Exact intersection/union pixel counts; union is always positive."""

    intersection: int
    union: int

    def __post_init__(self):
        if self.union <= 0 or self.intersection < 0 or self.intersection > self.union:
            raise ValueError(f"bad IoU counts {self.intersection}/{self.union}")

    @property
    def as_fraction(self) -> Fraction:
        return Fraction(self.intersection, self.union)

    @property
    def value(self) -> float:
        return self.intersection / self.union


def iou(a: np.ndarray, b: np.ndarray) -> IoUScore | None:
    """Intersection over union of two masks; None when both are empty.

    The empty/empty case carries no signal, so it is reported as n/a rather
    than fabricating a perfect score.
    """
    require_mask(a)
    require_mask(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    intersection = int((a & b).sum())
    union = int((a | b).sum())
    if union == 0:
        return None
    return IoUScore(intersection, union)


def category_mask(segment_map: SegmentMap, category: Category) -> np.ndarray:
    """Union of all segments mapping to `category`."""
    mask = np.zeros(segment_map.labels.shape, dtype=bool)
    for seg in segment_map.segments:
        if seg.category is category:
            mask |= segment_map.labels == np.uint32(seg.id)
    return mask


def category_iou(pred: SegmentMap, truth: SegmentMap, category: Category) -> IoUScore | None:
    """Semantic-level IoU of one category (None when absent from both maps)."""
    if pred.labels.shape != truth.labels.shape:
        raise DimensionMismatch(f"{pred.labels.shape} vs {truth.labels.shape}")
    return iou(category_mask(pred, category), category_mask(truth, category))


def _vector_values(v) -> np.ndarray:
    if isinstance(v, EmbeddingVector):
        return v.values
    return np.asarray(v, dtype=np.float64)


def cosine_similarity(u, v) -> float:
    """u.v / (|u| |v|), computed so identical vectors score exactly 1.0."""
    uv, vv = _vector_values(u), _vector_values(v)
    if uv.shape != vv.shape:
        raise DimensionMismatch(f"{uv.shape} vs {vv.shape}")
    uu = float(np.dot(uv, uv))
    ww = float(np.dot(vv, vv))
    if uu == 0.0 or ww == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero vectors")
    value = float(np.dot(uv, vv)) / float(np.sqrt(uu * ww))
    return max(-1.0, min(1.0, value))


def clip_score(image: np.ndarray, text: str, backend: EmbeddingBackend) -> float:
    """Cosine similarity between the image and text embeddings."""
    try:
        image_vec = backend.embed_image(image)
        text_vec = backend.embed_text(text)
    except UrbanscapeError:
        raise
    except Exception as exc:
        raise BackendFailure(f"embedding backend failed: {exc}") from exc
    return cosine_similarity(image_vec, text_vec)


# --- campaigns ----------------------------------------------------------------

@dataclass(frozen=True)
class CampaignSpec:
    categories: tuple[Category, ...]
    images_per_category: int
    iterations: int
    prompt_bank: dict[Category, tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(
            self,
            "prompt_bank",
            {c: tuple(p) for c, p in self.prompt_bank.items()},
        )
        if not self.categories:
            raise ValueError("campaign needs at least one category")
        if self.images_per_category < 1 or self.iterations < 1:
            raise ValueError("counts must be >= 1")
        for c in self.categories:
            if not self.prompt_bank.get(c):
                raise ValueError(f"category {c.value} has no prompts")

    @classmethod
    def paper_scale(cls) -> "CampaignSpec":
        """All six categories, 40 images each, 8 iterations."""
        bank = {
            Category.BUILDINGS: ("a glass building", "a brick apartment block"),
            Category.ROADS_PAVEMENTS: ("a busy road", "a cobbled pavement"),
            Category.VEHICLES: ("a parked electric car", "a red double-decker bus"),
            Category.PEDESTRIANS_BICYCLES: ("a cyclist on a bike lane", "people crossing the street"),
            Category.NATURAL_ELEMENTS: ("a group of tall trees", "a grassy verge with flowers"),
            Category.STREET_FURNITURE: ("a row of street lamps", "a wooden bench and a fence"),
        }
        return cls(tuple(Category), 40, 8, bank)


def derive_seed(root_seed: int, iteration: int, category: Category, index: int) -> int:
    """Per-cell seed: FNV-1a64 over (root, iteration, category, index)."""
    return fnv1a64_text(root_seed, iteration, category.value, index)


@dataclass(frozen=True)
class ClipSample:
    category: Category
    iteration: int
    index: int
    score: float


@dataclass(frozen=True)
class IouRow:
    score: float | None  # None renders as "n/a"
    benchmark: float | None = None


@dataclass(frozen=True)
class EvalReport:
    iou_rows: dict[Category, IouRow] = field(default_factory=dict)
    clip_series: dict[Category, tuple[float, ...]] = field(default_factory=dict)
    clip_samples: tuple[ClipSample, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)

    VOLATILE_METADATA = ("timestamp",)

    def _canonical(self) -> dict:
        return {
            "iou_rows": {
                c.value: [row.score, row.benchmark] for c, row in sorted(
                    self.iou_rows.items(), key=lambda kv: kv[0].value
                )
            },
            "clip_series": {
                c.value: list(series) for c, series in sorted(
                    self.clip_series.items(), key=lambda kv: kv[0].value
                )
            },
            "clip_samples": [
                [s.category.value, s.iteration, s.index, s.score] for s in self.clip_samples
            ],
            "metadata": {
                k: v for k, v in sorted(self.metadata.items())
                if k not in self.VOLATILE_METADATA
            },
        }

    def digest(self) -> str:
        """SHA-256 of the report content (volatile metadata excluded, so
        reruns of a deterministic campaign compare equal)."""
        canonical = json.dumps(self._canonical(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def as_dict(self) -> dict:
        body = self._canonical()
        body["metadata"] = dict(sorted(self.metadata.items()))
        body["digest"] = self.digest()
        return body


def _backend_identity(backend) -> str:
    ident = getattr(backend, "identity", None)
    return ident() if callable(ident) else type(backend).__name__


def run_clip_campaign(
    spec: CampaignSpec,
    generator: InpaintingBackend,
    embedder: EmbeddingBackend,
    seed: int,
    parallelism: int = 1,
) -> EvalReport:
    """Generate and score images per the campaign spec.

    Every (iteration, category, index) cell generates one image from its
    prompt on a fixed canvas with a derived seed, scores it against the same
    prompt, and contributes to the per-(category, iteration) mean. Any
    backend error aborts the whole campaign; partial results are discarded.
    """
    canvas = np.full((CAMPAIGN_CANVAS_SIDE, CAMPAIGN_CANVAS_SIDE, 3), 127, dtype=np.uint8)
    full_mask = np.ones(canvas.shape[:2], dtype=bool)

    cells = [
        (iteration, category, index)
        for iteration in range(spec.iterations)
        for category in spec.categories
        for index in range(spec.images_per_category)
    ]

    def run_cell(cell):
        iteration, category, index = cell
        bank = spec.prompt_bank[category]
        prompt = bank[index % len(bank)]
        params = InpaintParams(seed=derive_seed(seed, iteration, category, index))
        try:
            image = generator.inpaint(canvas, full_mask, prompt, params)
            score = clip_score(image, prompt, embedder)
        except UrbanscapeError:
            raise
        except Exception as exc:
            raise BackendFailure(f"campaign cell {cell} failed: {exc}") from exc
        return cell, score

    scores: dict[tuple, float] = {}
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            for cell, score in pool.map(run_cell, cells):
                scores[cell] = score
    else:
        for cell in cells:
            cell, score = run_cell(cell)
            scores[cell] = score

    samples = tuple(
        ClipSample(category, iteration, index, scores[(iteration, category, index)])
        for iteration, category, index in cells
    )
    series = {
        category: tuple(
            float(np.mean([
                scores[(iteration, category, index)]
                for index in range(spec.images_per_category)
            ]))
            for iteration in range(spec.iterations)
        )
        for category in spec.categories
    }
    metadata = {
        "seed": str(seed),
        "iterations": str(spec.iterations),
        "images_per_category": str(spec.images_per_category),
        "categories": "|".join(c.value for c in spec.categories),
        "generator": _backend_identity(generator),
        "embedder": _backend_identity(embedder),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return EvalReport(iou_rows={}, clip_series=series, clip_samples=samples, metadata=metadata)


# --- rendering ----------------------------------------------------------------

def _fmt_score(score: float | None) -> str:
    return "n/a" if score is None else f"{score:.3f}"


def _render_table(report: EvalReport) -> str:
    lines = [f"{'class':<24}{'score':>7}{'benchmark':>11}"]
    for category in Category:
        row = report.iou_rows.get(category)
        if row is None:
            continue
        label = CATEGORY_LABELS[category]
        lines.append(f"{label:<24}{_fmt_score(row.score):>7}{_fmt_score(row.benchmark):>11}")
    lines.append("")
    iterations = max((len(s) for s in report.clip_series.values()), default=0)
    header = f"{'category':<24}" + "".join(f"{f'it{i + 1}':>8}" for i in range(iterations))
    lines.append(header)
    for category in Category:
        series = report.clip_series.get(category)
        if series is None:
            continue
        label = CATEGORY_LABELS[category]
        lines.append(f"{label:<24}" + "".join(f"{v:>8.3f}" for v in series))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _render_csv(report: EvalReport) -> str:
    import csv as _csv
    import io as _io

    buf = _io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    for key, value in sorted(report.metadata.items()):
        writer.writerow(["meta", key, value])
    writer.writerow(["kind", "category", "iteration", "index", "score"])

    def _cell(score: float | None) -> str:
        return "" if score is None else repr(score)

    for category in Category:
        row = report.iou_rows.get(category)
        if row is None:
            continue
        writer.writerow(["iou", category.value, "", "", _cell(row.score)])
        if row.benchmark is not None:
            writer.writerow(["iou_benchmark", category.value, "", "", _cell(row.benchmark)])
    for category in Category:
        series = report.clip_series.get(category)
        if series is None:
            continue
        for iteration, value in enumerate(series):
            writer.writerow(["clip_mean", category.value, iteration, "", _cell(value)])
    for sample in report.clip_samples:
        writer.writerow(
            ["clip_sample", sample.category.value, sample.iteration, sample.index, _cell(sample.score)]
        )
    return buf.getvalue()


def render_report(report: EvalReport, format: str = "table") -> str:
    """Deterministic text rendering; IoU rows follow the fixed category order."""
    if format == "table":
        return _render_table(report)
    if format == "csv":
        return _render_csv(report)
    raise ValueError(f"unknown report format {format!r}")


def parse_report_csv(text: str) -> EvalReport:
    """Inverse of the csv rendering (numeric content and metadata)."""
    import csv as _csv
    import io as _io

    metadata: dict[str, str] = {}
    iou_scores: dict[Category, float | None] = {}
    iou_benchmarks: dict[Category, float] = {}
    means: dict[Category, dict[int, float]] = {}
    samples: list[ClipSample] = []

    for row in _csv.reader(_io.StringIO(text)):
        if not row:
            continue
        kind = row[0]
        if kind == "meta":
            metadata[row[1]] = row[2]
            continue
        if kind == "kind":  # column header
            continue
        category = Category(row[1])
        score = float(row[4]) if row[4] != "" else None
        if kind == "iou":
            iou_scores[category] = score
        elif kind == "iou_benchmark":
            iou_benchmarks[category] = score
        elif kind == "clip_mean":
            means.setdefault(category, {})[int(row[2])] = score
        elif kind == "clip_sample":
            samples.append(ClipSample(category, int(row[2]), int(row[3]), score))
        else:
            raise ValueError(f"unknown report row kind {kind!r}")

    iou_rows = {
        c: IouRow(score=s, benchmark=iou_benchmarks.get(c)) for c, s in iou_scores.items()
    }
    clip_series = {
        c: tuple(v for _, v in sorted(by_iter.items())) for c, by_iter in means.items()
    }
    return EvalReport(
        iou_rows=iou_rows,
        clip_series=clip_series,
        clip_samples=tuple(samples),
        metadata=metadata,
    )
