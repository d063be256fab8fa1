"""Batch command-line access to the engine: segment, edit, evaluate, serve.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
The stub backends are the default so every subcommand works offline; pass
``--backend url=http://host:port`` to use a real model server.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .backends import (
    InpaintParams,
    RemoteEmbeddingBackend,
    RemoteInpaintingBackend,
    RemoteSegmentationBackend,
    make_stub_suite,
)
from .errors import UrbanscapeError
from .evaluation import (
    CampaignSpec,
    EvalReport,
    IouRow,
    category_iou,
    parse_report_csv,
    render_report,
    run_clip_campaign,
)
from .hashing import image_digest
from .panoptic import (
    CATEGORY_LABELS,
    Category,
    Taxonomy,
    decode_segment_map,
    encode_segment_map,
    segments_metadata,
)
from .rasters import png_to_rgb, rgb_to_png


def _load_image(path: str) -> np.ndarray:
    return png_to_rgb(Path(path).read_bytes())


def _resolve_backends(backend: str, grid: int):
    """'stub' -> in-process deterministic suite; 'url=BASE' -> remote clients."""
    if backend == "stub":
        suite = make_stub_suite(grid=grid)
        return suite.segmentation, suite.inpainting, suite.embedding
    if backend.startswith("url="):
        base = backend[4:]
        return (
            RemoteSegmentationBackend(base),
            RemoteInpaintingBackend(base),
            RemoteEmbeddingBackend(base),
        )
    raise UrbanscapeError(f"--backend must be 'stub' or 'url=...', got {backend!r}")


def _load_segment_map(directory: str, taxonomy: Taxonomy):
    d = Path(directory)
    id_image = png_to_rgb((d / "id_map.png").read_bytes())
    meta = json.loads((d / "segments.json").read_text(encoding="utf-8"))
    return decode_segment_map(id_image, meta, taxonomy)


def _write_segment_map(segment_map, directory: str) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "id_map.png").write_bytes(rgb_to_png(encode_segment_map(segment_map)))
    (d / "segments.json").write_text(
        json.dumps(segments_metadata(segment_map), indent=2), encoding="utf-8"
    )


def _cmd_segment(args) -> int:
    segmentation, _, _ = _resolve_backends(args.backend, args.grid)
    segment_map = segmentation.segment(_load_image(args.image))
    _write_segment_map(segment_map, args.out)
    print(f"{len(segment_map.segments)} segments -> {args.out}")
    return 0


def _cmd_edit(args) -> int:
    segmentation, inpainting, _ = _resolve_backends(args.backend, args.grid)
    try:
        x, y = (int(v) for v in args.click.split(","))
    except ValueError:
        raise UrbanscapeError(f"--click expects 'x,y', got {args.click!r}")
    params = InpaintParams(
        seed=args.seed, guidance=args.guidance, strength=args.strength, steps=args.steps
    )

    session = pipeline.create_session(_load_image(args.image))
    session = pipeline.run_segmentation(session, segmentation)
    session = pipeline.select_segment(session, x, y)
    session = pipeline.prepare_mask(session, args.radius, args.sigma)
    session = pipeline.reconstruct(session, args.prompt, params, inpainting)

    result = pipeline.working_image(session)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(rgb_to_png(result))
    if args.export:
        pipeline.export(session, args.export)
    print(image_digest(result))
    return 0


def _cmd_eval_iou(args) -> int:
    taxonomy = Taxonomy.load(args.taxonomy) if args.taxonomy else Taxonomy.default()
    pred = _load_segment_map(args.pred, taxonomy)
    truth = _load_segment_map(args.truth, taxonomy)
    scores = {}
    for category in Category:
        score = category_iou(pred, truth, category)
        if score is not None:
            scores[category] = score
    if args.per_category:
        for category, score in scores.items():
            print(f"{CATEGORY_LABELS[category]:<24}{score.value:.3f}")
    if scores:
        mean = sum(s.value for s in scores.values()) / len(scores)
        print(f"{'mean':<24}{mean:.3f}")
    else:
        print("no categories present in either map")
    return 0


def _parse_campaign_spec(path: str) -> tuple[CampaignSpec, int]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    categories = tuple(
        Category(c) for c in doc.get("categories", [c.value for c in Category])
    )
    spec = CampaignSpec(
        categories=categories,
        images_per_category=int(doc["images_per_category"]),
        iterations=int(doc["iterations"]),
        prompt_bank={Category(c): tuple(v) for c, v in doc["prompt_bank"].items()},
    )
    return spec, int(doc.get("seed", 0))


def _cmd_eval_campaign(args) -> int:
    _, inpainting, embedding = _resolve_backends(args.backend, args.grid)
    spec, seed = _parse_campaign_spec(args.spec)
    report = run_clip_campaign(
        spec, inpainting, embedding, seed, parallelism=args.parallelism
    )
    Path(args.out).write_text(render_report(report, "csv"), encoding="utf-8")
    print(report.digest())
    return 0


def _cmd_report(args) -> int:
    report = parse_report_csv(Path(getattr(args, "in")).read_text(encoding="utf-8"))
    sys.stdout.write(render_report(report, args.format))
    return 0


def _cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urbanscape",
        description="Interactive segment-select-inpaint workstation for urban scenes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="JSON config file (defaults applied when omitted)")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("segment", help="segment an image to an interchange directory")
    p.add_argument("--image", required=True)
    p.add_argument("--backend", default="stub")
    p.add_argument("--grid", type=int, default=4, help="stub backend grid size")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("edit", help="run the full pipeline once")
    p.add_argument("--image", required=True)
    p.add_argument("--click", required=True, metavar="X,Y")
    p.add_argument("--prompt", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--guidance", type=float, default=7.5)
    p.add_argument("--strength", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--backend", default="stub")
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--out", required=True, help="result raster path")
    p.add_argument("--export", default=None, help="also write a project directory here")
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser("eval", help="evaluation utilities")
    eval_sub = p.add_subparsers(dest="eval_command", required=True)

    q = eval_sub.add_parser("iou", help="category IoU between two segment maps")
    q.add_argument("--pred", required=True, help="predicted map directory")
    q.add_argument("--truth", required=True, help="ground-truth map directory")
    q.add_argument("--per-category", action="store_true")
    q.add_argument("--taxonomy", default=None)
    q.set_defaults(func=_cmd_eval_iou)

    q = eval_sub.add_parser("campaign", help="run a text-to-image scoring campaign")
    q.add_argument("--spec", required=True, help="campaign spec JSON")
    q.add_argument("--out", required=True, help="CSV report path")
    q.add_argument("--backend", default="stub")
    q.add_argument("--grid", type=int, default=4)
    q.add_argument("--parallelism", type=int, default=1)
    q.set_defaults(func=_cmd_eval_campaign)

    p = sub.add_parser("report", help="render a CSV report")
    p.add_argument("--in", required=True, dest="in")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UrbanscapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
