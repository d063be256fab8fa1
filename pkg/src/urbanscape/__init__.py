"""urbanscape: an interactive segment-select-inpaint workstation.

Upload a street scene, segment it panoptically, click a segment, dilate and
feather its mask, regenerate the region from a text prompt through a
pluggable inpainting backend, and composite the result back seamlessly.
Ships deterministic stub backends, an HTTP service, a CLI, and the
evaluation harness (IoU tables, CLIP-style scoring campaigns).
"""

from .backends import (
    EmbeddingBackend,
    EmbeddingVector,
    InpaintingBackend,
    InpaintParams,
    SegmentationBackend,
    make_stub_suite,
)
from .evaluation import (
    CampaignSpec,
    EvalReport,
    IoUScore,
    category_iou,
    clip_score,
    cosine_similarity,
    iou,
    render_report,
    run_clip_campaign,
)
from .masking import (
    StructuringElement,
    bounding_box,
    color_correct,
    composite,
    dilate,
    disk,
    erode,
    feather,
    square,
)
from .panoptic import (
    Category,
    SegmentInfo,
    SegmentMap,
    Taxonomy,
    decode_segment_map,
    encode_segment_map,
    extract_mask,
    render_overlay,
    segment_at,
)
from .pipeline import (
    Session,
    SessionState,
    create_session,
    export,
    prepare_mask,
    reconstruct,
    replay,
    run_segmentation,
    select_segment,
    undo,
    working_image,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # panoptic
    "Category",
    "SegmentMap",
    "SegmentInfo",
    "Taxonomy",
    "decode_segment_map",
    "encode_segment_map",
    "segment_at",
    "extract_mask",
    "render_overlay",
    # masking
    "StructuringElement",
    "square",
    "disk",
    "dilate",
    "erode",
    "feather",
    "color_correct",
    "composite",
    "bounding_box",
    # backends
    "SegmentationBackend",
    "InpaintingBackend",
    "EmbeddingBackend",
    "InpaintParams",
    "EmbeddingVector",
    "make_stub_suite",
    # pipeline
    "Session",
    "SessionState",
    "create_session",
    "run_segmentation",
    "select_segment",
    "prepare_mask",
    "reconstruct",
    "undo",
    "export",
    "replay",
    "working_image",
    # evaluation
    "IoUScore",
    "iou",
    "category_iou",
    "cosine_similarity",
    "clip_score",
    "CampaignSpec",
    "EvalReport",
    "run_clip_campaign",
    "render_report",
]
