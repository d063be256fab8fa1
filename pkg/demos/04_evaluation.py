"""
Evaluation: IoU tables and a seeded text-to-image scoring campaign
==================================================================

Category IoU compares two segment maps class-group by class-group; the
campaign harness generates images per (category, iteration, index) cell
with derived seeds and scores each against its own prompt.
"""
import numpy as np

from urbanscape import (
    CampaignSpec,
    Category,
    EvalReport,
    category_iou,
    iou,
    make_stub_suite,
    render_report,
    run_clip_campaign,
)
from urbanscape.evaluation import IouRow

# --- mask IoU ---------------------------------------------------------------
a = np.zeros((20, 10), dtype=bool); a[0:10] = True
b = np.zeros((20, 10), dtype=bool); b[5:15] = True
score = iou(a, b)
print(f"strip overlap: {score.intersection}/{score.union} = {score.as_fraction}")

# --- category IoU on stub segmentations --------------------------------------
suite = make_stub_suite(grid=3)
scene = np.tile(np.arange(96, dtype=np.uint8)[:, None, None], (1, 96, 3))
pred = suite.segmentation.segment(scene)
for category in Category:
    s = category_iou(pred, pred, category)
    print(f"{category.value:<22} {'n/a' if s is None else f'{s.value:.3f}'}")

# --- a small campaign ---------------------------------------------------------
spec = CampaignSpec(
    categories=(Category.BUILDINGS, Category.NATURAL_ELEMENTS),
    images_per_category=4,
    iterations=3,
    prompt_bank={
        Category.BUILDINGS: ("a glass building", "a brick terrace"),
        Category.NATURAL_ELEMENTS: ("a group of tall trees",),
    },
)
report = run_clip_campaign(spec, suite.inpainting, suite.embedding, seed=99)
print()
print(render_report(report, "table"))
print(f"report digest: {report.digest()}")

# --- rendering a scores table --------------------------------------------------
fixture = EvalReport(
    iou_rows={
        Category.BUILDINGS: IouRow(0.93, 0.90),
        Category.VEHICLES: IouRow(0.71, None),
    }
)
print(render_report(fixture, "table"))
