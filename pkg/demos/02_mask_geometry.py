"""
Mask geometry: dilation, feathering, and seamless compositing
=============================================================

The blending buffer around a selected segment comes from dilating its
mask; a Gaussian alpha ramp then fades new content into the original.
This demo shows each stage on a square selection.
"""
from pathlib import Path

import numpy as np

from urbanscape import composite, dilate, erode, feather, square
from urbanscape.masking import bounding_box, color_correct
from urbanscape.rasters import alpha_to_png, mask_to_png, rgb_to_png

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

selected = np.zeros((64, 64), dtype=bool)
selected[20:44, 20:44] = True
print(f"selected: {int(selected.sum())} px, bbox {bounding_box(selected)}")

# dilation grows the selection; erosion undoes it (closing keeps the original)
buffer_mask = dilate(selected, square(4), 1)
print(f"dilated by square(4): {int(buffer_mask.sum())} px")
assert (erode(buffer_mask, square(4), 1) | selected).sum() == erode(buffer_mask, square(4), 1).sum()

# feather: 1.0 deep inside the selection, 0.0 outside the buffer, smooth between
alpha = feather(selected, buffer_mask, sigma=2.0)
print(f"alpha range on the band: {alpha[buffer_mask & ~selected].min():.3f}"
      f" .. {alpha[buffer_mask & ~selected].max():.3f}")

(OUT / "mask_selected.png").write_bytes(mask_to_png(selected))
(OUT / "mask_dilated.png").write_bytes(mask_to_png(buffer_mask))
(OUT / "mask_alpha.png").write_bytes(alpha_to_png(alpha))

# composite a synthetic 'generated' patch into a gradient scene
yy, xx = np.mgrid[0:64, 0:64]
scene = np.stack([xx * 4, yy * 4, (xx + yy) * 2], axis=-1).astype(np.uint8)
patch = np.zeros_like(scene)
patch[:, :] = (40, 160, 70)  # flat green infill

band = buffer_mask & ~selected
matched = color_correct(patch, scene, band)
result = composite(scene, matched, alpha)

untouched = alpha == 0.0
assert np.array_equal(result[untouched], scene[untouched])
print("pixels outside the buffer are bit-identical to the scene")

(OUT / "composite_before.png").write_bytes(rgb_to_png(scene))
(OUT / "composite_after.png").write_bytes(rgb_to_png(result))
print(f"wrote composites to {OUT}")
