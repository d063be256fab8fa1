"""
A full editing session against the deterministic stub backends
==============================================================

Upload -> segment -> click -> prepare mask -> reconstruct -> undo ->
reconstruct again -> export. The stubs make every step reproducible:
replaying the exported operation log gives identical image digests.
"""
from pathlib import Path

import numpy as np

from urbanscape import (
    InpaintParams,
    create_session,
    export,
    make_stub_suite,
    prepare_mask,
    reconstruct,
    replay,
    run_segmentation,
    select_segment,
    undo,
    working_image,
)
from urbanscape.hashing import image_digest

OUT = Path(__file__).parent / "output" / "project"

suite = make_stub_suite(grid=3)

yy, xx = np.mgrid[0:96, 0:96]
scene = np.stack([(xx * 3) % 256, (yy * 3) % 256, (xx ^ yy) % 256], axis=-1).astype(np.uint8)

session = create_session(scene)
print(f"session {session.id[:8]}.. state={session.state.value}")

session = run_segmentation(session, suite.segmentation)
print(f"segmented into {len(session.segmentation.segments)} cells")

session = select_segment(session, 80, 80)
info = session.segmentation.info(session.selection)
print(f"clicked (80,80): segment {info.id} ({info.class_name}, {info.category.value})")

session = prepare_mask(session)  # defaults: radius from image size, sigma = radius/2
print(f"mask prepared: radius={session.prepared.radius} sigma={session.prepared.sigma}")

session = reconstruct(session, "an array of flowerbeds", InpaintParams(seed=7), suite.inpainting)
print(f"reconstructed, history depth {len(session.history)}")
first_digest = image_digest(working_image(session))

session = undo(session)
print(f"undo -> state {session.state.value}, history depth {len(session.history)}")

session = select_segment(session, 80, 80)
session = prepare_mask(session)
session = reconstruct(session, "an array of flowerbeds", InpaintParams(seed=7), suite.inpainting)
assert image_digest(working_image(session)) == first_digest
print("redo with the same seed reproduced the identical result")

manifest = export(session, OUT)
print(f"exported {len(manifest.files)} files to {manifest.directory}")

fresh = make_stub_suite(grid=3)
replayed = replay(scene, list(session.oplog), fresh.segmentation, fresh.inpainting)
assert [image_digest(im) for im in replayed.history] == [
    image_digest(im) for im in session.history
]
print("replaying the operation log reproduced every digest")
