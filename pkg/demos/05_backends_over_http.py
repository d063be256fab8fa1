"""
The backend wire protocol: serving stubs and calling them remotely
==================================================================

Model capabilities live behind three HTTP endpoints (/v1/segment,
/v1/inpaint, /v1/embed). This demo runs the stub suite behind a real
uvicorn server on localhost and talks to it through the remote clients,
exactly as the engine would talk to a GPU sidecar.
"""
import threading
import time

import httpx
import numpy as np
import uvicorn

from urbanscape import InpaintParams, make_stub_suite
from urbanscape.backends import (
    RemoteEmbeddingBackend,
    RemoteInpaintingBackend,
    RemoteSegmentationBackend,
    backend_app,
)

PORT = 8731
suite = make_stub_suite(grid=2)
app = backend_app(
    segmentation=suite.segmentation,
    inpainting=suite.inpainting,
    embedding=suite.embedding,
)

server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=PORT, log_level="error"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
base = f"http://127.0.0.1:{PORT}"
for _ in range(100):
    try:
        if httpx.get(f"{base}/v1/health").json()["ok"]:
            break
    except httpx.TransportError:
        time.sleep(0.05)
print(f"backend server up at {base}")

scene = np.tile(np.arange(64, dtype=np.uint8)[None, :, None], (64, 1, 3))

segment_map = RemoteSegmentationBackend(base).segment(scene)
print(f"remote segmentation: {len(segment_map.segments)} segments, "
      f"{segment_map.width}x{segment_map.height}")

mask = np.zeros((64, 64), dtype=bool)
mask[16:48, 16:48] = True
patched = RemoteInpaintingBackend(base).inpaint(
    scene, mask, "a cobbled courtyard", InpaintParams(seed=5)
)
print(f"remote inpainting changed {int((patched != scene).any(axis=-1).sum())} px")

vector = RemoteEmbeddingBackend(base).embed_text("a cobbled courtyard")
print(f"remote embedding: dim={vector.dim}, norm={np.linalg.norm(vector.values):.6f}")

server.should_exit = True
thread.join(timeout=5)
print("server stopped")
