"""Wire-level raster codecs (deliberately standalone: the sidecar never
imports the workstation package).

Segment ids encode into RGB8 as id = R + 256*G + 65536*B; masks are 8-bit
gray PNG with >=128 meaning true.
"""
from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image


def b64_png_to_rgb(text: str) -> np.ndarray:
    data = base64.b64decode(text.encode("ascii"), validate=True)
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def rgb_to_b64_png(image: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(image.astype(np.uint8), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def b64_png_to_mask(text: str) -> np.ndarray:
    data = base64.b64decode(text.encode("ascii"), validate=True)
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8) >= 128


def ids_to_rgb(labels: np.ndarray) -> np.ndarray:
    ids = labels.astype(np.uint32)
    if ids.size and int(ids.max()) >= 256 ** 3:
        raise ValueError("segment id exceeds the 24-bit raster encoding")
    out = np.empty(ids.shape + (3,), dtype=np.uint8)
    out[..., 0] = ids & 0xFF
    out[..., 1] = (ids >> 8) & 0xFF
    out[..., 2] = (ids >> 16) & 0xFF
    return out
