"""Raster conventions and lossless codecs.

Rasters are plain numpy arrays throughout the package:

* RGB8 image  -- ``uint8`` array of shape ``(H, W, 3)``
* binary mask -- ``bool`` array of shape ``(H, W)``
* alpha map   -- ``float64`` array of shape ``(H, W)`` with values in [0, 1]

Masks serialize as 8-bit grayscale PNG (0 = false, 255 = true); alpha maps
quantize to 0..255 on save. PNG is the pinned interchange format because it
is lossless for both RGB8 and 8-bit gray.
"""
from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image

from .errors import EmptyImage, UnsupportedImage


def require_rgb8(image: np.ndarray) -> np.ndarray:
    """Validate an RGB8 raster and return it unchanged."""
    if not isinstance(image, np.ndarray) or image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise UnsupportedImage("expected a uint8 array of shape (H, W, 3)")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise EmptyImage("raster has zero pixels")
    return image


def require_mask(mask: np.ndarray) -> np.ndarray:
    """Validate a boolean mask raster and return it unchanged."""
    if not isinstance(mask, np.ndarray) or mask.dtype != np.bool_ or mask.ndim != 2:
        raise UnsupportedImage("expected a bool array of shape (H, W)")
    return mask


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Quantize float values with ties rounding up (x.5 -> x+1).

    numpy's `round` rounds half to even; all blend arithmetic in this
    package is pinned to half-up so examples are bit-reproducible.
    """
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Round half-up and clamp to the uint8 range."""
    return np.clip(round_half_up(values), 0, 255).astype(np.uint8)


# --- PNG codecs --------------------------------------------------------------

def rgb_to_png(image: np.ndarray) -> bytes:
    require_rgb8(image)
    buf = io.BytesIO()
    Image.fromarray(image, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def png_to_rgb(data: bytes) -> np.ndarray:
    """Decode any PIL-readable image to RGB8; raise UnsupportedImage otherwise."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise UnsupportedImage(f"cannot decode image: {exc}") from exc
    if arr.size == 0:
        raise EmptyImage("decoded raster has zero pixels")
    return arr


def mask_to_png(mask: np.ndarray) -> bytes:
    require_mask(mask)
    gray = np.where(mask, np.uint8(255), np.uint8(0))
    buf = io.BytesIO()
    Image.fromarray(gray, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_to_mask(data: bytes) -> np.ndarray:
    """Decode an 8-bit gray PNG to a bool mask (any value >= 128 is true)."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            gray = np.asarray(im.convert("L"), dtype=np.uint8)
    except Exception as exc:
        raise UnsupportedImage(f"cannot decode mask: {exc}") from exc
    return gray >= 128


def alpha_to_png(alpha: np.ndarray) -> bytes:
    """Quantize an alpha map to 8-bit gray and encode as PNG."""
    arr = np.asarray(alpha, dtype=np.float64)
    gray = to_uint8(arr * 255.0)
    buf = io.BytesIO()
    Image.fromarray(gray, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def png_to_alpha(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        gray = np.asarray(im.convert("L"), dtype=np.float64)
    return gray / 255.0


# --- base64 wrappers (wire bodies carry PNG bytes as base64 text) -----------

def b64_encode(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def b64_decode(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"), validate=True)
