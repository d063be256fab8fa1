"""Binary morphology, feathered alpha maps, colour transfer, and compositing.

This is the geometry behind mask preparation: the selected segment is
dilated to create a blending buffer, the buffer edge is feathered into a
smooth alpha ramp, and generated content is colour-matched to the boundary
band before being composited back. All raster arithmetic happens in float64
and is quantized exactly once at output with half-up rounding, so every
documented example is bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyBand, MaskNotNested
from .rasters import require_mask, require_rgb8, to_uint8


@dataclass(frozen=True)
class StructuringElement:
    """Neighborhood shape for morphology: a square or disk of given radius.

    A square of radius r covers offsets |dx| <= r and |dy| <= r; a disk
    covers dx^2 + dy^2 <= r^2.
    """

    shape: str  # "square" or "disk"
    radius: int

    def __post_init__(self):
        if self.shape not in ("square", "disk"):
            raise ValueError(f"unknown structuring element shape {self.shape!r}")
        if self.radius < 1:
            raise ValueError("structuring element radius must be >= 1")

    def offsets(self) -> list[tuple[int, int]]:
        r = self.radius
        if self.shape == "square":
            return [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]
        return [
            (dy, dx)
            for dy in range(-r, r + 1)
            for dx in range(-r, r + 1)
            if dy * dy + dx * dx <= r * r
        ]


def square(radius: int) -> StructuringElement:
    return StructuringElement("square", radius)


def disk(radius: int) -> StructuringElement:
    return StructuringElement("disk", radius)


def _shifted(mask: np.ndarray, dy: int, dx: int, fill: bool = False) -> np.ndarray:
    """Mask translated by (dy, dx); pixels shifted in from outside take `fill`."""
    h, w = mask.shape
    out = np.full_like(mask, fill)
    ys = slice(max(0, dy), min(h, h + dy))
    xs = slice(max(0, dx), min(w, w + dx))
    ys_src = slice(max(0, -dy), min(h, h - dy))
    xs_src = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = mask[ys_src, xs_src]
    return out


def dilate(mask: np.ndarray, se: StructuringElement, iterations: int = 1) -> np.ndarray:
    """Minkowski dilation, applied `iterations` times; borders clip."""
    require_mask(mask)
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    out = mask.copy()
    offsets = se.offsets()
    for _ in range(iterations):
        acc = np.zeros_like(out)
        for dy, dx in offsets:
            acc |= _shifted(out, dy, dx)
        out = acc
    return out


def erode(mask: np.ndarray, se: StructuringElement, iterations: int = 1) -> np.ndarray:
    """Dual of dilate: erode(m) = ~dilate(~m).

    Dilation clips at borders (outside = false), so by duality erosion
    treats out-of-image pixels as true; this is what makes the closing
    erode(dilate(m)) contain m even at image borders.
    """
    require_mask(mask)
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    out = mask.copy()
    offsets = se.offsets()
    for _ in range(iterations):
        acc = np.ones_like(out)
        for dy, dx in offsets:
            acc &= _shifted(out, dy, dx, fill=True)
        out = acc
    return out


def default_dilation_radius(width: int, height: int) -> int:
    """Session default: 1% of the short side, floor 2, half-up rounding."""
    return max(2, int(math.floor(0.01 * min(width, height) + 0.5)))


def default_feather_sigma(radius: int) -> float:
    """Session default: half the dilation radius, floor 1.0."""
    return max(1.0, radius / 2.0)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian weights truncated at 3*sigma and renormalized to sum 1."""
    r = int(math.ceil(3.0 * sigma))
    ks = np.arange(-r, r + 1, dtype=np.float64)
    weights = np.exp(-(ks ** 2) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def _blur_axis(values: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    r = (kernel.size - 1) // 2
    out = np.zeros_like(values)
    for k, w in zip(range(-r, r + 1), kernel):
        shifted = np.zeros_like(values)
        if axis == 0:
            src = values[max(0, -k): values.shape[0] - max(0, k), :]
            shifted[max(0, k): values.shape[0] - max(0, -k), :] = src
        else:
            src = values[:, max(0, -k): values.shape[1] - max(0, k)]
            shifted[:, max(0, k): values.shape[1] - max(0, -k)] = src
        out += w * shifted
    return out


def gaussian_blur(values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with zero padding outside the raster."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    kernel = _gaussian_kernel(sigma)
    arr = np.asarray(values, dtype=np.float64)
    return _blur_axis(_blur_axis(arr, kernel, axis=0), kernel, axis=1)


def feather(selected: np.ndarray, dilated: np.ndarray, sigma: float) -> np.ndarray:
    """Smooth alpha ramp across the dilation buffer.

    Gaussian-blurs the dilated mask's indicator, then clamps: alpha is
    exactly 1 on the eroded interior of the selection (square SE of radius
    ceil(sigma)) and exactly 0 outside the dilated support.
    """
    require_mask(selected)
    require_mask(dilated)
    if selected.shape != dilated.shape:
        raise DimensionMismatch(f"{selected.shape} vs {dilated.shape}")
    if np.any(selected & ~dilated):
        raise MaskNotNested("selected mask must be contained in the dilated mask")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")

    alpha = gaussian_blur(dilated.astype(np.float64), sigma)
    interior = erode(selected, square(int(math.ceil(sigma))), 1)
    alpha[interior] = 1.0
    alpha[~dilated] = 0.0
    return np.clip(alpha, 0.0, 1.0)


@dataclass(frozen=True)
class ColorStats:
    """Per-channel first/second moments over a sampled pixel band."""

    mean: tuple[float, float, float]
    stddev: tuple[float, float, float]
    sample_count: int


def color_stats(image: np.ndarray, band: np.ndarray) -> ColorStats:
    require_rgb8(image)
    require_mask(band)
    if image.shape[:2] != band.shape:
        raise DimensionMismatch(f"image {image.shape[:2]} vs band {band.shape}")
    count = int(band.sum())
    if count == 0:
        raise EmptyBand("band contains no pixels")
    samples = image[band].astype(np.float64)  # (N, 3)
    mean = samples.mean(axis=0)
    stddev = samples.std(axis=0)  # population stddev
    return ColorStats(tuple(mean), tuple(stddev), count)


def color_correct(patch: np.ndarray, original: np.ndarray, band: np.ndarray) -> np.ndarray:
    """Match the patch's band statistics to the original's band statistics.

    Per channel: x -> (x - mean_patch) * (std_orig / std_patch) + mean_orig,
    falling back to a pure mean shift when the patch band is constant.
    """
    require_rgb8(patch)
    require_rgb8(original)
    if patch.shape != original.shape:
        raise DimensionMismatch(f"patch {patch.shape} vs original {original.shape}")
    stats_patch = color_stats(patch, band)
    stats_orig = color_stats(original, band)

    out = np.empty_like(patch, dtype=np.float64)
    values = patch.astype(np.float64)
    for c in range(3):
        mu_p, mu_o = stats_patch.mean[c], stats_orig.mean[c]
        sd_p, sd_o = stats_patch.stddev[c], stats_orig.stddev[c]
        if sd_p == 0.0:
            out[:, :, c] = values[:, :, c] - mu_p + mu_o
        else:
            out[:, :, c] = (values[:, :, c] - mu_p) * (sd_o / sd_p) + mu_o
    return to_uint8(out)


def composite(original: np.ndarray, patch: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Per-pixel blend out = alpha*patch + (1-alpha)*original, half-up rounded.

    Pixels with alpha exactly 0 come out bit-identical to the original.
    """
    require_rgb8(original)
    require_rgb8(patch)
    alpha = np.asarray(alpha, dtype=np.float64)
    if original.shape != patch.shape or alpha.shape != original.shape[:2]:
        raise DimensionMismatch(
            f"original {original.shape}, patch {patch.shape}, alpha {alpha.shape}"
        )
    a = alpha[:, :, None]
    blended = a * patch.astype(np.float64) + (1.0 - a) * original.astype(np.float64)
    out = to_uint8(blended)
    zero = alpha == 0.0
    out[zero] = original[zero]  # guard float arithmetic; exactness is contractual
    return out


@dataclass(frozen=True)
class Rect:
    """Inclusive axis-aligned pixel rectangle."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1


def bounding_box(mask: np.ndarray) -> Rect | None:
    """Tightest rectangle containing all true pixels; None for an empty mask."""
    require_mask(mask)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return Rect(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
