/**
 * Display-space to image-space coordinate mapping.
 *
 * The canvas shows the session raster under an affine view transform
 * (uniform scale plus letterbox offsets). Clicks invert that transform and
 * clamp to the raster bounds, so a click on the letterbox margin selects
 * the nearest edge pixel.
 */

export interface Size {
  width: number;
  height: number;
}

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export interface PixelCoords {
  x: number;
  y: number;
}

const clamp = (value: number, lo: number, hi: number): number =>
  Math.min(hi, Math.max(lo, value));

/** Plain zoom with no letterboxing (1x, 2x, ...). */
export function zoomTransform(scale: number): ViewTransform {
  if (scale <= 0) throw new Error("zoom scale must be positive");
  return { scale, offsetX: 0, offsetY: 0 };
}

/** Fit the image inside the canvas, centered, preserving aspect ratio. */
export function fitTransform(image: Size, canvas: Size): ViewTransform {
  const scale = Math.min(canvas.width / image.width, canvas.height / image.height);
  return {
    scale,
    offsetX: (canvas.width - image.width * scale) / 2,
    offsetY: (canvas.height - image.height * scale) / 2,
  };
}

/** Invert the view transform: canvas click -> integer image pixel, clamped. */
export function canvasClickToImageCoords(
  image: Size,
  transform: ViewTransform,
  canvasX: number,
  canvasY: number,
): PixelCoords {
  const x = Math.floor((canvasX - transform.offsetX) / transform.scale);
  const y = Math.floor((canvasY - transform.offsetY) / transform.scale);
  return {
    x: clamp(x, 0, image.width - 1),
    y: clamp(y, 0, image.height - 1),
  };
}

/** Image pixel -> canvas coordinates of the pixel's top-left corner. */
export function imageToCanvas(
  transform: ViewTransform,
  x: number,
  y: number,
): { cx: number; cy: number } {
  return {
    cx: x * transform.scale + transform.offsetX,
    cy: y * transform.scale + transform.offsetY,
  };
}
