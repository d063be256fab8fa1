import { describe, expect, it } from "vitest";

import {
  canvasClickToImageCoords,
  fitTransform,
  imageToCanvas,
  zoomTransform,
} from "../src/coords.js";

const image = { width: 100, height: 50 };

describe("canvasClickToImageCoords", () => {
  it("is the identity at 1x zoom", () => {
    expect(canvasClickToImageCoords(image, zoomTransform(1), 10, 20)).toEqual({ x: 10, y: 20 });
    expect(canvasClickToImageCoords(image, zoomTransform(1), 0, 0)).toEqual({ x: 0, y: 0 });
  });

  it("halves coordinates at 2x zoom", () => {
    // affine inverse: (10, 20) / 2 = (5, 10)
    expect(canvasClickToImageCoords(image, zoomTransform(2), 10, 20)).toEqual({ x: 5, y: 10 });
    expect(canvasClickToImageCoords(image, zoomTransform(2), 11, 21)).toEqual({ x: 5, y: 10 });
  });

  it("inverts the fit-to-window transform", () => {
    // 100x50 image in a 200x200 canvas: scale 2, letterboxed vertically by 50
    const t = fitTransform(image, { width: 200, height: 200 });
    expect(t).toEqual({ scale: 2, offsetX: 0, offsetY: 50 });
    expect(canvasClickToImageCoords(image, t, 40, 60)).toEqual({ x: 20, y: 5 });
    expect(canvasClickToImageCoords(image, t, 199, 149)).toEqual({ x: 99, y: 49 });
  });

  it("clamps clicks on the letterbox to the nearest edge pixel", () => {
    const t = fitTransform(image, { width: 200, height: 200 });
    expect(canvasClickToImageCoords(image, t, 40, 10)).toEqual({ x: 20, y: 0 }); // above
    expect(canvasClickToImageCoords(image, t, 40, 195)).toEqual({ x: 20, y: 49 }); // below
    expect(canvasClickToImageCoords(image, t, -5, 60)).toEqual({ x: 0, y: 5 }); // left
  });

  it("round-trips through imageToCanvas at integer scales", () => {
    const t = zoomTransform(2);
    for (const [x, y] of [[0, 0], [7, 3], [99, 49]] as const) {
      const { cx, cy } = imageToCanvas(t, x, y);
      expect(canvasClickToImageCoords(image, t, cx, cy)).toEqual({ x, y });
    }
  });

  it("rejects non-positive zoom", () => {
    expect(() => zoomTransform(0)).toThrow();
  });
});

describe("fitTransform", () => {
  it("letterboxes horizontally for tall canvases", () => {
    const t = fitTransform({ width: 50, height: 100 }, { width: 200, height: 100 });
    expect(t.scale).toBe(1);
    expect(t.offsetX).toBe(75);
    expect(t.offsetY).toBe(0);
  });

  it("downscales when the canvas is smaller", () => {
    const t = fitTransform({ width: 400, height: 200 }, { width: 100, height: 100 });
    expect(t.scale).toBe(0.25);
  });
});
