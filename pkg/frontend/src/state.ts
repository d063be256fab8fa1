/**
 * Client-side session view: a mirror of the last server-reported state.
 *
 * Two invariants hold everywhere:
 *  - `state` is only ever assigned from a server response, never guessed;
 *  - at most one mutating request is in flight (`pending` gates controls).
 */

import type {
  CreateResponse,
  MaskResponse,
  ReconstructResponse,
  SegmentResponse,
  SegmentSummary,
  SelectResponse,
  UndoResponse,
} from "./api.js";
import type { Size } from "./coords.js";

export type Screen = "upload" | "select" | "prompt" | "result";

export interface UiSessionView {
  sessionId: string | null;
  state: string | null;
  imageSize: Size | null;
  segments: SegmentSummary[];
  selected: SegmentSummary | null;
  maskRef: string | null;
  resultIndex: number | null;
  historyDepth: number;
  pending: boolean;
}

export function initialView(): UiSessionView {
  return {
    sessionId: null,
    state: null,
    imageSize: null,
    segments: [],
    selected: null,
    maskRef: null,
    resultIndex: null,
    historyDepth: 0,
    pending: false,
  };
}

/** Which workflow screen the view renders. */
export function screenFor(view: UiSessionView): Screen {
  switch (view.state) {
    case null:
    case "Uploaded":
      return "upload"; // segmentation not run yet
    case "Segmented":
      return "select";
    case "SegmentSelected":
    case "MaskPrepared":
      return "prompt";
    case "Reconstructed":
      return "result";
    default:
      throw new Error(`server reported unknown state ${view.state}`);
  }
}

/** Mutating controls are disabled while a request is pending. */
export function controlsEnabled(view: UiSessionView): boolean {
  return !view.pending;
}

export function beginRequest(view: UiSessionView): UiSessionView {
  if (view.pending) throw new Error("a mutating request is already in flight");
  return { ...view, pending: true };
}

export function failRequest(view: UiSessionView): UiSessionView {
  return { ...view, pending: false };
}

export function applyCreated(
  view: UiSessionView,
  response: CreateResponse,
  imageSize: Size,
): UiSessionView {
  return {
    ...initialView(),
    sessionId: response.id,
    state: response.state,
    imageSize,
  };
}

export function applySegments(view: UiSessionView, response: SegmentResponse): UiSessionView {
  return {
    ...view,
    pending: false,
    state: response.state,
    segments: response.segments,
    selected: null,
    maskRef: null,
  };
}

export function applySelect(view: UiSessionView, response: SelectResponse): UiSessionView {
  return {
    ...view,
    pending: false,
    state: response.state,
    selected: response.segment,
    maskRef: null,
  };
}

export function applyMask(view: UiSessionView, response: MaskResponse): UiSessionView {
  return { ...view, pending: false, state: response.state, maskRef: response.mask };
}

export function applyReconstruct(
  view: UiSessionView,
  response: ReconstructResponse,
): UiSessionView {
  return {
    ...view,
    pending: false,
    state: response.state,
    resultIndex: response.index,
    historyDepth: response.index + 1,
  };
}

export function applyUndo(view: UiSessionView, response: UndoResponse): UiSessionView {
  return {
    ...view,
    pending: false,
    state: response.state,
    selected: null,
    maskRef: null,
    resultIndex: response.history_depth > 0 ? response.history_depth - 1 : null,
    historyDepth: response.history_depth,
  };
}

/**
 * Hover pre-filter: segments whose bbox contains the pixel, most specific
 * (fewest pixels) first. Authoritative selection still goes through
 * POST /select.
 */
export function segmentsUnderPixel(
  view: UiSessionView,
  x: number,
  y: number,
): SegmentSummary[] {
  return view.segments
    .filter(
      (s) => x >= s.bbox[0] && x <= s.bbox[2] && y >= s.bbox[1] && y <= s.bbox[3],
    )
    .sort((a, b) => a.pixel_count - b.pixel_count);
}
