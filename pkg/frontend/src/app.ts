/**
 * DOM wiring for the workstation: upload screen, clickable segmented
 * overlay, prompt/parameter form, and the before/after result view with
 * undo and export. All image semantics come from the service.
 */

import { ApiClient, ApiError } from "./api.js";
import { canvasClickToImageCoords, fitTransform, imageToCanvas, type Size, type ViewTransform } from "./coords.js";
import {
  applyCreated,
  applyMask,
  applyReconstruct,
  applySegments,
  applySelect,
  applyUndo,
  beginRequest,
  controlsEnabled,
  failRequest,
  initialView,
  screenFor,
  segmentsUnderPixel,
  type UiSessionView,
} from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let view: UiSessionView = initialView();
let api = new ApiClient("http://127.0.0.1:8501");
let transform: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };
let zoomMode: "fit" | "1" | "2" = "fit";
let compare = 0.5; // before/after slider position

const canvas = () => $<HTMLCanvasElement>("viewport");
const statusLine = () => $<HTMLElement>("status");

function setStatus(text: string, isError = false): void {
  statusLine().textContent = text;
  statusLine().className = isError ? "status error" : "status";
}

async function guarded(action: () => Promise<UiSessionView>): Promise<void> {
  if (!controlsEnabled(view)) return;
  view = beginRequest(view);
  render();
  try {
    view = await action();
  } catch (err) {
    view = failRequest(view);
    const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    setStatus(message, true); // surfaced verbatim; every control stays usable for retry
  }
  render();
}

// --- raster drawing ----------------------------------------------------------

const rasterCache = new Map<string, HTMLImageElement>();

async function loadRaster(url: string): Promise<HTMLImageElement> {
  const cached = rasterCache.get(url);
  if (cached) return cached;
  const blob = new Blob([await api.fetchRaster(url)], { type: "image/png" });
  const image = new Image();
  await new Promise<void>((resolve, reject) => {
    image.onload = () => resolve();
    image.onerror = () => reject(new Error(`cannot decode raster ${url}`));
    image.src = URL.createObjectURL(blob);
  });
  rasterCache.set(url, image);
  return image;
}

function currentTransform(image: Size): ViewTransform {
  const c = canvas();
  if (zoomMode === "fit") return fitTransform(image, { width: c.width, height: c.height });
  return { scale: Number(zoomMode), offsetX: 0, offsetY: 0 };
}

async function drawViewport(): Promise<void> {
  if (!view.sessionId || !view.imageSize) return;
  const c = canvas();
  const ctx = c.getContext("2d");
  if (!ctx) return;
  transform = currentTransform(view.imageSize);
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.imageSmoothingEnabled = false;

  const screen = screenFor(view);
  const draw = (img: HTMLImageElement) => {
    ctx.drawImage(
      img,
      transform.offsetX,
      transform.offsetY,
      view.imageSize!.width * transform.scale,
      view.imageSize!.height * transform.scale,
    );
  };

  if (screen === "result" && view.resultIndex !== null) {
    // before/after: result on the left of the split, pre-edit on the right
    const before = await loadRaster(
      view.resultIndex > 0
        ? api.imageUrl(view.sessionId, view.resultIndex - 1)
        : api.overlayUrl(view.sessionId, 0),
    );
    const after = await loadRaster(api.imageUrl(view.sessionId, view.resultIndex));
    draw(before);
    const split = transform.offsetX + view.imageSize.width * transform.scale * compare;
    ctx.save();
    ctx.beginPath();
    ctx.rect(0, 0, split, c.height);
    ctx.clip();
    draw(after);
    ctx.restore();
    ctx.strokeStyle = "#fff";
    ctx.beginPath();
    ctx.moveTo(split, 0);
    ctx.lineTo(split, c.height);
    ctx.stroke();
  } else if (screen === "select" || screen === "prompt") {
    draw(await loadRaster(api.overlayUrl(view.sessionId, 0.5)));
    if (view.selected) {
      const [x0, y0, x1, y1] = view.selected.bbox;
      const a = imageToCanvas(transform, x0, y0);
      const b = imageToCanvas(transform, x1 + 1, y1 + 1);
      ctx.strokeStyle = "#ff3b30";
      ctx.lineWidth = 2;
      ctx.strokeRect(a.cx, a.cy, b.cx - a.cx, b.cy - a.cy);
    }
  }
}

// --- screens -----------------------------------------------------------------

function render(): void {
  const screen = screenFor(view);
  for (const name of ["upload", "select", "prompt", "result"]) {
    $(`screen-${name}`).style.display = name === screen ? "block" : "none";
  }
  $("workspace").style.display = view.sessionId ? "block" : "none";
  const busy = !controlsEnabled(view);
  document
    .querySelectorAll<HTMLButtonElement>("button[data-mutating]")
    .forEach((b) => (b.disabled = busy));
  $("session-line").textContent = view.sessionId
    ? `session ${view.sessionId.slice(0, 8)} · ${view.state}` +
      (view.selected ? ` · segment ${view.selected.id} (${view.selected.class})` : "")
    : "no session";
  void drawViewport();
}

async function uploadFile(file: File): Promise<void> {
  const bytes = new Uint8Array(await file.arrayBuffer());
  let binary = "";
  bytes.forEach((b) => (binary += String.fromCharCode(b)));
  const b64 = btoa(binary);
  const probe = new Image();
  const size = await new Promise<Size>((resolve, reject) => {
    probe.onload = () => resolve({ width: probe.naturalWidth, height: probe.naturalHeight });
    probe.onerror = () => reject(new Error("file is not a decodable image"));
    probe.src = URL.createObjectURL(file);
  });
  await guarded(async () => {
    const created = await api.createSession(b64);
    let next = applyCreated(view, created, size);
    // segmentation runs immediately after upload; the select screen needs it
    const segmented = await api.segment(created.id);
    next = applySegments(next, segmented);
    setStatus(`segmented into ${segmented.segments.length} regions — click one`);
    return next;
  });
}

function hookEvents(): void {
  $<HTMLInputElement>("service-url").addEventListener("change", (e) => {
    api = new ApiClient((e.target as HTMLInputElement).value.replace(/\/+$/, ""));
    rasterCache.clear();
  });

  $<HTMLInputElement>("file-input").addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void uploadFile(file);
  });

  $<HTMLSelectElement>("zoom").addEventListener("change", (e) => {
    zoomMode = (e.target as HTMLSelectElement).value as typeof zoomMode;
    void drawViewport();
  });

  canvas().addEventListener("mousemove", (e) => {
    if (!view.imageSize || screenFor(view) !== "select") return;
    const rect = canvas().getBoundingClientRect();
    const { x, y } = canvasClickToImageCoords(
      view.imageSize, transform, e.clientX - rect.left, e.clientY - rect.top,
    );
    const hits = segmentsUnderPixel(view, x, y);
    canvas().title = hits.length ? `${hits[0].class} (#${hits[0].id})` : "";
  });

  canvas().addEventListener("click", (e) => {
    const screen = screenFor(view);
    if (!view.sessionId || !view.imageSize) return;
    if (screen !== "select" && screen !== "prompt") return;
    const rect = canvas().getBoundingClientRect();
    const { x, y } = canvasClickToImageCoords(
      view.imageSize, transform, e.clientX - rect.left, e.clientY - rect.top,
    );
    void guarded(async () => {
      const response = await api.select(view.sessionId!, x, y);
      setStatus(`selected segment ${response.segment.id} (${response.segment.class})`);
      return applySelect(view, response);
    });
  });

  $<HTMLButtonElement>("btn-reconstruct").addEventListener("click", () => {
    const prompt = $<HTMLInputElement>("prompt").value;
    const seed = Number($<HTMLInputElement>("seed").value || "0");
    const radiusRaw = $<HTMLInputElement>("radius").value;
    const sigmaRaw = $<HTMLInputElement>("sigma").value;
    void guarded(async () => {
      let next = view;
      if (next.state === "SegmentSelected") {
        const mask = await api.prepareMask(
          next.sessionId!,
          radiusRaw ? Number(radiusRaw) : undefined,
          sigmaRaw ? Number(sigmaRaw) : undefined,
        );
        next = { ...applyMask(next, mask), pending: true };
      }
      const done = await api.reconstruct(next.sessionId!, { prompt, seed });
      setStatus("reconstruction committed");
      return applyReconstruct(next, done);
    });
  });

  $<HTMLButtonElement>("btn-undo").addEventListener("click", () => {
    void guarded(async () => {
      const response = await api.undo(view.sessionId!);
      setStatus("last result removed");
      return applyUndo(view, response);
    });
  });

  $<HTMLButtonElement>("btn-iterate").addEventListener("click", () => {
    void guarded(async () => {
      const response = await api.segment(view.sessionId!);
      setStatus("re-segmented the committed result — click a region");
      return applySegments(view, response);
    });
  });

  $<HTMLButtonElement>("btn-export").addEventListener("click", () => {
    void guarded(async () => {
      const manifest = await api.exportProject(view.sessionId!);
      const final = manifest.files.find((f) => f.path === "final.png");
      if (final && view.resultIndex !== null) {
        const bytes = await api.fetchRaster(api.imageUrl(view.sessionId!, view.resultIndex));
        const url = URL.createObjectURL(new Blob([bytes], { type: "image/png" }));
        const a = document.createElement("a");
        a.href = url;
        a.download = "urbanscape-result.png";
        a.click();
      }
      setStatus(`exported ${manifest.files.length} files on the server`);
      return { ...view, pending: false };
    });
  });

  $<HTMLInputElement>("compare").addEventListener("input", (e) => {
    compare = Number((e.target as HTMLInputElement).value) / 100;
    void drawViewport();
  });
}

export function start(): void {
  api = new ApiClient($<HTMLInputElement>("service-url").value.replace(/\/+$/, ""));
  hookEvents();
  render();
  setStatus("upload an urban scene to begin");
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  start();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
