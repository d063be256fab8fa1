"""The editing workflow as an explicit session state machine.

    Uploaded -> Segmented -> SegmentSelected -> MaskPrepared -> Reconstructed
                   ^                                                  |
                   +------------- re-segmentation  <------------------+

Sessions are immutable: every operation returns a new session or raises,
leaving its input untouched, so a failed call can never corrupt state and a
session is a pure fold over its operation log (replayable bit-exactly when
backends are the deterministic stubs).
"""
from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .backends import InpaintingBackend, InpaintParams, SegmentationBackend
from .errors import (
    BackendFailure,
    EmptyPrompt,
    HistoryLimitReached,
    IllegalTransition,
    ImageTooLarge,
    InvalidSegmentMap,
    IoFailure,
    NothingToUndo,
    UnsupportedImage,
    UrbanscapeError,
)
from .hashing import file_digest, image_digest
from .masking import composite, color_correct, default_dilation_radius, default_feather_sigma, dilate, feather, square
from .panoptic import SegmentMap, extract_mask, segment_at, segments_metadata
from .rasters import alpha_to_png, mask_to_png, require_rgb8, rgb_to_png

MIN_DIMENSION = 64
MAX_DIMENSION = 8192
DEFAULT_MAX_HISTORY = 32


class SessionState(Enum):
    UPLOADED = "Uploaded"
    SEGMENTED = "Segmented"
    SEGMENT_SELECTED = "SegmentSelected"
    MASK_PREPARED = "MaskPrepared"
    RECONSTRUCTED = "Reconstructed"


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(array)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PreparedMask:
    """Step-4 artifacts: selection, dilated buffer, alpha ramp, colour band."""

    selected: np.ndarray
    dilated: np.ndarray
    alpha: np.ndarray
    band: np.ndarray
    radius: int
    sigma: float

    def __post_init__(self):
        for name in ("selected", "dilated", "alpha", "band"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))


@dataclass(frozen=True)
class StepRecord:
    """One committed reconstruction: its mask geometry and conditioning."""

    prepared: PreparedMask
    prompt: str
    params: InpaintParams


@dataclass(frozen=True)
class Session:
    id: str
    state: SessionState
    base_image: np.ndarray
    segmentation: SegmentMap | None
    segmented_at: int | None  # history length when segmentation ran
    selection: int | None
    prepared: PreparedMask | None
    prompt: str | None
    params: InpaintParams | None
    history: tuple[np.ndarray, ...]
    steps: tuple[StepRecord, ...]
    oplog: tuple[dict, ...]
    created: float
    updated: float
    allow_resegmentation: bool = True
    max_history: int = DEFAULT_MAX_HISTORY

    def __post_init__(self):
        object.__setattr__(self, "base_image", _frozen(self.base_image))
        object.__setattr__(self, "history", tuple(_frozen(im) for im in self.history))


def working_image(session: Session) -> np.ndarray:
    """The image the next operation acts on: last committed result, else base."""
    return session.history[-1] if session.history else session.base_image


def _touch(session: Session, entry: dict, **changes) -> Session:
    return replace(
        session,
        oplog=session.oplog + (entry,),
        updated=time.time(),
        **changes,
    )


def _backend_identity(backend) -> str:
    ident = getattr(backend, "identity", None)
    return ident() if callable(ident) else type(backend).__name__


def create_session(
    image: np.ndarray,
    session_id: str | None = None,
    allow_resegmentation: bool = True,
    max_history: int = DEFAULT_MAX_HISTORY,
) -> Session:
    require_rgb8(image)
    h, w = image.shape[:2]
    if w < MIN_DIMENSION or h < MIN_DIMENSION:
        raise UnsupportedImage(f"{w}x{h} below the {MIN_DIMENSION}px floor")
    if w > MAX_DIMENSION or h > MAX_DIMENSION:
        raise ImageTooLarge(f"{w}x{h} above the {MAX_DIMENSION}px ceiling")
    now = time.time()
    return Session(
        id=session_id or uuid.uuid4().hex,
        state=SessionState.UPLOADED,
        base_image=image,
        segmentation=None,
        segmented_at=None,
        selection=None,
        prepared=None,
        prompt=None,
        params=None,
        history=(),
        steps=(),
        oplog=({"op": "create", "width": w, "height": h},),
        created=now,
        updated=now,
        allow_resegmentation=allow_resegmentation,
        max_history=max_history,
    )


def run_segmentation(session: Session, backend: SegmentationBackend) -> Session:
    allowed = {SessionState.UPLOADED}
    if session.allow_resegmentation:
        allowed.add(SessionState.RECONSTRUCTED)
    if session.state not in allowed:
        raise IllegalTransition(f"cannot segment in state {session.state.value}")
    image = working_image(session)
    try:
        segmentation = backend.segment(image)
    except UrbanscapeError:
        raise
    except Exception as exc:
        raise BackendFailure(f"segmentation backend failed: {exc}") from exc
    if (segmentation.height, segmentation.width) != image.shape[:2]:
        raise InvalidSegmentMap(
            f"map {segmentation.width}x{segmentation.height} does not cover the working image"
        )
    return _touch(
        session,
        {"op": "segment", "backend": _backend_identity(backend)},
        state=SessionState.SEGMENTED,
        segmentation=segmentation,
        segmented_at=len(session.history),
        selection=None,
        prepared=None,
        prompt=None,
        params=None,
    )


def select_segment(session: Session, x: int, y: int) -> Session:
    if session.state not in (SessionState.SEGMENTED, SessionState.SEGMENT_SELECTED):
        raise IllegalTransition(f"cannot select in state {session.state.value}")
    segment_id = segment_at(session.segmentation, x, y)
    return _touch(
        session,
        {"op": "select", "x": x, "y": y},
        state=SessionState.SEGMENT_SELECTED,
        selection=segment_id,
        prepared=None,
    )


def prepare_mask(
    session: Session, radius: int | None = None, sigma: float | None = None
) -> Session:
    if session.state is not SessionState.SEGMENT_SELECTED:
        raise IllegalTransition(f"cannot prepare mask in state {session.state.value}")
    image = working_image(session)
    if radius is None:
        radius = default_dilation_radius(image.shape[1], image.shape[0])
    if sigma is None:
        sigma = default_feather_sigma(radius)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")

    selected = extract_mask(session.segmentation, session.selection)
    dilated = dilate(selected, square(radius), 1)
    alpha = feather(selected, dilated, sigma)
    prepared = PreparedMask(
        selected=selected,
        dilated=dilated,
        alpha=alpha,
        band=dilated & ~selected,
        radius=radius,
        sigma=float(sigma),
    )
    return _touch(
        session,
        {"op": "mask", "radius": radius, "sigma": float(sigma)},
        state=SessionState.MASK_PREPARED,
        prepared=prepared,
    )


def reconstruct(
    session: Session, prompt: str, params: InpaintParams, backend: InpaintingBackend
) -> Session:
    if session.state is not SessionState.MASK_PREPARED:
        raise IllegalTransition(f"cannot reconstruct in state {session.state.value}")
    prompt = prompt.strip()
    if not prompt:
        raise EmptyPrompt("prompt is empty after trimming")
    if len(session.history) >= session.max_history:
        raise HistoryLimitReached(f"history is capped at {session.max_history} results")

    image = working_image(session)
    prepared = session.prepared
    try:
        patch = backend.inpaint(image, prepared.dilated, prompt, params)
    except UrbanscapeError:
        raise
    except Exception as exc:
        raise BackendFailure(f"inpainting backend failed: {exc}") from exc
    if patch.shape != image.shape:
        raise BackendFailure(f"backend returned {patch.shape}, expected {image.shape}")

    # Colour-match over the boundary band; skipped when dilation added no band
    # (a selection covering the whole frame).
    if prepared.band.any():
        patch = color_correct(patch, image, prepared.band)
    result = composite(image, patch, prepared.alpha)

    step = StepRecord(prepared=prepared, prompt=prompt, params=params)
    return _touch(
        session,
        {
            "op": "reconstruct",
            "prompt": prompt,
            "seed": params.seed,
            "guidance": params.guidance,
            "strength": params.strength,
            "steps": params.steps,
        },
        state=SessionState.RECONSTRUCTED,
        history=session.history + (result,),
        steps=session.steps + (step,),
        prompt=prompt,
        params=params,
    )


def undo(session: Session) -> Session:
    if not session.history:
        raise NothingToUndo("session has no committed results")
    history = session.history[:-1]
    steps = session.steps[:-1]
    segmentation_valid = (
        session.segmentation is not None and session.segmented_at == len(history)
    )
    return _touch(
        session,
        {"op": "undo"},
        state=SessionState.SEGMENTED if segmentation_valid else SessionState.UPLOADED,
        history=history,
        steps=steps,
        segmentation=session.segmentation if segmentation_valid else None,
        segmented_at=session.segmented_at if segmentation_valid else None,
        selection=None,
        prepared=None,
        prompt=None,
        params=None,
    )


# --- export ------------------------------------------------------------------

@dataclass(frozen=True)
class ExportedFile:
    path: str
    kind: str
    sha256: str
    pixel_sha256: str | None = None


@dataclass(frozen=True)
class ExportManifest:
    session_id: str
    directory: str
    files: tuple[ExportedFile, ...]

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "directory": self.directory,
            "files": [
                {
                    "path": f.path,
                    "kind": f.kind,
                    "sha256": f.sha256,
                    "pixel_sha256": f.pixel_sha256,
                }
                for f in self.files
            ],
        }


def export(session: Session, target) -> ExportManifest:
    """Write the project directory: manifest, base image, per-step rasters.

    Permitted in any state; the manifest records the full operation log with
    parameters and seeds, so a stub-backed session can be replayed from the
    export alone.
    """
    directory = Path(target)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {directory}: {exc}") from exc

    entries: list[ExportedFile] = []

    def _write(name: str, data: bytes, kind: str, pixel_digest: str | None = None):
        path = directory / name
        try:
            path.write_bytes(data)
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        entries.append(ExportedFile(name, kind, file_digest(path), pixel_digest))

    _write("base.png", rgb_to_png(session.base_image), "base", image_digest(session.base_image))
    for index, step in enumerate(session.steps, start=1):
        stem = f"step_{index:02d}"
        _write(f"{stem}_mask.png", mask_to_png(step.prepared.dilated), "mask",
               image_digest(step.prepared.dilated))
        _write(f"{stem}_alpha.png", alpha_to_png(step.prepared.alpha), "alpha")
        result = session.history[index - 1]
        _write(f"{stem}_result.png", rgb_to_png(result), "result", image_digest(result))
    final = working_image(session)
    _write("final.png", rgb_to_png(final), "final", image_digest(final))

    manifest = {
        "version": 1,
        "session_id": session.id,
        "state": session.state.value,
        "created": session.created,
        "updated": session.updated,
        "operations": list(session.oplog),
        "files": [
            {"path": e.path, "kind": e.kind, "sha256": e.sha256, "pixel_sha256": e.pixel_sha256}
            for e in entries
        ],
    }
    try:
        (directory / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write manifest: {exc}") from exc
    entries.append(
        ExportedFile("manifest.json", "manifest", file_digest(directory / "manifest.json"))
    )
    return ExportManifest(session.id, str(directory), tuple(entries))


# --- replay ------------------------------------------------------------------

def replay(
    base_image: np.ndarray,
    operations: list[dict],
    segmentation_backend: SegmentationBackend,
    inpainting_backend: InpaintingBackend,
    session_id: str | None = None,
) -> Session:
    """Re-run an operation log against fresh backends.

    With deterministic stub backends this reproduces every result image
    digest of the original session.
    """
    if not operations or operations[0].get("op") != "create":
        raise ValueError("operation log must start with a create entry")
    session = create_session(base_image, session_id=session_id)
    for entry in operations[1:]:
        op = entry.get("op")
        if op == "segment":
            session = run_segmentation(session, segmentation_backend)
        elif op == "select":
            session = select_segment(session, int(entry["x"]), int(entry["y"]))
        elif op == "mask":
            session = prepare_mask(session, int(entry["radius"]), float(entry["sigma"]))
        elif op == "reconstruct":
            params = InpaintParams(
                seed=int(entry["seed"]),
                guidance=float(entry["guidance"]),
                strength=float(entry["strength"]),
                steps=int(entry["steps"]),
            )
            session = reconstruct(session, entry["prompt"], params, inpainting_backend)
        elif op == "undo":
            session = undo(session)
        else:
            raise ValueError(f"unknown operation {op!r} in log")
    return session


def session_fingerprint(session: Session) -> str:
    """Digest of everything observable about a session (timestamps excluded
    so a replayed session compares equal to the original)."""
    parts = {
        "id": session.id,
        "state": session.state.value,
        "base": image_digest(session.base_image),
        "segmentation": None,
        "segmented_at": session.segmented_at,
        "selection": session.selection,
        "prepared": None,
        "prompt": session.prompt,
        "params": None,
        "history": [image_digest(im) for im in session.history],
        "oplog": list(session.oplog),
    }
    if session.segmentation is not None:
        parts["segmentation"] = {
            "labels": image_digest(session.segmentation.labels),
            "segments": segments_metadata(session.segmentation),
        }
    if session.prepared is not None:
        parts["prepared"] = {
            "selected": image_digest(session.prepared.selected),
            "dilated": image_digest(session.prepared.dilated),
            "alpha": image_digest(session.prepared.alpha),
            "band": image_digest(session.prepared.band),
            "radius": session.prepared.radius,
            "sigma": session.prepared.sigma,
        }
    if session.params is not None:
        p = session.params
        parts["params"] = [p.seed, p.guidance, p.strength, p.steps]
    canonical = json.dumps(parts, sort_keys=True)
    return image_digest(np.frombuffer(canonical.encode("utf-8"), dtype=np.uint8))
