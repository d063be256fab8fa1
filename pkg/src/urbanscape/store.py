"""Disk-backed session store with per-session locking and lazy TTL expiry.

Sessions persist on every transition. A save writes the whole session into
a fresh temporary directory and swaps it into place, so a crash mid-write
leaves either the previous consistent snapshot or a stray ``*.tmp`` that
the next sweep removes. Alpha maps persist as float ``.npy`` so a reloaded
session composites bit-identically; masks and images persist as PNG.
"""
from __future__ import annotations

import json
import shutil
import threading
import time
import uuid
from pathlib import Path

import numpy as np

from .backends import InpaintParams
from .panoptic import Taxonomy, decode_segment_map, encode_segment_map, segments_metadata
from .pipeline import PreparedMask, Session, SessionState, StepRecord
from .rasters import mask_to_png, png_to_mask, png_to_rgb, rgb_to_png

STORE_VERSION = 1


def _params_dict(params: InpaintParams | None) -> dict | None:
    if params is None:
        return None
    return {
        "seed": params.seed,
        "guidance": params.guidance,
        "strength": params.strength,
        "steps": params.steps,
    }


def _params_from(data: dict | None) -> InpaintParams | None:
    if data is None:
        return None
    return InpaintParams(
        seed=int(data["seed"]),
        guidance=float(data["guidance"]),
        strength=float(data["strength"]),
        steps=int(data["steps"]),
    )


class SessionStore:
    def __init__(self, data_dir, ttl_s: float | None = None, taxonomy: Taxonomy | None = None):
        self.root = Path(data_dir) / "sessions"
        self.root.mkdir(parents=True, exist_ok=True)
        self.ttl_s = ttl_s
        self.taxonomy = taxonomy or Taxonomy.default()
        self._cache: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._meta_lock = threading.Lock()

    # --- locking ---------------------------------------------------------

    def lock(self, session_id: str) -> threading.Lock:
        with self._meta_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    # --- persistence -----------------------------------------------------

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def save(self, session: Session) -> None:
        target = self._dir(session.id)
        tmp = self.root / f"{session.id}.tmp-{uuid.uuid4().hex[:8]}"
        tmp.mkdir(parents=True)
        try:
            self._write_session(session, tmp)
            old = self.root / f"{session.id}.old-{uuid.uuid4().hex[:8]}"
            if target.exists():
                target.rename(old)
                tmp.rename(target)
                shutil.rmtree(old, ignore_errors=True)
            else:
                tmp.rename(target)
        except Exception:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        self._cache[session.id] = session

    def _write_session(self, session: Session, directory: Path) -> None:
        (directory / "base.png").write_bytes(rgb_to_png(session.base_image))
        for index, image in enumerate(session.history):
            (directory / f"history_{index}.png").write_bytes(rgb_to_png(image))
        if session.segmentation is not None:
            (directory / "seg_labels.png").write_bytes(
                rgb_to_png(encode_segment_map(session.segmentation))
            )
            (directory / "seg_meta.json").write_text(
                json.dumps(segments_metadata(session.segmentation)), encoding="utf-8"
            )
        if session.prepared is not None:
            self._write_prepared(session.prepared, directory, "prepared")
        steps_meta = []
        for index, step in enumerate(session.steps):
            self._write_prepared(step.prepared, directory, f"step_{index}")
            steps_meta.append(
                {
                    "prompt": step.prompt,
                    "params": _params_dict(step.params),
                    "radius": step.prepared.radius,
                    "sigma": step.prepared.sigma,
                }
            )

        doc = {
            "version": STORE_VERSION,
            "id": session.id,
            "state": session.state.value,
            "created": session.created,
            "updated": session.updated,
            "segmented_at": session.segmented_at,
            "selection": session.selection,
            "prompt": session.prompt,
            "params": _params_dict(session.params),
            "history_len": len(session.history),
            "steps": steps_meta,
            "oplog": list(session.oplog),
            "allow_resegmentation": session.allow_resegmentation,
            "max_history": session.max_history,
            "prepared": None
            if session.prepared is None
            else {"radius": session.prepared.radius, "sigma": session.prepared.sigma},
        }
        (directory / "session.json").write_text(json.dumps(doc, indent=2), encoding="utf-8")

    def _write_prepared(self, prepared: PreparedMask, directory: Path, stem: str) -> None:
        (directory / f"{stem}_selected.png").write_bytes(mask_to_png(prepared.selected))
        (directory / f"{stem}_dilated.png").write_bytes(mask_to_png(prepared.dilated))
        (directory / f"{stem}_band.png").write_bytes(mask_to_png(prepared.band))
        np.save(directory / f"{stem}_alpha.npy", np.asarray(prepared.alpha))

    def _read_prepared(self, directory: Path, stem: str, radius: int, sigma: float) -> PreparedMask:
        return PreparedMask(
            selected=png_to_mask((directory / f"{stem}_selected.png").read_bytes()),
            dilated=png_to_mask((directory / f"{stem}_dilated.png").read_bytes()),
            band=png_to_mask((directory / f"{stem}_band.png").read_bytes()),
            alpha=np.load(directory / f"{stem}_alpha.npy"),
            radius=radius,
            sigma=sigma,
        )

    def load(self, session_id: str) -> Session:
        directory = self._dir(session_id)
        doc_path = directory / "session.json"
        if not doc_path.exists():
            raise KeyError(session_id)
        doc = json.loads(doc_path.read_text(encoding="utf-8"))

        segmentation = None
        if (directory / "seg_labels.png").exists():
            id_image = png_to_rgb((directory / "seg_labels.png").read_bytes())
            meta = json.loads((directory / "seg_meta.json").read_text(encoding="utf-8"))
            segmentation = decode_segment_map(id_image, meta, self.taxonomy)

        prepared = None
        if doc["prepared"] is not None:
            prepared = self._read_prepared(
                directory, "prepared", doc["prepared"]["radius"], doc["prepared"]["sigma"]
            )
        steps = []
        for index, meta in enumerate(doc["steps"]):
            steps.append(
                StepRecord(
                    prepared=self._read_prepared(
                        directory, f"step_{index}", int(meta["radius"]), float(meta["sigma"])
                    ),
                    prompt=meta["prompt"],
                    params=_params_from(meta["params"]),
                )
            )

        return Session(
            id=doc["id"],
            state=SessionState(doc["state"]),
            base_image=png_to_rgb((directory / "base.png").read_bytes()),
            segmentation=segmentation,
            segmented_at=doc["segmented_at"],
            selection=doc["selection"],
            prepared=prepared,
            prompt=doc["prompt"],
            params=_params_from(doc["params"]),
            history=tuple(
                png_to_rgb((directory / f"history_{i}.png").read_bytes())
                for i in range(doc["history_len"])
            ),
            steps=tuple(steps),
            oplog=tuple(doc["oplog"]),
            created=doc["created"],
            updated=doc["updated"],
            allow_resegmentation=doc["allow_resegmentation"],
            max_history=doc["max_history"],
        )

    # --- access ----------------------------------------------------------

    def get(self, session_id: str) -> Session:
        self._expire(session_id)
        if session_id in self._cache:
            return self._cache[session_id]
        session = self.load(session_id)
        self._cache[session_id] = session
        return session

    def update(self, session_id: str, fn) -> Session:
        """Apply `fn` to the session under its lock and persist the result."""
        with self.lock(session_id):
            session = self.get(session_id)
            new_session = fn(session)
            self.save(new_session)
            return new_session

    def add(self, session: Session) -> None:
        with self.lock(session.id):
            self.save(session)

    def delete(self, session_id: str) -> None:
        with self.lock(session_id):
            self._cache.pop(session_id, None)
            shutil.rmtree(self._dir(session_id), ignore_errors=True)

    def ids(self) -> list[str]:
        self.sweep()
        return sorted(
            p.name for p in self.root.iterdir()
            if p.is_dir() and "." not in p.name
        )

    # --- expiry ----------------------------------------------------------

    def _expired(self, updated: float) -> bool:
        return self.ttl_s is not None and updated + self.ttl_s < time.time()

    def _expire(self, session_id: str) -> None:
        if self.ttl_s is None:
            return
        session = self._cache.get(session_id)
        updated = None
        if session is not None:
            updated = session.updated
        else:
            doc_path = self._dir(session_id) / "session.json"
            if doc_path.exists():
                updated = json.loads(doc_path.read_text(encoding="utf-8"))["updated"]
        if updated is not None and self._expired(updated):
            self._cache.pop(session_id, None)
            shutil.rmtree(self._dir(session_id), ignore_errors=True)

    def sweep(self) -> int:
        """Drop expired sessions and stray temp dirs; returns removals."""
        removed = 0
        for path in list(self.root.iterdir()):
            if not path.is_dir():
                continue
            if ".tmp-" in path.name or ".old-" in path.name:
                shutil.rmtree(path, ignore_errors=True)
                removed += 1
                continue
            if self.ttl_s is None:
                continue
            doc_path = path / "session.json"
            try:
                updated = json.loads(doc_path.read_text(encoding="utf-8"))["updated"]
            except (OSError, ValueError, KeyError):
                continue
            if self._expired(updated):
                self._cache.pop(path.name, None)
                shutil.rmtree(path, ignore_errors=True)
                removed += 1
        return removed
