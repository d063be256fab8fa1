"""Sidecar configuration: listen address, device, and model checkpoints."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_MODELS = {
    "segment": "shi-labs/oneformer_cityscapes_swin_large",
    "inpaint": "diffusers/stable-diffusion-xl-1.0-inpainting-0.1",
    "embed": "openai/clip-vit-base-patch32",
}


@dataclass
class SidecarConfig:
    listen: str = "127.0.0.1:9090"
    device: str = "cpu"
    models: dict = field(default_factory=lambda: dict(DEFAULT_MODELS))
    # empty string disables a capability without editing the model table
    workers: int = 1

    @classmethod
    def from_file(cls, path) -> "SidecarConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        merged = dict(DEFAULT_MODELS)
        merged.update(doc.get("models", {}))
        return cls(
            listen=doc.get("listen", cls.listen),
            device=doc.get("device", cls.device),
            models=merged,
            workers=int(doc.get("workers", cls.workers)),
        )

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])
