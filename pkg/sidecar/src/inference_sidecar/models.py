"""Capability wrappers around real checkpoints.

Each capability is a small class holding already-loaded model objects, so
the HTTP layer can be exercised with fakes; the `load_*` functions do the
heavy imports and downloads and raise on any failure (the server treats
that capability as absent).

Checkpoint roles: a universal/panoptic segmenter fine-tuned on urban street
scenes, a diffusion inpainting pipeline conditioned on mask + prompt, and a
joint image/text embedder. Publicly available checkpoints stand in for any
privately fine-tuned ones.
"""
from __future__ import annotations

import logging

import numpy as np
from PIL import Image

log = logging.getLogger("sidecar")

# countable street-scene classes; everything else reports as stuff
THING_CLASSES = {
    "person", "rider", "car", "truck", "bus", "train", "motorcycle", "bicycle",
}


class PanopticSegmenter:
    """Per-pixel segment ids plus {id, class_name, kind} metadata."""

    def __init__(self, processor, model, device: str, id2label: dict[int, str]):
        self.processor = processor
        self.model = model
        self.device = device
        self.id2label = {int(k): str(v).lower() for k, v in id2label.items()}

    def segment(self, image: np.ndarray) -> tuple[np.ndarray, list[dict]]:
        import torch

        pil = Image.fromarray(image, mode="RGB")
        inputs = self.processor(
            images=pil, task_inputs=["panoptic"], return_tensors="pt"
        ).to(self.device)
        with torch.no_grad():
            outputs = self.model(**inputs)
        result = self.processor.post_process_panoptic_segmentation(
            outputs, target_sizes=[image.shape[:2]]
        )[0]
        labels = result["segmentation"].cpu().numpy().astype(np.int64)
        labels[labels < 0] = 0
        segments = []
        seen = set()
        for info in result["segments_info"]:
            class_name = self.id2label.get(int(info["label_id"]), "terrain")
            segments.append(
                {
                    "id": int(info["id"]),
                    "class_name": class_name,
                    "kind": "thing" if class_name in THING_CLASSES else "stuff",
                }
            )
            seen.add(int(info["id"]))
        # pixels the post-processing left unlabeled still need metadata;
        # report them as terrain (least-specific stuff class)
        for raster_id in np.unique(labels):
            if int(raster_id) not in seen:
                segments.append(
                    {"id": int(raster_id), "class_name": "terrain", "kind": "stuff"}
                )
        return labels.astype(np.uint32), segments


class DiffusionInpainter:
    """Mask-and-prompt-conditioned regeneration at the caller's resolution.

    The pipeline runs at a model-friendly resolution (multiples of 8) and
    the result is resampled back, so callers always get their own
    dimensions; resizing is backend-internal.
    """

    def __init__(self, pipeline, device: str):
        self.pipeline = pipeline
        self.device = device

    def inpaint(
        self, image: np.ndarray, mask: np.ndarray, prompt: str,
        seed: int, guidance: float, strength: float, steps: int,
    ) -> np.ndarray:
        import torch

        h, w = image.shape[:2]
        rw, rh = max(8, (w // 8) * 8), max(8, (h // 8) * 8)
        pil_image = Image.fromarray(image, mode="RGB").resize((rw, rh), Image.LANCZOS)
        pil_mask = Image.fromarray(
            np.where(mask, np.uint8(255), np.uint8(0)), mode="L"
        ).resize((rw, rh), Image.NEAREST)
        generator = torch.Generator(self.device).manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
        result = self.pipeline(
            prompt=prompt,
            image=pil_image,
            mask_image=pil_mask,
            guidance_scale=guidance,
            strength=strength,
            num_inference_steps=steps,
            generator=generator,
            width=rw,
            height=rh,
        ).images[0]
        if result.size != (w, h):
            result = result.resize((w, h), Image.LANCZOS)
        return np.asarray(result.convert("RGB"), dtype=np.uint8)


class JointEmbedder:
    """Unit-norm feature vectors from a shared image/text space."""

    def __init__(self, processor, model, device: str):
        self.processor = processor
        self.model = model
        self.device = device
        self.dim = int(model.config.projection_dim)

    def _normalize(self, tensor) -> list[float]:
        vector = tensor[0]
        vector = vector / vector.norm()
        return [float(v) for v in vector.cpu().tolist()]

    def embed_text(self, text: str) -> list[float]:
        import torch

        inputs = self.processor(
            text=[text], return_tensors="pt", padding=True, truncation=True
        ).to(self.device)
        with torch.no_grad():
            features = self.model.get_text_features(**inputs)
        return self._normalize(features)

    def embed_image(self, image: np.ndarray) -> list[float]:
        import torch

        inputs = self.processor(
            images=Image.fromarray(image, mode="RGB"), return_tensors="pt"
        ).to(self.device)
        with torch.no_grad():
            features = self.model.get_image_features(**inputs)
        return self._normalize(features)


# --- loaders -------------------------------------------------------------

def load_segmenter(model_id: str, device: str) -> PanopticSegmenter:
    from transformers import AutoModelForUniversalSegmentation, AutoProcessor

    processor = AutoProcessor.from_pretrained(model_id)
    model = AutoModelForUniversalSegmentation.from_pretrained(model_id).to(device).eval()
    return PanopticSegmenter(processor, model, device, model.config.id2label)


def load_inpainter(model_id: str, device: str) -> DiffusionInpainter:
    import torch
    from diffusers import AutoPipelineForInpainting

    dtype = torch.float16 if device.startswith("cuda") else torch.float32
    pipeline = AutoPipelineForInpainting.from_pretrained(model_id, torch_dtype=dtype)
    pipeline = pipeline.to(device)
    return DiffusionInpainter(pipeline, device)


def load_embedder(model_id: str, device: str) -> JointEmbedder:
    from transformers import CLIPModel, CLIPProcessor

    processor = CLIPProcessor.from_pretrained(model_id)
    model = CLIPModel.from_pretrained(model_id).to(device).eval()
    return JointEmbedder(processor, model, device)


LOADERS = {
    "segment": load_segmenter,
    "inpaint": load_inpainter,
    "embed": load_embedder,
}


def load_capabilities(models: dict[str, str], device: str) -> dict[str, object]:
    """Best-effort load of every configured capability; missing stay None."""
    loaded: dict[str, object] = {"segment": None, "inpaint": None, "embed": None}
    for name, loader in LOADERS.items():
        model_id = models.get(name, "")
        if not model_id:
            log.info("capability %s disabled by config", name)
            continue
        try:
            loaded[name] = loader(model_id, device)
            log.info("capability %s ready (%s)", name, model_id)
        except Exception as exc:
            log.warning("capability %s unavailable: %s", name, exc)
    return loaded
