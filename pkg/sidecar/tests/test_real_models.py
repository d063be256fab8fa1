"""Real-checkpoint smoke tests: run when models load, skip when absent.

Loading needs the optional `models` extra plus downloadable (or cached)
checkpoint weights; on machines without them every test here skips.
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from inference_sidecar.codecs import b64_png_to_rgb, rgb_to_b64_png
from inference_sidecar.config import DEFAULT_MODELS
from inference_sidecar.server import create_app


def _try_load(name):
    from inference_sidecar.models import LOADERS

    try:
        return LOADERS[name](DEFAULT_MODELS[name], "cpu")
    except Exception as exc:
        pytest.skip(f"{name} model unavailable: {exc}")


def scene(h=64, w=64):
    yy, xx = np.mgrid[0:h, 0:w]
    return np.stack([(xx * 4) % 256, (yy * 4) % 256, 128 + 0 * xx], axis=-1).astype(np.uint8)


@pytest.mark.slow
class TestRealSegmenter:
    def test_labels_cover_image_and_metadata_is_complete(self):
        segmenter = _try_load("segment")
        labels, segments = segmenter.segment(scene())
        assert labels.shape == (64, 64)
        meta_ids = {s["id"] for s in segments}
        assert set(np.unique(labels).tolist()) <= meta_ids
        for s in segments:
            assert s["kind"] in ("thing", "stuff")


@pytest.mark.slow
class TestRealEmbedder:
    def test_unit_norm_and_shared_dim(self):
        embedder = _try_load("embed")
        text_vec = np.asarray(embedder.embed_text("a glass building"))
        image_vec = np.asarray(embedder.embed_image(scene()))
        assert text_vec.shape == image_vec.shape
        assert abs(np.linalg.norm(text_vec) - 1.0) <= 1e-5
        assert abs(np.linalg.norm(image_vec) - 1.0) <= 1e-5


@pytest.mark.slow
class TestRealInpainter:
    def test_output_dimensions(self):
        inpainter = _try_load("inpaint")
        image = scene()
        mask = np.zeros((64, 64), dtype=bool)
        mask[16:48, 16:48] = True
        out = inpainter.inpaint(image, mask, "a small garden", 7, 7.5, 1.0, 2)
        assert out.shape == image.shape


@pytest.mark.slow
class TestServedRealModels:
    def test_contract_over_http(self):
        segmenter = _try_load("segment")
        client = TestClient(create_app({"segment": segmenter}))
        r = client.post("/v1/segment", json={"image": rgb_to_b64_png(scene())})
        assert r.status_code == 200
        assert b64_png_to_rgb(r.json()["id_image"]).shape == (64, 64, 3)
