"""Protocol wiring tests with lightweight fake models (no weights needed).

These mirror the checks the workstation's contract suite runs against a
live server: response schema, raster encoding, dimension preservation,
unit-norm embeddings, and the error body shape.
"""
import base64
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from inference_sidecar.codecs import b64_png_to_rgb, ids_to_rgb, rgb_to_b64_png
from inference_sidecar.server import create_app


class FakeSegmenter:
    def segment(self, image):
        h, w = image.shape[:2]
        labels = np.zeros((h, w), dtype=np.uint32)
        labels[:, w // 2:] = 1
        labels[h // 2:, : w // 2] = 70000  # force a multi-byte id
        segments = [
            {"id": 0, "class_name": "building", "kind": "stuff"},
            {"id": 1, "class_name": "road", "kind": "stuff"},
            {"id": 70000, "class_name": "car", "kind": "thing"},
        ]
        return labels, segments


class FakeInpainter:
    def inpaint(self, image, mask, prompt, seed, guidance, strength, steps):
        out = image.copy()
        out[mask] = (seed % 256, (seed // 256) % 256, 200)
        return out


class FakeEmbedder:
    dim = 16

    def _vec(self, value: float):
        raw = np.cos(np.arange(self.dim) * value + 1.0)
        return [float(v) for v in raw / np.linalg.norm(raw)]

    def embed_text(self, text):
        return self._vec(float(len(text) + 1))

    def embed_image(self, image):
        return self._vec(float(image.mean()) + 0.5)


def b64_image(h=32, w=48, value=90):
    arr = np.full((h, w, 3), value, dtype=np.uint8)
    return rgb_to_b64_png(arr)


def b64_mask(h=32, w=48, filled=True):
    arr = np.zeros((h, w), dtype=np.uint8)
    if filled:
        arr[8:24, 8:40] = 255
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


@pytest.fixture
def client():
    app = create_app(
        {"segment": FakeSegmenter(), "inpaint": FakeInpainter(), "embed": FakeEmbedder()}
    )
    return TestClient(app)


class TestHealth:
    def test_reports_loaded_capabilities(self, client):
        body = client.get("/v1/health").json()
        assert body["ok"] is True
        assert body["capabilities"] == {"segment": True, "inpaint": True, "embed": True}

    def test_reports_absent_capabilities(self):
        client = TestClient(create_app({"segment": None, "inpaint": None, "embed": None}))
        body = client.get("/v1/health").json()
        assert body["capabilities"] == {"segment": False, "inpaint": False, "embed": False}


class TestSegmentEndpoint:
    def test_schema_and_id_encoding(self, client):
        r = client.post("/v1/segment", json={"image": b64_image()})
        assert r.status_code == 200
        body = r.json()
        id_image = b64_png_to_rgb(body["id_image"])
        assert id_image.shape == (32, 48, 3)
        ids = (
            id_image[:, :, 0].astype(np.uint32)
            + 256 * id_image[:, :, 1].astype(np.uint32)
            + 65536 * id_image[:, :, 2].astype(np.uint32)
        )
        raster_ids = set(np.unique(ids).tolist())
        assert raster_ids == {0, 1, 70000}
        # every raster id carries metadata with class and kind
        meta_ids = {s["id"] for s in body["segments"]}
        assert raster_ids <= meta_ids
        for s in body["segments"]:
            assert s["class_name"] and s["kind"] in ("thing", "stuff")

    def test_bad_image_is_bad_request(self, client):
        r = client.post("/v1/segment", json={"image": "@@@"})
        assert r.status_code == 400
        assert r.json()["code"] == "bad_request"

    def test_unsupported_when_model_missing(self):
        client = TestClient(create_app({"segment": None}))
        r = client.post("/v1/segment", json={"image": b64_image()})
        assert r.status_code == 501
        assert r.json()["code"] == "unsupported"


class TestInpaintEndpoint:
    def test_dimensions_preserved_and_seed_honored(self, client):
        body = {
            "image": b64_image(), "mask": b64_mask(), "prompt": "x", "seed": 1234,
        }
        a = client.post("/v1/inpaint", json=body)
        b = client.post("/v1/inpaint", json=body)
        assert a.status_code == 200
        out_a = b64_png_to_rgb(a.json()["image"])
        out_b = b64_png_to_rgb(b.json()["image"])
        assert out_a.shape == (32, 48, 3)
        assert np.array_equal(out_a, out_b)  # same seed, same bytes

    def test_dimension_mismatch_rejected(self, client):
        r = client.post(
            "/v1/inpaint",
            json={"image": b64_image(32, 48), "mask": b64_mask(16, 16), "prompt": "x", "seed": 1},
        )
        assert r.status_code == 400

    def test_missing_fields_rejected(self, client):
        r = client.post("/v1/inpaint", json={"image": b64_image()})
        assert r.status_code == 400


class TestEmbedEndpoint:
    def test_text_unit_norm_and_dim(self, client):
        r = client.post("/v1/embed", json={"kind": "text", "text": "a glass building"})
        assert r.status_code == 200
        body = r.json()
        values = np.asarray(body["values"])
        assert body["dim"] == len(values) == 16
        assert abs(np.linalg.norm(values) - 1.0) <= 1e-6

    def test_image_branch(self, client):
        r = client.post("/v1/embed", json={"kind": "image", "image": b64_image()})
        assert r.status_code == 200
        assert r.json()["dim"] == 16

    def test_unknown_kind_rejected(self, client):
        r = client.post("/v1/embed", json={"kind": "audio"})
        assert r.status_code == 400
        assert r.json()["code"] == "bad_request"


class TestCodecs:
    def test_ids_round_trip_through_rgb(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(0, 256 ** 3, size=(9, 7), dtype=np.uint32)
        rgb = ids_to_rgb(labels)
        back = (
            rgb[:, :, 0].astype(np.uint32)
            + 256 * rgb[:, :, 1].astype(np.uint32)
            + 65536 * rgb[:, :, 2].astype(np.uint32)
        )
        assert np.array_equal(back, labels)

    def test_id_overflow_rejected(self):
        with pytest.raises(ValueError):
            ids_to_rgb(np.full((2, 2), 256 ** 3, dtype=np.uint64))

    def test_internal_error_shape(self):
        class Broken:
            def segment(self, image):
                raise RuntimeError("cuda out of memory")

        client = TestClient(create_app({"segment": Broken()}))
        r = client.post("/v1/segment", json={"image": b64_image()})
        assert r.status_code == 500
        assert r.json()["code"] == "internal"
