import json
from pathlib import Path

import numpy as np
import pytest

from urbanscape import pipeline
from urbanscape.backends import InpaintParams, make_stub_suite
from urbanscape.cli import main
from urbanscape.hashing import image_digest
from urbanscape.rasters import png_to_rgb, rgb_to_png


def write_street_image(path: Path, side=64) -> np.ndarray:
    yy, xx = np.mgrid[0:side, 0:side]
    img = np.stack([(xx * 7) % 239, (yy * 3) % 239, (xx + 2 * yy) % 239], axis=-1).astype(np.uint8)
    path.write_bytes(rgb_to_png(img))
    return img


class TestSegmentCommand:
    def test_writes_interchange_pair(self, tmp_path, capsys):
        image = tmp_path / "scene.png"
        write_street_image(image)
        out = tmp_path / "map"
        code = main(["segment", "--image", str(image), "--grid", "2", "--out", str(out)])
        assert code == 0
        assert (out / "id_map.png").exists() and (out / "segments.json").exists()
        meta = json.loads((out / "segments.json").read_text())
        assert {e["id"] for e in meta} == {1, 2, 3, 4}


class TestEditCommand:
    def test_matches_direct_pipeline_digest(self, tmp_path, capsys):
        image_path = tmp_path / "scene.png"
        img = write_street_image(image_path)
        out = tmp_path / "result.png"
        code = main(
            [
                "edit",
                "--image", str(image_path),
                "--click", "40,40",
                "--prompt", "a grassy surface",
                "--seed", "7",
                "--grid", "2",
                "--out", str(out),
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out.strip()

        suite = make_stub_suite(grid=2)
        s = pipeline.create_session(img)
        s = pipeline.run_segmentation(s, suite.segmentation)
        s = pipeline.select_segment(s, 40, 40)
        s = pipeline.prepare_mask(s)
        s = pipeline.reconstruct(s, "a grassy surface", InpaintParams(seed=7), suite.inpainting)
        expected = image_digest(pipeline.working_image(s))

        assert printed == expected
        assert image_digest(png_to_rgb(out.read_bytes())) == expected

    def test_export_directory(self, tmp_path):
        image_path = tmp_path / "scene.png"
        write_street_image(image_path)
        code = main(
            [
                "edit",
                "--image", str(image_path),
                "--click", "1,1",
                "--prompt", "p",
                "--seed", "1",
                "--out", str(tmp_path / "r.png"),
                "--export", str(tmp_path / "proj"),
            ]
        )
        assert code == 0
        assert (tmp_path / "proj" / "manifest.json").exists()

    def test_bad_click_is_domain_error(self, tmp_path, capsys):
        image_path = tmp_path / "scene.png"
        write_street_image(image_path)
        code = main(
            ["edit", "--image", str(image_path), "--click", "oops",
             "--prompt", "p", "--seed", "1", "--out", str(tmp_path / "r.png")]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_missing_file_is_error(self, tmp_path, capsys):
        code = main(
            ["edit", "--image", str(tmp_path / "nope.png"), "--click", "1,1",
             "--prompt", "p", "--seed", "1", "--out", str(tmp_path / "r.png")]
        )
        assert code == 1

    def test_bad_radius_is_domain_error(self, tmp_path, capsys):
        image_path = tmp_path / "scene.png"
        write_street_image(image_path)
        code = main(
            ["edit", "--image", str(image_path), "--click", "1,1", "--radius", "0",
             "--prompt", "p", "--seed", "1", "--out", str(tmp_path / "r.png")]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestEvalIouCommand:
    def test_identical_maps_print_ones(self, tmp_path, capsys):
        image_path = tmp_path / "scene.png"
        write_street_image(image_path)
        out = tmp_path / "map"
        main(["segment", "--image", str(image_path), "--grid", "2", "--out", str(out)])
        capsys.readouterr()
        code = main(
            ["eval", "iou", "--pred", str(out), "--truth", str(out), "--per-category"]
        )
        assert code == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
        assert all(line.endswith("1.000") for line in lines)
        assert len(lines) >= 2  # at least one category plus the mean


class TestCampaignCommand:
    def test_writes_csv_and_digest(self, tmp_path, capsys):
        spec = {
            "categories": ["Buildings"],
            "images_per_category": 2,
            "iterations": 3,
            "prompt_bank": {"Buildings": ["a glass building"]},
            "seed": 11,
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        out = tmp_path / "report.csv"
        code = main(["eval", "campaign", "--spec", str(spec_path), "--out", str(out)])
        assert code == 0
        digest = capsys.readouterr().out.strip()
        assert len(digest) == 64
        assert "clip_mean,Buildings,2" in out.read_text()


class TestReportCommand:
    def test_round_trip_render(self, tmp_path, capsys):
        spec = {
            "categories": ["Vehicles"],
            "images_per_category": 1,
            "iterations": 2,
            "prompt_bank": {"Vehicles": ["a car"]},
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        csv_path = tmp_path / "r.csv"
        main(["eval", "campaign", "--spec", str(spec_path), "--out", str(csv_path)])
        capsys.readouterr()
        code = main(["report", "--in", str(csv_path), "--format", "table"])
        assert code == 0
        out = capsys.readouterr().out
        assert "Vehicles" in out and "1.000" in out


class TestUsageErrors:
    def test_unknown_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["edit", "--frobnicate"])
        assert exc.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["demolish"])
        assert exc.value.code == 2

    def test_no_arguments_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
