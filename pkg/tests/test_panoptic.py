import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urbanscape.errors import (
    DimensionMismatch,
    EmptyImage,
    IdOverflow,
    InvalidSegmentMap,
    OutOfBounds,
    UnknownClassName,
    UnknownSegmentId,
)
from urbanscape.panoptic import (
    Category,
    SegmentInfo,
    SegmentMap,
    Taxonomy,
    decode_segment_map,
    encode_segment_map,
    extract_mask,
    render_overlay,
    segment_at,
    segments_metadata,
)

TAX = Taxonomy.default()


def uniform_map(value=7, shape=(6, 6), class_name="car"):
    labels = np.full(shape, value, dtype=np.uint32)
    info = SegmentInfo(value, class_name, TAX.category_of(class_name), "thing", shape[0] * shape[1])
    return SegmentMap(labels=labels, segments=(info,))


def two_region_map(width=8, height=4):
    labels = np.zeros((height, width), dtype=np.uint32)
    labels[:, : width // 2] = 1
    labels[:, width // 2:] = 2
    half = height * width // 2
    return SegmentMap(
        labels=labels,
        segments=(
            SegmentInfo(1, "road", Category.ROADS_PAVEMENTS, "stuff", half),
            SegmentInfo(2, "building", Category.BUILDINGS, "stuff", half),
        ),
    )


def meta(*entries):
    return [{"id": i, "class_name": c, "kind": k} for i, c, k in entries]


class TestTaxonomy:
    def test_default_covers_street_classes(self):
        assert TAX.category_of("car") is Category.VEHICLES
        assert TAX.category_of("sky") is Category.NATURAL_ELEMENTS
        assert TAX.category_of("wall") is Category.BUILDINGS
        assert TAX.category_of("fence") is Category.STREET_FURNITURE
        assert TAX.category_of("bicycle") is Category.PEDESTRIANS_BICYCLES

    def test_unknown_class_raises(self):
        with pytest.raises(UnknownClassName):
            TAX.category_of("zeppelin")

    def test_parse_rejects_bad_lines(self):
        with pytest.raises(ValueError):
            Taxonomy.parse("road RoadsPavements")  # no tab
        with pytest.raises(ValueError):
            Taxonomy.parse("road\tNotACategory")

    def test_parse_roundtrip_with_comments(self):
        tax = Taxonomy.parse("# comment\nroad\tRoadsPavements\n\ncar\tVehicles\n")
        assert tax.class_names == ["road", "car"]


class TestDecode:
    def test_zero_pixel_is_id_zero(self):
        image = np.zeros((1, 1, 3), dtype=np.uint8)
        decoded = decode_segment_map(image, meta((0, "road", "stuff")))
        assert decoded.labels[0, 0] == 0

    def test_green_one_is_id_256(self):
        # base-256 by hand: R + 256*G + 65536*B = 0 + 256*1 + 0
        image = np.zeros((1, 1, 3), dtype=np.uint8)
        image[0, 0] = (0, 1, 0)
        decoded = decode_segment_map(image, meta((256, "car", "thing")))
        assert decoded.labels[0, 0] == 256

    def test_missing_metadata_id(self):
        image = np.zeros((2, 2, 3), dtype=np.uint8)
        with pytest.raises(UnknownSegmentId):
            decode_segment_map(image, meta((5, "road", "stuff")))

    def test_extra_metadata_dropped(self):
        image = np.zeros((2, 2, 3), dtype=np.uint8)
        decoded = decode_segment_map(
            image, meta((0, "road", "stuff"), (9, "car", "thing"))
        )
        assert decoded.ids == [0]

    def test_pixel_counts_recomputed(self):
        decoded = decode_segment_map(
            encode_segment_map(two_region_map()),
            meta((1, "road", "stuff"), (2, "building", "stuff")),
        )
        assert [s.pixel_count for s in decoded.segments] == [16, 16]

    def test_empty_image(self):
        with pytest.raises(EmptyImage):
            decode_segment_map(np.zeros((0, 4, 3), dtype=np.uint8), [])


class TestEncode:
    def test_all_zero_ids_black(self):
        raster = encode_segment_map(uniform_map(0, class_name="road"))
        assert raster.shape == (6, 6, 3)
        assert not raster.any()

    def test_id_65536_is_blue_one(self):
        raster = encode_segment_map(uniform_map(65536))
        assert tuple(raster[0, 0]) == (0, 0, 1)

    def test_overflow(self):
        labels = np.full((1, 1), 2, dtype=np.uint64)
        good = SegmentMap(labels=labels, segments=(SegmentInfo(2, "car", Category.VEHICLES, "thing", 1),))
        object.__setattr__(good, "labels", np.full((1, 1), 256 ** 3, dtype=np.uint32))
        with pytest.raises(IdOverflow):
            encode_segment_map(good)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_codec_round_trip_property(data):
    h = data.draw(st.integers(1, 16))
    w = data.draw(st.integers(1, 16))
    seed = data.draw(st.integers(0, 2 ** 31))
    rng = np.random.default_rng(seed)
    # include large ids so all three channels carry information
    palette = rng.integers(0, 256 ** 3, size=4, dtype=np.uint32)
    labels = palette[rng.integers(0, 4, size=(h, w))]
    names = ["road", "car", "sky", "person"]
    segments = tuple(
        SegmentInfo(int(i), names[k], TAX.category_of(names[k]), "stuff",
                    int((labels == i).sum()))
        for k, i in enumerate(np.unique(palette))
        if (labels == i).any()
    )
    m = SegmentMap(labels=labels, segments=segments)
    again = decode_segment_map(encode_segment_map(m), segments_metadata(m))
    assert np.array_equal(again.labels, m.labels)


class TestSegmentAt:
    def test_uniform(self):
        assert segment_at(uniform_map(7), 3, 3) == 7

    def test_out_of_bounds(self):
        m = uniform_map(7)
        with pytest.raises(OutOfBounds):
            segment_at(m, m.width, 0)
        with pytest.raises(OutOfBounds):
            segment_at(m, 0, -1)

    def test_two_region_right_half(self):
        m = two_region_map(width=8)
        assert segment_at(m, 6, 1) == 2
        assert segment_at(m, 1, 1) == 1

    def test_consistent_with_extract(self, rng):
        m = two_region_map()
        for _ in range(10):
            x = int(rng.integers(0, m.width))
            y = int(rng.integers(0, m.height))
            assert extract_mask(m, segment_at(m, x, y))[y, x]


class TestExtractMask:
    def test_uniform_all_true(self):
        mask = extract_mask(uniform_map(7), 7)
        assert mask.all()

    def test_unknown_id(self):
        with pytest.raises(UnknownSegmentId):
            extract_mask(uniform_map(7), 9)

    def test_half_plane_popcount(self):
        m = two_region_map(width=8, height=4)
        assert extract_mask(m, 1).sum() == 8 * 4 // 2


class TestPartition:
    def test_counts_sum_to_area(self):
        m = two_region_map()
        assert sum(s.pixel_count for s in m.segments) == m.width * m.height

    def test_masks_disjoint_union_full(self):
        m = two_region_map()
        total = np.zeros((m.height, m.width), dtype=int)
        for seg_id in m.ids:
            total += extract_mask(m, seg_id).astype(int)
        assert (total == 1).all()

    def test_invalid_maps_rejected(self):
        labels = np.zeros((2, 2), dtype=np.uint32)
        with pytest.raises(InvalidSegmentMap):
            SegmentMap(labels=labels, segments=())  # id 0 has no metadata
        with pytest.raises(InvalidSegmentMap):
            SegmentMap(
                labels=labels,
                segments=(SegmentInfo(0, "road", Category.ROADS_PAVEMENTS, "stuff", 3),),
            )  # wrong count
        with pytest.raises(InvalidSegmentMap):
            SegmentMap(labels=np.zeros((0, 2), dtype=np.uint32), segments=())


class TestRenderOverlay:
    def test_alpha_zero_identity(self, street_image):
        m = uniform_map(7, shape=street_image.shape[:2])
        out = render_overlay(street_image, m, alpha=0.0)
        assert np.array_equal(out, street_image)

    def test_alpha_one_pure_palette(self, street_image):
        m = uniform_map(7, shape=street_image.shape[:2], class_name="car")
        out = render_overlay(street_image, m, alpha=1.0)
        assert (out == np.array([0, 0, 142], dtype=np.uint8)).all()

    def test_midpoint_blend_rounds_half_up(self):
        image = np.full((2, 2, 3), 100, dtype=np.uint8)
        m = uniform_map(1, shape=(2, 2), class_name="car")
        out = render_overlay(image, m, palette={Category.VEHICLES: (200, 200, 201)}, alpha=0.5)
        assert tuple(out[0, 0]) == (150, 150, 151)  # 150.5 rounds up

    def test_dimension_mismatch(self, street_image):
        m = uniform_map(7, shape=(4, 4))
        with pytest.raises(DimensionMismatch):
            render_overlay(street_image, m)
