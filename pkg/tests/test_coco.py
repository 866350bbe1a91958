import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bracewatch.coco import (
    AnnotationSet,
    ImageInfo,
    UnitRegion,
    crop_unit,
    parse_coco,
    rasterize_polygon,
    serialize_coco,
    shoelace_area,
)
from bracewatch.errors import (
    DanglingImageRef,
    DegeneratePolygon,
    MalformedJson,
    MissingField,
    RegionOutsideImage,
    UnsupportedFormat,
)
from bracewatch.synth import ClutterParams, ScaffoldSpec, render_frame

from conftest import point_in_polygon

SQUARE_DOC = {
    "images": [{"id": 7, "file_name": "site.png", "width": 40, "height": 30}],
    "annotations": [
        {
            "id": 3,
            "image_id": 7,
            "category_id": 1,
            "bbox": [5, 6, 10, 10],
            "segmentation": [[5, 6, 15, 6, 15, 16, 5, 16]],
        }
    ],
    "categories": [{"id": 1, "name": "scaffold_unit"}],
}


def test_parse_empty_document():
    ann = parse_coco('{"images":[],"annotations":[],"categories":[]}')
    assert ann.images == [] and ann.regions == []


def test_parse_single_square():
    ann = parse_coco(json.dumps(SQUARE_DOC))
    assert ann.images == [ImageInfo(7, "site.png", 40, 30)]
    (region,) = ann.regions
    assert region.id == 3
    assert region.image_id == 7
    assert region.category == "scaffold_unit"
    assert region.polygon == ((5, 6), (15, 6), (15, 16), (5, 16))
    assert region.bbox == (5, 6, 10, 10)
    assert region.area == 100


def test_dangling_image_ref():
    doc = json.loads(json.dumps(SQUARE_DOC))
    doc["annotations"][0]["image_id"] = 99
    with pytest.raises(DanglingImageRef):
        parse_coco(json.dumps(doc))


def test_missing_field_is_named():
    doc = json.loads(json.dumps(SQUARE_DOC))
    del doc["annotations"][0]["bbox"]
    with pytest.raises(MissingField, match="bbox"):
        parse_coco(json.dumps(doc))
    with pytest.raises(MissingField, match="categories"):
        parse_coco('{"images": [], "annotations": []}')


def test_malformed_json():
    with pytest.raises(MalformedJson):
        parse_coco("{not json")


def test_other_categories_are_dropped_and_label_is_configurable():
    doc = json.loads(json.dumps(SQUARE_DOC))
    doc["categories"] = [{"id": 1, "name": "unit"}]
    assert parse_coco(json.dumps(doc)).regions == []
    assert len(parse_coco(json.dumps(doc), category="unit").regions) == 1


def test_rle_segmentation_rejected():
    doc = json.loads(json.dumps(SQUARE_DOC))
    doc["annotations"][0]["segmentation"] = {"counts": "abc", "size": [30, 40]}
    with pytest.raises(UnsupportedFormat, match="RLE"):
        parse_coco(json.dumps(doc))


def test_region_invariants():
    with pytest.raises(ValueError):
        UnitRegion(1, 1, ((0, 0), (1, 1)), (0, 0, 1, 1))
    with pytest.raises(ValueError):
        UnitRegion(1, 1, ((0, 0), (4, 0), (4, 4)), (0, 0, 0, 4))
    with pytest.raises(ValueError):
        UnitRegion(1, 1, ((0, 0), (9, 0), (9, 4)), (0, 0, 4, 4))
    # one pixel of annotation rounding is tolerated
    UnitRegion(1, 1, ((0, 0), (4.8, 0), (4.8, 4)), (0, 0, 4, 4))


def test_duplicate_ids_rejected():
    r = UnitRegion(1, 1, ((0, 0), (4, 0), (4, 4)), (0, 0, 4, 4))
    with pytest.raises(MalformedJson):
        AnnotationSet([ImageInfo(1, "a.png", 8, 8)], [r, r])


def test_synth_coco_round_trip():
    _, ann, _ = render_frame(ScaffoldSpec(), 3, 2, np.ones((2, 3)), ClutterParams(), seed=1)
    assert parse_coco(serialize_coco(ann)) == ann


# --- rasterization ----------------------------------------------------------------


def test_square_rasterizes_to_100_pixels():
    region = UnitRegion(1, 1, ((0, 0), (10, 0), (10, 10), (0, 10)), (0, 0, 10, 10))
    mask = rasterize_polygon(region, 20, 20)
    assert mask.area == 100
    assert mask.bbox == (0, 0, 9, 9)
    expected = np.array([[point_in_polygon(x + 0.5, y + 0.5, region.polygon) for x in range(20)] for y in range(20)])
    assert np.array_equal(mask.inside, expected)


def test_collinear_triangle_is_degenerate():
    region = UnitRegion(1, 1, ((0, 0), (5, 5), (10, 10)), (0, 0, 10, 10))
    with pytest.raises(DegeneratePolygon):
        rasterize_polygon(region, 20, 20)


def test_full_canvas_rectangle():
    region = UnitRegion(1, 1, ((0, 0), (37, 0), (37, 21), (0, 21)), (0, 0, 37, 21))
    assert rasterize_polygon(region, 37, 21).area == 37 * 21


def test_rasterize_with_crop_origin():
    region = UnitRegion(1, 1, ((5, 6), (15, 6), (15, 16), (5, 16)), (5, 6, 10, 10))
    mask = rasterize_polygon(region, 10, 10, origin=(5, 6))
    assert mask.area == 100


@st.composite
def polygons(draw, convex=False):
    n = draw(st.integers(3, 8))
    if convex:
        cx, cy = draw(st.floats(25, 35)), draw(st.floats(25, 35))
        r = draw(st.floats(12, 22))
        angles = sorted(draw(st.lists(st.floats(0, 2 * np.pi), min_size=n, max_size=n, unique=True)))
        pts = [(cx + r * np.cos(a), cy + r * np.sin(a)) for a in angles]
    else:
        pts = draw(st.lists(st.tuples(st.floats(0, 60), st.floats(0, 60)), min_size=n, max_size=n))
    return pts


@settings(max_examples=60, deadline=None)
@given(polygons())
def test_even_odd_matches_pixel_center_oracle(pts):
    xs, ys = zip(*pts)
    assume(max(xs) > min(xs) and max(ys) > min(ys))
    region = UnitRegion.from_polygon(1, 1, pts)
    try:
        mask = rasterize_polygon(region, 60, 60)
    except DegeneratePolygon:
        return
    expected = np.array([[point_in_polygon(x + 0.5, y + 0.5, region.polygon) for x in range(60)] for y in range(60)])
    assert np.array_equal(mask.inside, expected)


@settings(max_examples=60, deadline=None)
@given(polygons(convex=True))
def test_convex_area_within_two_percent(pts):
    area = abs(shoelace_area(pts))
    if area < 400:
        return
    mask = rasterize_polygon(UnitRegion.from_polygon(1, 1, pts), 60, 60)
    assert abs(mask.area - area) <= 0.02 * area


# --- cropping ---------------------------------------------------------------------


def _region(bbox):
    x, y, w, h = bbox
    return UnitRegion(1, 1, ((x, y), (x + w, y), (x + w, y + h), (x, y + h)), bbox)


def test_crop_full_image():
    img = np.arange(100, dtype=np.uint8).reshape(10, 10)
    crop, offset = crop_unit(img, _region((0, 0, 10, 10)))
    assert offset == (0, 0) and np.array_equal(crop, img)


def test_crop_definition():
    img = np.zeros((100, 100), np.uint8)
    crop, offset = crop_unit(img, _region((5, 5, 10, 10)))
    assert crop.shape == (10, 10) and offset == (5, 5)


def test_crop_straddling_right_edge(rng):
    img = rng.integers(0, 256, (50, 40)).astype(np.uint8)
    crop, offset = crop_unit(img, _region((30, 10, 20, 15)))
    assert offset == (30, 10)
    assert np.array_equal(crop, img[10:25, 30:40])


def test_crop_outside_image():
    with pytest.raises(RegionOutsideImage):
        crop_unit(np.zeros((10, 10), np.uint8), _region((20, 20, 5, 5)))


@given(st.integers(-20, 60), st.integers(-20, 60), st.integers(1, 40), st.integers(1, 40))
def test_crop_coordinates_map_back_inside(x, y, w, h):
    img = np.zeros((40, 50), np.uint8)
    try:
        crop, (ox, oy) = crop_unit(img, _region((x, y, w, h)))
    except RegionOutsideImage:
        assert x + w <= 0 or y + h <= 0 or x >= 50 or y >= 40
        return
    ch, cw = crop.shape
    for lx, ly in ((0, 0), (cw - 1, ch - 1)):
        assert 0 <= lx + ox < 50 and 0 <= ly + oy < 40
