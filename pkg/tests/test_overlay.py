import numpy as np

from bracewatch.brace import IntersectionPoint, UnitVerdict
from bracewatch.hough import PolarLine
from bracewatch.overlay import (
    LINE_COLOR,
    MISSING_COLOR,
    POINT_COLOR,
    PRESENT_COLOR,
    clip_segment,
    draw_overlay,
)


def test_no_verdicts_is_gray_promoted_to_rgb(rng):
    img = rng.integers(0, 256, (12, 9)).astype(np.uint8)
    out = draw_overlay(img, [])
    assert out.shape == (12, 9, 3)
    assert all(np.array_equal(out[..., k], img) for k in range(3))
    rgb = rng.integers(0, 256, (4, 4, 3)).astype(np.uint8)
    assert np.array_equal(draw_overlay(rgb, []), rgb)


def test_single_intersection_disc():
    img = np.zeros((40, 40), np.uint8)
    verdict = UnitVerdict(1, True, (IntersectionPoint(20.5, 20.5),), central_hits=1)
    out = draw_overlay(img, [verdict])
    disc = np.all(out == POINT_COLOR, axis=2)
    yy, xx = np.mgrid[:40, :40]
    assert np.array_equal(disc, (xx - 20) ** 2 + (yy - 20) ** 2 <= 16)


def test_bbox_outline_colour_follows_verdict():
    img = np.full((30, 30), 200, np.uint8)
    missing = draw_overlay(img, [UnitVerdict(1, False, bbox=(5, 5, 10, 10))])
    assert tuple(missing[5, 5]) == MISSING_COLOR and tuple(missing[14, 14]) == MISSING_COLOR
    assert tuple(missing[10, 10]) == (200, 200, 200)
    present = draw_overlay(img, [UnitVerdict(1, True, bbox=(5, 5, 10, 10))])
    assert tuple(present[5, 10]) == PRESENT_COLOR


def test_lines_stay_inside_their_unit():
    img = np.zeros((30, 60), np.uint8)
    # global COCO line x = 10.5 is the centre of pixel column 10
    verdict = UnitVerdict(1, False, bbox=(0, 0, 30, 30), lines=(PolarLine(10.5, 0.0),))
    out = draw_overlay(img, [verdict])
    blue = np.all(out == LINE_COLOR, axis=2)
    assert blue[1:29, 10].all()
    assert not blue[:, 30:].any()


def test_clip_segment():
    assert clip_segment((-10, 5), (20, 5), (0, 0, 9, 9)) == ((0, 5), (9, 5))
    assert clip_segment((-10, 20), (20, 20), (0, 0, 9, 9)) is None
