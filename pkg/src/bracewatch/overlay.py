"""Debug overlays: detected lines, intersection discs and verdict-colored unit outlines."""

from __future__ import annotations

import math

import numpy as np

from ._validation import check_gray_image, check_rgb_image
from .coco import bbox_pixel_window
from .hough import line_to_segment

LINE_COLOR = (0, 0, 255)
POINT_COLOR = (255, 255, 0)
PRESENT_COLOR = (0, 255, 0)
MISSING_COLOR = (255, 0, 0)
POINT_RADIUS = 4
SEGMENT_HALF_EXTENT = 1000.0


def _as_rgb(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim == 2:
        return np.repeat(check_gray_image(arr)[:, :, None], 3, axis=2)
    return check_rgb_image(arr).copy()


def clip_segment(p0, p1, box):
    """Liang-Barsky clip of segment p0-p1 to ``box = (xmin, ymin, xmax, ymax)``; None if outside."""
    (x0, y0), (x1, y1) = p0, p1
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0 - box[0]), (dx, box[2] - x0), (-dy, y0 - box[1]), (dy, box[3] - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    return (x0 + t0 * dx, y0 + t0 * dy), (x0 + t1 * dx, y0 + t1 * dy)


def _draw_segment(rgb, p0, p1, color):
    (x0, y0), (x1, y1) = p0, p1
    n = int(math.ceil(max(abs(x1 - x0), abs(y1 - y0)))) + 1
    xs = np.rint(np.linspace(x0, x1, n)).astype(np.int64)
    ys = np.rint(np.linspace(y0, y1, n)).astype(np.int64)
    h, w = rgb.shape[:2]
    ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    rgb[ys[ok], xs[ok]] = color


def draw_disc(rgb, cx: int, cy: int, radius: int, color):
    h, w = rgb.shape[:2]
    yy, xx = np.ogrid[:h, :w]
    rgb[(xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius] = color


def draw_rect_outline(rgb, x0, y0, x1, y1, color):
    """Outline of the inclusive pixel rectangle [x0, x1] x [y0, y1]."""
    rgb[y0, x0 : x1 + 1] = color
    rgb[y1, x0 : x1 + 1] = color
    rgb[y0 : y1 + 1, x0] = color
    rgb[y0 : y1 + 1, x1] = color


def draw_overlay(image, verdicts) -> np.ndarray:
    """RGB copy of ``image`` annotated with each verdict's lines, intersections and bbox.

    Verdict geometry is in COCO pixel-area coordinates; lines are drawn as
    2000-pixel segments clipped to their unit's bbox.
    """
    rgb = _as_rgb(image)
    h, w = rgb.shape[:2]
    for v in verdicts:
        if v.bbox is None:
            continue
        x0, y0, x1, y1 = bbox_pixel_window(v.bbox, w, h)
        box = (x0, y0, x1 - 1, y1 - 1)
        draw_rect_outline(rgb, *box, PRESENT_COLOR if v.brace_present else MISSING_COLOR)
        for line in v.lines:
            a, b = line_to_segment(line.translated(-0.5, -0.5), SEGMENT_HALF_EXTENT)
            clipped = clip_segment(a, b, box)
            if clipped is not None:
                _draw_segment(rgb, *clipped, LINE_COLOR)
    for v in verdicts:
        for p in v.intersections:
            draw_disc(rgb, int(math.floor(p.x)), int(math.floor(p.y)), POINT_RADIUS, POINT_COLOR)
    return rgb
