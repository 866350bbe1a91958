"""COCO-subset annotation ingestion for scaffold-unit regions.

Coordinates in COCO polygons and bboxes follow the COCO pixel-area
convention: pixel ``(i, j)`` covers ``[i, i+1) x [j, j+1)`` so its center is
at ``(i + 0.5, j + 0.5)``. A bbox ``(x, y, w, h)`` with integral values
therefore selects pixel columns ``x .. x+w-1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_gray_image
from .errors import (
    DanglingImageRef,
    DegeneratePolygon,
    MalformedJson,
    MissingField,
    RegionOutsideImage,
    UnsupportedFormat,
)
from .imaging import UnitMask

DEFAULT_CATEGORY = "scaffold_unit"
BBOX_TOLERANCE = 1.0


@dataclass(frozen=True)
class ImageInfo:
    id: int
    file_name: str
    width: int
    height: int


@dataclass(frozen=True)
class UnitRegion:
    id: int
    image_id: int
    polygon: tuple  # ((x, y), ...)
    bbox: tuple  # (x, y, w, h)
    category: str = DEFAULT_CATEGORY

    def __post_init__(self):
        object.__setattr__(self, "polygon", tuple((float(x), float(y)) for x, y in self.polygon))
        object.__setattr__(self, "bbox", tuple(float(v) for v in self.bbox))
        if len(self.polygon) < 3:
            raise ValueError(f"region {self.id}: polygon needs at least 3 vertices")
        if len(self.bbox) != 4:
            raise ValueError(f"region {self.id}: bbox must be (x, y, w, h)")
        x, y, w, h = self.bbox
        if not (w > 0 and h > 0):
            raise ValueError(f"region {self.id}: bbox must have positive size, got {self.bbox}")
        tol = BBOX_TOLERANCE
        for px, py in self.polygon:
            if not (x - tol <= px <= x + w + tol and y - tol <= py <= y + h + tol):
                raise ValueError(f"region {self.id}: vertex ({px}, {py}) lies outside bbox {self.bbox}")

    @classmethod
    def from_polygon(cls, id, image_id, polygon, category=DEFAULT_CATEGORY):
        """Build a region whose bbox is the tight box around ``polygon``."""
        xs = [float(p[0]) for p in polygon]
        ys = [float(p[1]) for p in polygon]
        bbox = (min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))
        return cls(id, image_id, tuple(zip(xs, ys)), bbox, category)

    @property
    def area(self) -> float:
        return abs(shoelace_area(self.polygon))


@dataclass
class AnnotationSet:
    images: list = field(default_factory=list)
    regions: list = field(default_factory=list)

    def __post_init__(self):
        known = {im.id for im in self.images}
        seen = set()
        for r in self.regions:
            if r.image_id not in known:
                raise DanglingImageRef(f"annotation {r.id} references unknown image_id {r.image_id}")
            if r.id in seen:
                raise MalformedJson(f"duplicate annotation id {r.id}")
            seen.add(r.id)

    def regions_for(self, image_id: int) -> list:
        return sorted((r for r in self.regions if r.image_id == image_id), key=lambda r: r.id)

    def image_by_name(self, file_name: str):
        for im in self.images:
            if im.file_name == file_name:
                return im
        return None


def shoelace_area(polygon) -> float:
    """Signed area; positive for counter-clockwise vertices in a y-up frame."""
    pts = np.asarray(polygon, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise MalformedJson(f"{where} must be an object")
    if key not in obj:
        raise MissingField(f"{where}.{key}")
    return obj[key]


def parse_coco(text, category: str = DEFAULT_CATEGORY) -> AnnotationSet:
    """Parse COCO-subset JSON, keeping only regions labelled ``category``."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedJson(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedJson("top level must be a JSON object")
    raw_images = _require(doc, "images", "root")
    raw_annotations = _require(doc, "annotations", "root")
    raw_categories = _require(doc, "categories", "root")
    for name, value in (("images", raw_images), ("annotations", raw_annotations), ("categories", raw_categories)):
        if not isinstance(value, list):
            raise MalformedJson(f"{name} must be a list")

    cat_names = {}
    for c in raw_categories:
        cat_names[_require(c, "id", "categories[]")] = str(_require(c, "name", "categories[]"))

    images = []
    for im in raw_images:
        try:
            images.append(
                ImageInfo(
                    int(_require(im, "id", "images[]")),
                    str(_require(im, "file_name", "images[]")),
                    int(_require(im, "width", "images[]")),
                    int(_require(im, "height", "images[]")),
                )
            )
        except (TypeError, ValueError) as exc:
            raise MalformedJson(f"bad image entry {im!r}: {exc}") from exc
    image_ids = {im.id for im in images}

    regions = []
    for ann in raw_annotations:
        ann_id = _require(ann, "id", "annotations[]")
        image_id = _require(ann, "image_id", "annotations[]")
        bbox = _require(ann, "bbox", "annotations[]")
        seg = _require(ann, "segmentation", "annotations[]")
        cat_id = _require(ann, "category_id", "annotations[]")
        if image_id not in image_ids:
            raise DanglingImageRef(f"annotation {ann_id} references unknown image_id {image_id}")
        if cat_names.get(cat_id) != category:
            continue
        if isinstance(seg, dict):
            raise UnsupportedFormat(f"annotation {ann_id}: RLE segmentation is not supported, use polygons")
        if not isinstance(seg, list) or not seg or not isinstance(seg[0], list):
            raise MalformedJson(f"annotation {ann_id}: segmentation must be a list of polygon lists")
        if len(seg) > 1:
            raise UnsupportedFormat(f"annotation {ann_id}: multi-part polygons are not supported")
        flat = seg[0]
        if len(flat) % 2:
            raise MalformedJson(f"annotation {ann_id}: polygon has an odd number of coordinates")
        try:
            polygon = tuple(zip(flat[0::2], flat[1::2]))
            regions.append(UnitRegion(int(ann_id), int(image_id), polygon, tuple(bbox), cat_names[cat_id]))
        except (TypeError, ValueError) as exc:
            raise MalformedJson(f"annotation {ann_id}: {exc}") from exc
    return AnnotationSet(images, regions)


def load_coco(path, category: str = DEFAULT_CATEGORY) -> AnnotationSet:
    with open(path, encoding="utf-8") as fh:
        return parse_coco(fh.read(), category=category)


def to_coco_dict(annotations: AnnotationSet) -> dict:
    names = []
    for r in annotations.regions:
        if r.category not in names:
            names.append(r.category)
    cat_ids = {name: i + 1 for i, name in enumerate(names)}
    return {
        "images": [
            {"id": im.id, "file_name": im.file_name, "width": im.width, "height": im.height}
            for im in annotations.images
        ],
        "annotations": [
            {
                "id": r.id,
                "image_id": r.image_id,
                "category_id": cat_ids[r.category],
                "bbox": list(r.bbox),
                "segmentation": [[c for xy in r.polygon for c in xy]],
                "area": r.area,
                "iscrowd": 0,
            }
            for r in annotations.regions
        ],
        "categories": [{"id": i, "name": name} for name, i in cat_ids.items()],
    }


def serialize_coco(annotations: AnnotationSet) -> str:
    return json.dumps(to_coco_dict(annotations), indent=1)


def rasterize_polygon(region: UnitRegion, width: int, height: int, origin=(0, 0)) -> UnitMask:
    """Even-odd fill of ``region.polygon`` sampled at pixel centers.

    ``origin`` is the COCO coordinate of the canvas's top-left corner, so a
    mask for a cropped sub-image is obtained by passing the crop offset.
    Vertices outside the canvas are allowed; the fill is clipped.
    """
    if abs(shoelace_area(region.polygon)) <= 1e-12:
        raise DegeneratePolygon(f"region {region.id} has zero area")
    ox, oy = origin
    pts = [(x - ox, y - oy) for x, y in region.polygon]
    xc = np.arange(width, dtype=np.float64) + 0.5
    yc = np.arange(height, dtype=np.float64) + 0.5
    inside = np.zeros((height, width), dtype=bool)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        if y0 == y1:
            continue
        # half-open in y so a vertex shared by two edges is counted once
        rows = np.nonzero((np.minimum(y0, y1) <= yc) & (yc < np.maximum(y0, y1)))[0]
        if rows.size == 0:
            continue
        x_cross = x0 + (yc[rows] - y0) * (x1 - x0) / (y1 - y0)
        inside[rows] ^= xc[None, :] < x_cross[:, None]
    if not inside.any():
        raise DegeneratePolygon(f"region {region.id} covers no pixel centers on a {width}x{height} canvas")
    return UnitMask.from_array(inside)


def bbox_pixel_window(bbox, width: int, height: int):
    """Pixel index window ``(x0, y0, x1, y1)`` (exclusive ends) of ``bbox`` clipped to the image."""
    x, y, w, h = bbox
    x0 = max(0, math.floor(x))
    y0 = max(0, math.floor(y))
    x1 = min(width, math.ceil(x + w))
    y1 = min(height, math.ceil(y + h))
    if x1 <= x0 or y1 <= y0:
        raise RegionOutsideImage(f"bbox {tuple(bbox)} does not intersect a {width}x{height} image")
    return x0, y0, x1, y1


def crop_unit(img, region: UnitRegion):
    """Crop the region's bbox (clipped to the image); returns ``(crop, (x_offset, y_offset))``."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = check_gray_image(arr)
    h, w = arr.shape[:2]
    x0, y0, x1, y1 = bbox_pixel_window(region.bbox, w, h)
    return arr[y0:y1, x0:x1].copy(), (x0, y0)
