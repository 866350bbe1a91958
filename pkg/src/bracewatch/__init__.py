"""Scaffold cross-brace inspection with Hough lines and axial k-means."""

from .brace import (
    AnglePoint,
    BraceParams,
    IntersectionPoint,
    LinePartition,
    UnitVerdict,
    cross_pair_intersections,
    detect_unit,
    embed_angles,
    filter_structural_lines,
    intersect,
    judge_unit,
    kmeans_two,
)
from .coco import AnnotationSet, ImageInfo, UnitRegion, crop_unit, parse_coco, rasterize_polygon, serialize_coco
from .config import RunConfig
from .estimator import AxialKMeans, BraceDetector
from .hough import HoughAccumulator, HoughParams, PolarLine, find_peaks, hough_accumulate, line_to_segment
from .imaging import UnitMask, apply_mask, canny_edges, decode_image, sobel_gradients, to_grayscale
from .monitor import Alarm, AlarmKind, BraceMonitor, FrameSnapshot, append_log, compare_frames
from .overlay import draw_overlay
from .synth import ClutterParams, ClutterRanges, ScaffoldSpec, generate_corpus, render_frame, render_unit

__version__ = "0.1.0"

__all__ = [
    "AnglePoint",
    "BraceParams",
    "IntersectionPoint",
    "LinePartition",
    "UnitVerdict",
    "cross_pair_intersections",
    "detect_unit",
    "embed_angles",
    "filter_structural_lines",
    "intersect",
    "judge_unit",
    "kmeans_two",
    "AnnotationSet",
    "ImageInfo",
    "UnitRegion",
    "crop_unit",
    "parse_coco",
    "rasterize_polygon",
    "serialize_coco",
    "RunConfig",
    "AxialKMeans",
    "BraceDetector",
    "HoughAccumulator",
    "HoughParams",
    "PolarLine",
    "find_peaks",
    "hough_accumulate",
    "line_to_segment",
    "UnitMask",
    "apply_mask",
    "canny_edges",
    "decode_image",
    "sobel_gradients",
    "to_grayscale",
    "Alarm",
    "AlarmKind",
    "BraceMonitor",
    "FrameSnapshot",
    "append_log",
    "compare_frames",
    "draw_overlay",
    "ClutterParams",
    "ClutterRanges",
    "ScaffoldSpec",
    "generate_corpus",
    "render_frame",
    "render_unit",
]
