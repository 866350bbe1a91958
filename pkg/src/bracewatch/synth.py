"""Synthetic scaffold scenes with ground truth.

Geometry is laid out in COCO pixel-area coordinates: unit ``(row, col)``
covers ``[col*W, (col+1)*W] x [row*H, (row+1)*H]`` where ``W`` and ``H`` are
the unit's pixel size from :class:`ScaffoldSpec`. Uprights run along the
vertical unit boundaries (shared by neighbours), ledgers along the
horizontal ones, and a present brace is the two corner-to-corner diagonals
of the unit. Strokes are anti-aliased by 4x4 supersampled coverage.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .coco import AnnotationSet, ImageInfo, UnitRegion, serialize_coco
from .errors import CanvasTooSmall
from .imaging import encode_png

MIN_CANVAS_PX = 32
_SUPERSAMPLE = 4


@dataclass(frozen=True)
class ScaffoldSpec:
    unit_width_mm: float = 762.0
    net_width_mm: float = 719.3
    platform_width_mm: float = 300.0
    unit_height_mm: float = 1900.0
    px_per_mm: float = 0.25
    upright_thickness_px: float = 4.0
    brace_thickness_px: float = 2.0
    ledger_thickness_px: float = 3.0
    line_gray: int = 40
    background_gray: int = 255
    draw_ledgers: bool = True

    def __post_init__(self):
        for name in ("unit_width_mm", "net_width_mm", "platform_width_mm", "unit_height_mm", "px_per_mm",
                     "upright_thickness_px", "brace_thickness_px", "ledger_thickness_px"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.net_width_mm < self.unit_width_mm:
            raise ValueError("net_width_mm must be smaller than unit_width_mm")
        if not (0 <= self.line_gray <= 255 and 0 <= self.background_gray <= 255):
            raise ValueError("gray levels must lie in [0, 255]")

    @property
    def width_px(self) -> int:
        return int(math.floor(self.unit_width_mm * self.px_per_mm + 0.5))

    @property
    def height_px(self) -> int:
        return int(math.floor(self.unit_height_mm * self.px_per_mm + 0.5))


@dataclass(frozen=True)
class ClutterParams:
    n_clutter_lines: int = 0
    noise_sigma: float = 0.0
    jitter_px: float = 0.0

    def __post_init__(self):
        if not 0 <= self.n_clutter_lines <= 10:
            raise ValueError("n_clutter_lines must lie in 0..10")
        if not 0 <= self.noise_sigma <= 16:
            raise ValueError("noise_sigma must lie in [0, 16]")
        if not 0 <= self.jitter_px <= 3:
            raise ValueError("jitter_px must lie in [0, 3]")


@dataclass(frozen=True)
class ClutterRanges:
    """Inclusive ranges that :func:`generate_corpus` samples per frame."""

    clutter_lines: tuple = (0, 0)
    noise_sigma: tuple = (0.0, 0.0)
    jitter_px: tuple = (0.0, 0.0)

    def sample(self, rng: np.random.Generator) -> ClutterParams:
        lo, hi = self.clutter_lines
        n = int(rng.integers(lo, hi + 1))
        sigma = float(rng.uniform(*self.noise_sigma)) if self.noise_sigma[1] > self.noise_sigma[0] else float(self.noise_sigma[0])
        jitter = float(rng.uniform(*self.jitter_px)) if self.jitter_px[1] > self.jitter_px[0] else float(self.jitter_px[0])
        return ClutterParams(n, sigma, jitter)


@dataclass(frozen=True)
class UnitTruth:
    unit_id: int
    bbox: tuple  # (x, y, w, h)
    brace_present: bool
    crossing_point: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "bbox": list(self.bbox),
            "brace_present": self.brace_present,
            "crossing": list(self.crossing_point) if self.crossing_point is not None else None,
        }


@dataclass(frozen=True)
class SceneTruth:
    units: tuple
    clutter_count: int = 0
    noise_sigma: float = 0.0
    jitter_px: float = 0.0
    seed: int = 0

    def by_id(self) -> dict:
        return {u.unit_id: u for u in self.units}


# ---------------------------------------------------------------------------
# Rasterisation


def _capsule_dist2(px, py, x0, y0, dx, dy, length2):
    if length2 > 0:
        t = np.clip(((px - x0) * dx + (py - y0) * dy) / length2, 0.0, 1.0)
    else:
        t = np.zeros(np.broadcast(px, py).shape)
    return (px - x0 - t * dx) ** 2 + (py - y0 - t * dy) ** 2


def _draw_stroke(canvas: np.ndarray, p0, p1, thickness: float, gray: float):
    """Composite a round-capped segment of the given thickness onto a float canvas."""
    h, w = canvas.shape
    half = thickness / 2.0
    (x0, y0), (x1, y1) = p0, p1
    i0 = max(0, int(math.floor(min(x0, x1) - half)))
    i1 = min(w, int(math.ceil(max(x0, x1) + half)) + 1)
    j0 = max(0, int(math.floor(min(y0, y1) - half)))
    j1 = min(h, int(math.ceil(max(y0, y1) + half)) + 1)
    if i1 <= i0 or j1 <= j0:
        return
    dx, dy = x1 - x0, y1 - y0
    length2 = dx * dx + dy * dy
    # only pixels whose center is within half a pixel diagonal of the stroke can be covered
    jj, ii = np.mgrid[j0:j1, i0:i1]
    near = _capsule_dist2(ii + 0.5, jj + 0.5, x0, y0, dx, dy, length2) <= (half + 0.75) ** 2
    ys, xs = jj[near], ii[near]
    if xs.size == 0:
        return
    offs = (np.arange(_SUPERSAMPLE) + 0.5) / _SUPERSAMPLE
    sx = (xs[:, None, None] + offs[None, None, :]).repeat(_SUPERSAMPLE, axis=1)
    sy = (ys[:, None, None] + offs[None, :, None]).repeat(_SUPERSAMPLE, axis=2)
    cov = (_capsule_dist2(sx, sy, x0, y0, dx, dy, length2) <= half * half).mean(axis=(1, 2))
    canvas[ys, xs] = canvas[ys, xs] * (1.0 - cov) + gray * cov


def _segment_intersection(a0, a1, b0, b1):
    (x1, y1), (x2, y2) = a0, a1
    (x3, y3), (x4, y4) = b0, b1
    den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
    t = ((x1 - x3) * (y3 - y4) - (y1 - y3) * (x3 - x4)) / den
    return (x1 + t * (x2 - x1), y1 + t * (y2 - y1))


def _jittered(rng, point, jitter):
    if jitter <= 0:
        return point
    return (point[0] + float(rng.uniform(-jitter, jitter)), point[1] + float(rng.uniform(-jitter, jitter)))


def render_frame(
    spec: ScaffoldSpec,
    n_cols: int,
    n_rows: int,
    presence,
    clutter: ClutterParams = ClutterParams(),
    seed: int = 0,
    *,
    image_id: int = 1,
    first_unit_id: int = 1,
    file_name: str = "frame.png",
):
    """Render ``n_rows x n_cols`` units; ``presence[row][col]`` says whether that unit has its brace.

    Returns ``(image, annotations, truth)``; unit ids run row-major from
    ``first_unit_id``.
    """
    presence = np.asarray(presence, dtype=bool)
    if presence.shape != (n_rows, n_cols):
        raise ValueError(f"presence must have shape ({n_rows}, {n_cols}), got {presence.shape}")
    W, H = spec.width_px, spec.height_px
    if W < MIN_CANVAS_PX or H < MIN_CANVAS_PX:
        raise CanvasTooSmall(f"unit canvas {W}x{H} px is below {MIN_CANVAS_PX} px")
    rng = np.random.default_rng(seed)
    fw, fh = n_cols * W, n_rows * H
    canvas = np.full((fh, fw), float(spec.background_gray))
    gray = float(spec.line_gray)
    jit = clutter.jitter_px

    for c in range(n_cols + 1):
        t = spec.upright_thickness_px
        a = _jittered(rng, (c * W, -t), jit)
        b = _jittered(rng, (c * W, fh + t), jit)
        _draw_stroke(canvas, a, b, t, gray)
    if spec.draw_ledgers:
        for r in range(n_rows + 1):
            t = spec.ledger_thickness_px
            a = _jittered(rng, (-t, r * H), jit)
            b = _jittered(rng, (fw + t, r * H), jit)
            _draw_stroke(canvas, a, b, t, gray)

    units = []
    regions = []
    uid = first_unit_id
    for r in range(n_rows):
        for c in range(n_cols):
            x0, y0, x1, y1 = c * W, r * H, (c + 1) * W, (r + 1) * H
            crossing = None
            if presence[r, c]:
                d1 = (_jittered(rng, (x0, y0), jit), _jittered(rng, (x1, y1), jit))
                d2 = (_jittered(rng, (x1, y0), jit), _jittered(rng, (x0, y1), jit))
                for p, q in (d1, d2):
                    _draw_stroke(canvas, p, q, spec.brace_thickness_px, gray)
                crossing = _segment_intersection(*d1, *d2)
            bbox = (float(x0), float(y0), float(W), float(H))
            units.append(UnitTruth(uid, bbox, bool(presence[r, c]), crossing))
            polygon = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
            regions.append(UnitRegion(uid, image_id, polygon, bbox))
            uid += 1

    for truth in units:
        bx, by, bw, bh = truth.bbox
        for _ in range(clutter.n_clutter_lines):
            cx = bx + float(rng.uniform(0, bw))
            cy = by + float(rng.uniform(0, bh))
            angle = float(rng.uniform(0, math.pi))
            length = float(rng.uniform(0.1, 0.5)) * math.hypot(bw, bh)
            thickness = float(rng.integers(1, 4))
            shade = float(rng.uniform(40, 160))
            ux, uy = math.cos(angle) * length / 2, math.sin(angle) * length / 2
            _draw_stroke(canvas, (cx - ux, cy - uy), (cx + ux, cy + uy), thickness, shade)

    if clutter.noise_sigma > 0:
        canvas += rng.normal(0.0, clutter.noise_sigma, canvas.shape)
    image = np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)

    annotations = AnnotationSet([ImageInfo(image_id, file_name, fw, fh)], regions)
    truth = SceneTruth(tuple(units), clutter.n_clutter_lines * len(units), clutter.noise_sigma, clutter.jitter_px, seed)
    return image, annotations, truth


def render_unit(spec: ScaffoldSpec, brace_present: bool, clutter: ClutterParams = ClutterParams(), seed: int = 0):
    """Single unit at the origin; returns ``(image, unit_truth)``."""
    image, _, truth = render_frame(spec, 1, 1, [[brace_present]], clutter, seed)
    return image, truth.units[0]


# ---------------------------------------------------------------------------
# Corpus


def generate_corpus(
    spec: ScaffoldSpec,
    n_frames: int,
    presence_rate: float,
    clutter_ranges: ClutterRanges = ClutterRanges(),
    seed: int = 0,
    out_dir=".",
    *,
    n_cols: int = 1,
    n_rows: int = 1,
) -> dict:
    """Write PNG frames, ``annotations.json``, ``truth.json`` and ``manifest.json`` under ``out_dir``.

    Exactly ``round(presence_rate * units)`` units carry a brace, spread by
    a seeded shuffle; frame ``i`` renders with seed ``seed + i``.
    """
    if not 0 <= presence_rate <= 1:
        raise ValueError("presence_rate must lie in [0, 1]")
    if n_frames < 0:
        raise ValueError("n_frames must be non-negative")
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    per_frame = n_cols * n_rows
    total = n_frames * per_frame
    rng = np.random.default_rng(seed)
    present = np.zeros(total, dtype=bool)
    present[rng.permutation(total)[: int(math.floor(presence_rate * total + 0.5))]] = True

    images, regions, truth_frames, manifest_frames = [], [], [], []
    for i in range(n_frames):
        clutter = clutter_ranges.sample(rng)
        frame_seed = seed + i
        file_name = f"images/frame_{i:05d}.png"
        matrix = present[i * per_frame : (i + 1) * per_frame].reshape(n_rows, n_cols)
        image, ann, truth = render_frame(
            spec, n_cols, n_rows, matrix, clutter, frame_seed,
            image_id=i + 1, first_unit_id=i * per_frame + 1, file_name=file_name,
        )
        (out / file_name).write_bytes(encode_png(image))
        images.extend(ann.images)
        regions.extend(ann.regions)
        truth_frames.append(
            {
                "file": file_name,
                "units": [u.to_dict() for u in truth.units],
                "clutter_count": truth.clutter_count,
                "noise_sigma": truth.noise_sigma,
                "jitter_px": truth.jitter_px,
                "seed": frame_seed,
            }
        )
        manifest_frames.append({"file": file_name, "image_id": i + 1, "seed": frame_seed})

    (out / "annotations.json").write_text(serialize_coco(AnnotationSet(images, regions)), encoding="utf-8")
    truth_doc = {"frames": truth_frames, "seed": seed, "spec": asdict(spec)}
    (out / "truth.json").write_text(json.dumps(truth_doc, indent=1), encoding="utf-8")
    manifest = {
        "seed": seed,
        "n_frames": n_frames,
        "n_units": total,
        "n_present": int(present.sum()),
        "presence_rate": presence_rate,
        "coco": "annotations.json",
        "truth": "truth.json",
        "frames": manifest_frames,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return manifest


def load_truth(path) -> dict:
    """Truth JSON keyed by frame file: ``{file: {unit_id: UnitTruth}}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for frame in doc["frames"]:
        units = {}
        for u in frame["units"]:
            crossing = tuple(u["crossing"]) if u["crossing"] is not None else None
            units[int(u["unit_id"])] = UnitTruth(int(u["unit_id"]), tuple(u["bbox"]), bool(u["brace_present"]), crossing)
        out[frame["file"]] = units
    return out
