"""Cross-brace finding: split Hough lines into two diagonal families and intersect them.

Coordinate frames: lines and intersections computed inside a crop use the
crop's pixel-center frame (origin on the top-left pixel center). Everything
reported on a :class:`UnitVerdict` is in global image coordinates using the
COCO pixel-area convention, where pixel ``(i, j)`` has center
``(i + 0.5, j + 0.5)``; see :func:`detect_unit`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_fraction, check_positive
from .coco import crop_unit, rasterize_polygon
from .errors import InsufficientLines, NearParallel
from .hough import HoughParams, PolarLine, hough_lines
from .imaging import DEFAULT_CANNY_HIGH, DEFAULT_CANNY_LOW, apply_mask, canny_edges

DEFAULT_SEED = 42


@dataclass(frozen=True)
class BraceParams:
    vert_tol: float = math.radians(15)
    horiz_tol: float = math.radians(10)
    central_frac: float = 0.6
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6
    parallel_eps: float = 1e-3

    def __post_init__(self):
        check_positive(self.vert_tol, "vert_tol")
        check_positive(self.horiz_tol, "horiz_tol")
        check_fraction(self.central_frac, "central_frac")
        check_positive(self.kmeans_restarts, "kmeans_restarts", integer=True)
        check_positive(self.kmeans_max_iter, "kmeans_max_iter", integer=True)
        check_positive(self.kmeans_tol, "kmeans_tol")
        check_positive(self.parallel_eps, "parallel_eps")


@dataclass(frozen=True)
class AnglePoint:
    line_index: int
    x: float
    y: float


@dataclass(frozen=True)
class IntersectionPoint:
    x: float
    y: float
    parent_a: int | None = None
    parent_b: int | None = None

    def translated(self, dx, dy) -> "IntersectionPoint":
        return IntersectionPoint(self.x + dx, self.y + dy, self.parent_a, self.parent_b)


@dataclass(frozen=True)
class LinePartition:
    """Two-cluster split of the input lines.

    ``index_a``/``index_b`` are positions in the clustered input;
    ``group_a``/``group_b`` hold the lines themselves when they were supplied
    (otherwise the indices). Group A always contains input 0.
    """

    group_a: tuple
    group_b: tuple
    objective: float
    index_a: tuple = ()
    index_b: tuple = ()
    restart: int = 0
    n_iter: int = 0
    history: tuple = field(default=(), repr=False)

    def as_sets(self):
        return frozenset({frozenset(self.index_a), frozenset(self.index_b)})


@dataclass(frozen=True)
class UnitVerdict:
    unit_id: int
    brace_present: bool
    intersections: tuple = ()
    n_lines_a: int = 0
    n_lines_b: int = 0
    central_hits: int = 0
    bbox: tuple | None = field(default=None, compare=False)
    lines: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "brace_present": self.brace_present,
            "n_lines_a": self.n_lines_a,
            "n_lines_b": self.n_lines_b,
            "central_hits": self.central_hits,
            "intersections": [[p.x, p.y] for p in self.intersections],
        }


# ---------------------------------------------------------------------------
# Angular preprocessing


def axial_distance(a: float, b: float) -> float:
    """Distance between two orientations of period pi."""
    d = math.fmod(abs(a - b), math.pi)
    return min(d, math.pi - d)


def filter_structural_lines(lines, params: BraceParams = BraceParams()):
    """Split lines into ``(diagonals, structural)``; uprights and ledgers are structural."""
    diagonals, structural = [], []
    for line in lines:
        upright = axial_distance(line.theta, 0.0) <= params.vert_tol
        ledger = axial_distance(line.theta, math.pi / 2) <= params.horiz_tol
        (structural if upright or ledger else diagonals).append(line)
    return diagonals, structural


def embed_angles(lines) -> list:
    """Doubled-angle embedding: theta and theta + pi land on the same unit-circle point."""
    return [AnglePoint(i, math.cos(2 * ln.theta), math.sin(2 * ln.theta)) for i, ln in enumerate(lines)]


# ---------------------------------------------------------------------------
# Two-cluster Lloyd


def _farthest_pair(X: np.ndarray):
    d = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    iu = np.triu_indices(len(X), k=1)
    k = int(np.argmax(d[iu]))  # first maximum is the lowest (i, j)
    return int(iu[0][k]), int(iu[1][k])


def _sse(X, labels, centroids) -> float:
    return float(((X - centroids[labels]) ** 2).sum())


def lloyd_two(X: np.ndarray, init: tuple, max_iter: int = 100, tol: float = 1e-6):
    """Lloyd iterations for k=2 from the centroids ``X[init]``.

    Returns ``(labels, centroids, history)`` where ``history`` holds the
    objective after each iteration. An emptied cluster takes the point
    farthest from its current centroid.
    """
    centroids = X[list(init)].astype(np.float64)
    labels = None
    history = []
    for _ in range(max_iter):
        d = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(-1)
        new_labels = np.argmin(d, axis=1)
        for k in (0, 1):
            if not np.any(new_labels == k):
                own = d[np.arange(len(X)), new_labels]
                new_labels[int(np.argmax(own))] = k
        new_centroids = np.stack([X[new_labels == k].mean(axis=0) for k in (0, 1)])
        history.append(_sse(X, new_labels, new_centroids))
        moved = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        fixpoint = labels is not None and np.array_equal(new_labels, labels)
        labels, centroids = new_labels, new_centroids
        if fixpoint or moved < tol:
            break
    return labels, centroids, history


def kmeans_two(points, params: BraceParams = BraceParams(), seed: int = DEFAULT_SEED, lines=None) -> LinePartition:
    """Best-of-restarts two-cluster k-means on embedded angle points.

    Restart 0 starts from the farthest pair of points; later restarts pick
    two distinct points with a generator seeded by ``seed``. The lowest
    objective wins, earlier restarts winning ties.
    """
    X = np.array([[p.x, p.y] for p in points], dtype=np.float64).reshape(-1, 2)
    if len(X) < 2 or len(np.unique(np.round(X, 12), axis=0)) < 2:
        raise InsufficientLines(f"need at least 2 distinct angle points, got {len(X)}")
    rng = np.random.default_rng(seed)
    best = None
    for r in range(params.kmeans_restarts):
        init = _farthest_pair(X) if r == 0 else tuple(int(i) for i in rng.choice(len(X), 2, replace=False))
        labels, centroids, history = lloyd_two(X, init, params.kmeans_max_iter, params.kmeans_tol)
        objective = history[-1]
        if best is None or objective < best[0] - 1e-12:
            best = (objective, r, labels, history)
    objective, restart, labels, history = best
    if labels[0] != 0:
        labels = 1 - labels
    index_a = tuple(int(points[i].line_index) for i in np.nonzero(labels == 0)[0])
    index_b = tuple(int(points[i].line_index) for i in np.nonzero(labels == 1)[0])
    if lines is not None:
        group_a = tuple(lines[i] for i in index_a)
        group_b = tuple(lines[i] for i in index_b)
    else:
        group_a, group_b = index_a, index_b
    return LinePartition(group_a, group_b, max(objective, 0.0), index_a, index_b, restart, len(history), tuple(history))


# ---------------------------------------------------------------------------
# Intersections and verdict


def intersect(a: PolarLine, b: PolarLine, params: BraceParams = BraceParams()) -> IntersectionPoint:
    """Solve the two normal-form equations; raises NearParallel when ``|sin(dtheta)| < parallel_eps``."""
    det = math.sin(b.theta - a.theta)
    if abs(det) < params.parallel_eps:
        raise NearParallel(f"lines at theta={a.theta:.6f} and {b.theta:.6f} are nearly parallel")
    sa, ca = math.sin(a.theta), math.cos(a.theta)
    sb, cb = math.sin(b.theta), math.cos(b.theta)
    x = (a.rho * sb - b.rho * sa) / det
    y = (b.rho * ca - a.rho * cb) / det
    return IntersectionPoint(x, y)


def _in_box(x, y, box) -> bool:
    bx, by, bw, bh = box
    return bx <= x <= bx + bw and by <= y <= by + bh


def cross_pair_intersections(part: LinePartition, bounds, params: BraceParams = BraceParams()) -> list:
    """Intersect every (group A, group B) pair and keep the points inside ``bounds`` = (x, y, w, h)."""
    points = []
    for ia, la in zip(part.index_a, part.group_a):
        for ib, lb in zip(part.index_b, part.group_b):
            try:
                p = intersect(la, lb, params)
            except NearParallel:
                continue
            if _in_box(p.x, p.y, bounds):
                points.append(IntersectionPoint(p.x, p.y, ia, ib))
    points.sort(key=lambda p: (p.parent_a, p.parent_b))
    return points


def central_window(bounds, central_frac: float):
    bx, by, bw, bh = bounds
    w, h = central_frac * bw, central_frac * bh
    return (bx + (bw - w) / 2, by + (bh - h) / 2, w, h)


def judge_unit(points, bounds, params: BraceParams = BraceParams(), unit_id: int = 0, **extra) -> UnitVerdict:
    """Brace present iff at least one intersection falls in the centered window."""
    window = central_window(bounds, params.central_frac)
    hits = sum(1 for p in points if _in_box(p.x, p.y, window))
    return UnitVerdict(unit_id, hits >= 1, tuple(points), central_hits=hits, bbox=tuple(bounds), **extra)


# ---------------------------------------------------------------------------
# Pipeline


def find_brace(lines, bounds, params: BraceParams = BraceParams(), seed: int = DEFAULT_SEED, unit_id: int = 0):
    """Structural filter, clustering, pairing and verdict for lines already in ``bounds``' frame."""
    diagonals, _ = filter_structural_lines(lines, params)
    if len(diagonals) < 2:
        return judge_unit([], bounds, params, unit_id, n_lines_a=len(diagonals), lines=tuple(lines))
    try:
        part = kmeans_two(embed_angles(diagonals), params, seed, lines=diagonals)
    except InsufficientLines:
        return judge_unit([], bounds, params, unit_id, n_lines_a=len(diagonals), lines=tuple(lines))
    points = cross_pair_intersections(part, bounds, params)
    return judge_unit(
        points, bounds, params, unit_id, n_lines_a=len(part.group_a), n_lines_b=len(part.group_b), lines=tuple(lines)
    )


def detect_unit(
    img,
    region,
    *,
    canny_low: float = DEFAULT_CANNY_LOW,
    canny_high: float = DEFAULT_CANNY_HIGH,
    hough: HoughParams = HoughParams(),
    brace: BraceParams = BraceParams(),
    seed: int = DEFAULT_SEED,
) -> UnitVerdict:
    """Run crop, mask, Canny, Hough and brace finding for one annotated unit.

    Lines are detected in the crop's pixel-center frame; the verdict's
    bbox, lines and intersections are shifted into global COCO coordinates
    by the crop offset plus half a pixel.
    """
    crop, (ox, oy) = crop_unit(img, region)
    ch, cw = crop.shape
    mask = rasterize_polygon(region, cw, ch, origin=(ox, oy))
    edges = apply_mask(canny_edges(crop, canny_low, canny_high), mask)
    lines = hough_lines(edges, hough)
    dx, dy = ox + 0.5, oy + 0.5
    shifted = [ln.translated(dx, dy) for ln in lines]
    return find_brace(shifted, region.bbox, brace, seed, unit_id=region.id)
