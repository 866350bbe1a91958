"""Standard (rho, theta) Hough transform for straight lines.

A line is ``x cos(theta) + y sin(theta) = rho`` with ``theta`` in ``[0, pi)``
and signed ``rho``; the origin is the top-left pixel center, y points down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_edge_map, check_fraction, check_positive

_CHUNK = 16384


@dataclass(frozen=True)
class PolarLine:
    rho: float
    theta: float
    votes: int = field(default=0, compare=False)

    @classmethod
    def normalized(cls, rho, theta, votes=0) -> "PolarLine":
        """Fold any (rho, theta) onto the equivalent line with theta in [0, pi)."""
        turns, theta = divmod(theta, math.pi)
        if int(turns) % 2:
            rho = -rho
        if theta >= math.pi or theta < 0:  # rounding at the ends of the range
            theta, rho = 0.0, -rho if theta >= math.pi else rho
        return cls(float(rho), float(theta), votes)

    def residual(self, x, y) -> float:
        return x * math.cos(self.theta) + y * math.sin(self.theta) - self.rho

    def translated(self, dx, dy) -> "PolarLine":
        """The same geometric line expressed after moving the origin to ``(-dx, -dy)``."""
        return PolarLine(self.rho + dx * math.cos(self.theta) + dy * math.sin(self.theta), self.theta, self.votes)


@dataclass(frozen=True)
class HoughParams:
    """Accumulator resolution and peak-picking settings.

    ``threshold`` is an absolute vote count. When it is None the threshold is
    ``threshold_frac`` times the edge map's height, so crops of different
    size need no retuning.
    """

    rho_res: float = 1.0
    theta_res: float = math.pi / 180
    threshold: int | None = None
    threshold_frac: float = 0.3
    nms_rho: int = 2
    nms_theta: int = 2
    max_lines: int = 16

    def __post_init__(self):
        check_positive(self.rho_res, "rho_res")
        check_positive(self.theta_res, "theta_res")
        if self.theta_res > math.pi:
            raise ValueError("theta_res must not exceed pi")
        if self.threshold is not None:
            check_positive(self.threshold, "threshold", integer=True)
        check_fraction(self.threshold_frac, "threshold_frac")
        check_positive(self.nms_rho, "nms_rho", integer=True)
        check_positive(self.nms_theta, "nms_theta", integer=True)
        check_positive(self.max_lines, "max_lines", integer=True)

    def threshold_for(self, height: int) -> int:
        if self.threshold is not None:
            return int(self.threshold)
        return max(1, int(math.floor(self.threshold_frac * height + 0.5)))


@dataclass(frozen=True, eq=False)
class HoughAccumulator:
    votes: np.ndarray  # (rho_bins, theta_bins)
    rho_res: float
    theta_res: float
    diag: float
    shape: tuple  # (height, width) of the voting edge map

    @property
    def rho_offset(self) -> int:
        """Index of the rho = 0 bin; bin centers are integer multiples of ``rho_res``."""
        return (self.rho_bins - 1) // 2

    @property
    def rho_bins(self) -> int:
        return self.votes.shape[0]

    @property
    def theta_bins(self) -> int:
        return self.votes.shape[1]

    @property
    def rho_centers(self) -> np.ndarray:
        return (np.arange(self.rho_bins) - self.rho_offset) * self.rho_res

    @property
    def theta_centers(self) -> np.ndarray:
        return theta_centers(self.theta_bins)

    def rho_index(self, rho):
        return np.floor(np.asarray(rho) / self.rho_res + 0.5).astype(np.int64) + self.rho_offset


def theta_centers(theta_bins: int) -> np.ndarray:
    return np.arange(theta_bins) * (math.pi / theta_bins)


def accumulator_shape(width: int, height: int, params: HoughParams):
    diag = math.hypot(width, height)
    rho_bins = math.ceil(2 * diag / params.rho_res) + 1
    theta_bins = max(1, round(math.pi / params.theta_res))
    return diag, rho_bins, theta_bins


def hough_accumulate(edges, params: HoughParams = HoughParams()) -> HoughAccumulator:
    """Vote every edge pixel into every theta column; an empty map gives zeros."""
    edges = check_edge_map(edges)
    h, w = edges.shape
    diag, rho_bins, theta_bins = accumulator_shape(w, h, params)
    thetas = theta_centers(theta_bins)
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    flat = np.zeros(rho_bins * theta_bins, dtype=np.int64)
    offset = (rho_bins - 1) // 2
    ys, xs = np.nonzero(edges)
    cols = np.arange(theta_bins)
    for start in range(0, xs.size, _CHUNK):
        x = xs[start : start + _CHUNK, None].astype(np.float64)
        y = ys[start : start + _CHUNK, None].astype(np.float64)
        rho = x * cos_t + y * sin_t
        idx = np.floor(rho / params.rho_res + 0.5).astype(np.int64) + offset
        flat += np.bincount((idx * theta_bins + cols).ravel(), minlength=flat.size)
    return HoughAccumulator(flat.reshape(rho_bins, theta_bins), params.rho_res, math.pi / theta_bins, diag, (h, w))


def _suppress(mask: np.ndarray, acc: HoughAccumulator, r: int, t: int, params: HoughParams):
    """Mark every cell in the NMS window of (r, t), including the theta wrap at pi."""
    rho_bins, theta_bins = mask.shape
    rho_s = acc.rho_centers[r]
    reach = params.nms_rho * acc.rho_res + 1e-9
    for dt in range(-params.nms_theta, params.nms_theta + 1):
        tt = t + dt
        if 0 <= tt < theta_bins:
            lo, hi = r - params.nms_rho, r + params.nms_rho
        else:
            # (rho, theta) and (-rho, theta +/- pi) are the same line
            tt %= theta_bins
            centre = -rho_s / acc.rho_res + acc.rho_offset
            lo = math.ceil(centre - reach / acc.rho_res)
            hi = math.floor(centre + reach / acc.rho_res)
        mask[max(lo, 0) : min(hi, rho_bins - 1) + 1, tt] = True


def find_peaks(acc: HoughAccumulator, params: HoughParams = HoughParams()) -> list:
    """Greedy descending-vote peak picking with windowed suppression.

    Ties are broken by smaller theta bin, then smaller rho bin. Returned
    lines sit at bin centers and carry their vote counts.
    """
    threshold = params.threshold_for(acc.shape[0])
    rs, ts = np.nonzero(acc.votes >= threshold)
    if rs.size == 0:
        return []
    v = acc.votes[rs, ts]
    order = np.lexsort((rs, ts, -v))
    suppressed = np.zeros(acc.votes.shape, dtype=bool)
    rho_c = acc.rho_centers
    theta_c = acc.theta_centers
    lines = []
    for k in order:
        r, t = int(rs[k]), int(ts[k])
        if suppressed[r, t]:
            continue
        lines.append(PolarLine(float(rho_c[r]), float(theta_c[t]), int(v[k])))
        if len(lines) == params.max_lines:
            break
        _suppress(suppressed, acc, r, t, params)
    return lines


def hough_lines(edges, params: HoughParams = HoughParams()) -> list:
    return find_peaks(hough_accumulate(edges, params), params)


def line_to_segment(line: PolarLine, half_extent: float = 1000.0):
    """Two points ``half_extent`` either side of the foot of the perpendicular from the origin."""
    c, s = math.cos(line.theta), math.sin(line.theta)
    x0, y0 = line.rho * c, line.rho * s
    return (x0 - half_extent * s, y0 + half_extent * c), (x0 + half_extent * s, y0 - half_extent * c)


def nms_neighbours(a: PolarLine, b: PolarLine, acc: HoughAccumulator, params: HoughParams) -> bool:
    """True when ``b`` falls inside the suppression window centred on ``a``."""
    ta = int(round(a.theta / acc.theta_res))
    tb = int(round(b.theta / acc.theta_res))
    reach = params.nms_rho * acc.rho_res + 1e-9
    direct = abs(ta - tb)
    wrapped = acc.theta_bins - direct
    if direct <= params.nms_theta and abs(a.rho - b.rho) <= reach:
        return True
    return wrapped <= params.nms_theta and abs(a.rho + b.rho) <= reach
