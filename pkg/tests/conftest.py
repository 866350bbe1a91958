"""Independent oracles shared by the test modules.

Nothing here imports the code under test's internals; each helper is a
slow, obvious re-derivation used to check the fast path.
"""

import itertools
import math

import numpy as np
import pytest


def naive_convolve3(img, kernel):
    """Per-pixel 3x3 correlation with a zero border ring, plain Python loops."""
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.int64)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            acc = 0
            for ky in range(3):
                for kx in range(3):
                    acc += int(kernel[ky][kx]) * int(img[y + ky - 1, x + kx - 1])
            out[y, x] = acc
    return out


def brute_force_accumulator(edges, rho_res=1.0, theta_bins=180):
    """Loop over every edge pixel and theta bin, voting with math.cos/math.sin.

    Rho bins are centred on integer multiples of ``rho_res`` with rho = 0 in
    the middle bin.
    """
    h, w = edges.shape
    diag = math.hypot(w, h)
    rho_bins = math.ceil(2 * diag / rho_res) + 1
    acc = np.zeros((rho_bins, theta_bins), dtype=np.int64)
    for y, x in zip(*np.nonzero(edges)):
        for j in range(theta_bins):
            theta = j * math.pi / theta_bins
            rho = x * math.cos(theta) + y * math.sin(theta)
            acc[math.floor(rho / rho_res + 0.5) + (rho_bins - 1) // 2, j] += 1
    return acc


def rasterize_polar_line(rho, theta, width, height):
    """Pixels nearest to the line, stepping along its major axis."""
    edges = np.zeros((height, width), dtype=bool)
    c, s = math.cos(theta), math.sin(theta)
    if abs(s) >= abs(c):
        for x in range(width):
            y = math.floor((rho - x * c) / s + 0.5)
            if 0 <= y < height:
                edges[y, x] = True
    else:
        for y in range(height):
            x = math.floor((rho - y * s) / c + 0.5)
            if 0 <= x < width:
                edges[y, x] = True
    return edges


def axial_dist(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def exhaustive_two_partition(points):
    """All 2^(n-1) - 1 non-trivial labelings; returns (best_sse, list of optimal partitions as frozensets)."""
    X = np.asarray(points, dtype=np.float64)
    n = len(X)
    best = math.inf
    optima = []
    for tail in itertools.product((0, 1), repeat=n - 1):
        labels = np.array((0,) + tail)
        if labels.max() == 0:
            continue
        sse = sum(float(((X[labels == k] - X[labels == k].mean(axis=0)) ** 2).sum()) for k in (0, 1))
        part = frozenset({frozenset(np.nonzero(labels == 0)[0].tolist()), frozenset(np.nonzero(labels == 1)[0].tolist())})
        if sse < best - 1e-9:
            best, optima = sse, [part]
        elif abs(sse - best) <= 1e-9:
            optima.append(part)
    return best, optima


def point_in_polygon(px, py, polygon):
    """Crossing-number test (W. R. Franklin's PNPOLY)."""
    inside = False
    n = len(polygon)
    j = n - 1
    for i in range(n):
        xi, yi = polygon[i]
        xj, yj = polygon[j]
        if (yi > py) != (yj > py) and px < (xj - xi) * (py - yi) / (yj - yi) + xi:
            inside = not inside
        j = i
    return inside


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


# --- acceptance reporting ---------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)``; the summary is printed at session end."""

    def record(number, title, passed, detail):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
