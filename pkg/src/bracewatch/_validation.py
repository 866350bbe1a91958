"""Input validation helpers shared by the public functions and estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import DimensionMismatch


def check_gray_image(img, *, name="image") -> np.ndarray:
    """Return ``img`` as a 2-D uint8 array, raising ``ValueError`` otherwise.

    Integer or float input is accepted when every value already lies in
    [0, 255] and is integral; nothing is silently clipped.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (height, width), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype == bool or not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{name} must be numeric luminance, got dtype {arr.dtype}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
        raise ValueError(f"{name} values must lie in [0, 255]")
    if not np.all(arr == np.round(arr)):
        raise ValueError(f"{name} values must be integral")
    return arr.astype(np.uint8)


def check_rgb_image(img, *, name="image") -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name} must have shape (height, width, 3), got {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError(f"{name} values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def check_edge_map(edges, *, name="edges") -> np.ndarray:
    arr = np.asarray(edges)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel")
    return arr.astype(bool, copy=False)


def check_same_shape(a: np.ndarray, b: np.ndarray, what="inputs"):
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(f"{what} differ in size: {a.shape[:2]} vs {b.shape[:2]}")


def check_positive(value, name, *, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a real number'}, got {value!r}")
    if not value > 0:
        raise ValueError(f"{name} must be strictly positive, got {value!r}")
    return value


def check_fraction(value, name):
    check_positive(value, name)
    if value > 1:
        raise ValueError(f"{name} must lie in (0, 1], got {value!r}")
    return value
