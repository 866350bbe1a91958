"""Raster primitives: decoding, luminance, Sobel gradients, Canny edges and unit masks.

Images are plain numpy arrays in row-major (height, width) order: ``uint8``
luminance for gray images, ``(h, w, 3)`` ``uint8`` for RGB, and ``bool`` for
edge maps and masks. Pixel ``(x, y)`` is ``arr[y, x]``; the origin is the
top-left pixel center with y pointing down.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from ._validation import check_edge_map, check_gray_image, check_rgb_image, check_same_shape
from .errors import CorruptPayload, ImageTooSmall, InvalidThresholds, UnsupportedFormat

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Sobel kernels in (row, col) layout; x grows rightward, y downward.
SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int64)
SOBEL_Y = SOBEL_X.T.copy()

DEFAULT_CANNY_LOW = 50.0
DEFAULT_CANNY_HIGH = 150.0


# ---------------------------------------------------------------------------
# Decoding / encoding


def decode_image(data: bytes) -> np.ndarray:
    """Decode a PNG or PPM payload.

    Returns a ``(h, w)`` array for single-channel PNGs and ``(h, w, 3)`` for
    everything else; alpha is dropped. Use :func:`load_gray` to always get
    luminance.
    """
    data = bytes(data)
    if data.startswith(PNG_SIGNATURE):
        return _decode_png(data)
    if data[:2] in (b"P3", b"P6"):
        return _decode_ppm(data)
    if data[:1] == b"P" and data[1:2].isdigit():
        raise UnsupportedFormat(f"netpbm variant {data[:2].decode()} is not supported (P3/P6 only)")
    raise UnsupportedFormat("payload is neither PNG nor PPM")


def _decode_png(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8).copy()
            if im.mode in ("1", "I", "I;16", "F"):
                return np.asarray(im.convert("L"), dtype=np.uint8).copy()
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (OSError, UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise CorruptPayload(f"cannot decode PNG: {exc}") from exc


def _ppm_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset just past the last one.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise CorruptPayload("truncated PPM header")
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _decode_ppm(data: bytes) -> np.ndarray:
    (magic, w, h, maxval), pos = _ppm_tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise CorruptPayload(f"non-numeric PPM header field: {exc}") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise CorruptPayload(f"invalid PPM header: {width}x{height}, maxval {maxval}")
    count = width * height * 3
    if magic == b"P3":
        try:
            values = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError as exc:
            raise CorruptPayload(f"non-numeric PPM sample: {exc}") from exc
        if values.size < count:
            raise CorruptPayload(f"PPM has {values.size} samples, expected {count}")
        values = values[:count]
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        raw = data[pos : pos + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise CorruptPayload("truncated PPM raster")
        values = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if values.min(initial=0) < 0 or values.max(initial=0) > maxval:
        raise CorruptPayload("PPM sample outside [0, maxval]")
    if maxval != 255:
        values = (values * 255 * 2 + maxval) // (2 * maxval)
    return values.reshape(height, width, 3).astype(np.uint8)


def encode_png(img) -> bytes:
    arr = np.asarray(img)
    arr = check_gray_image(arr) if arr.ndim == 2 else check_rgb_image(arr)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def encode_ppm(img) -> bytes:
    """ASCII (P3) PPM; gray images are written with R = G = B."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = np.repeat(check_gray_image(arr)[:, :, None], 3, axis=2)
    arr = check_rgb_image(arr)
    h, w = arr.shape[:2]
    rows = [" ".join(str(v) for v in row.ravel()) for row in arr]
    return (f"P3\n{w} {h}\n255\n" + "\n".join(rows) + "\n").encode("ascii")


def read_image(path) -> np.ndarray:
    return decode_image(Path(path).read_bytes())


def load_gray(path) -> np.ndarray:
    img = read_image(path)
    return img if img.ndim == 2 else to_grayscale(img)


def write_image(path, img):
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        payload = encode_png(img)
    elif suffix in (".ppm", ".pnm"):
        payload = encode_ppm(img)
    else:
        raise UnsupportedFormat(f"cannot write {suffix or 'extension-less'} files (PNG/PPM only)")
    path.write_bytes(payload)


# ---------------------------------------------------------------------------
# Luminance and gradients


def to_grayscale(rgb) -> np.ndarray:
    """ITU-R 601 luma, rounded half-up: ``round(0.299 R + 0.587 G + 0.114 B)``."""
    arr = check_rgb_image(rgb).astype(np.int64)
    # weights scaled by 1000 keep the arithmetic exact
    luma = (299 * arr[..., 0] + 587 * arr[..., 1] + 114 * arr[..., 2] + 500) // 1000
    return np.clip(luma, 0, 255).astype(np.uint8)


class GradientField(NamedTuple):
    magnitude: np.ndarray
    direction: np.ndarray

    @property
    def shape(self):
        return self.magnitude.shape


def sobel_gradients(img) -> GradientField:
    """3x3 Sobel gradient; the one-pixel border ring has magnitude and direction 0."""
    arr = check_gray_image(img).astype(np.int64)
    h, w = arr.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"Sobel needs at least 3x3 pixels, got {w}x{h}")
    gx = np.zeros((h, w), dtype=np.int64)
    gy = np.zeros((h, w), dtype=np.int64)
    for dy in range(3):
        for dx in range(3):
            window = arr[dy : h - 2 + dy, dx : w - 2 + dx]
            if SOBEL_X[dy, dx]:
                gx[1:-1, 1:-1] += SOBEL_X[dy, dx] * window
            if SOBEL_Y[dy, dx]:
                gy[1:-1, 1:-1] += SOBEL_Y[dy, dx] * window
    magnitude = np.hypot(gx, gy)
    direction = np.arctan2(gy, gx).astype(np.float64)
    return GradientField(magnitude, direction)


# (dx, dy) step along the gradient for each quantized direction bin
_NMS_STEPS = ((1, 0), (1, 1), (0, 1), (-1, 1))


def quantize_direction(direction: np.ndarray) -> np.ndarray:
    """Map gradient angles to 4 bins: 0 horizontal, 1 diagonal (+x,+y), 2 vertical, 3 anti-diagonal."""
    deg = np.mod(np.degrees(direction), 180.0)
    return (np.floor((deg + 22.5) / 45.0).astype(np.int64)) % 4


def _shift(arr: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """out[y, x] = arr[y + dy, x + dx], zero outside the image."""
    h, w = arr.shape
    out = np.zeros_like(arr)
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    ys_src = slice(max(0, dy), min(h, h + dy))
    xs_src = slice(max(0, dx), min(w, w + dx))
    out[ys, xs] = arr[ys_src, xs_src]
    return out


def non_maximum_suppression(grad: GradientField) -> np.ndarray:
    """Boolean map of local maxima along the quantized gradient direction.

    A pixel must be strictly greater than its backward neighbour and at least
    equal to its forward one, so a plateau two pixels wide keeps exactly one.
    """
    mag = grad.magnitude
    bins = quantize_direction(grad.direction)
    keep = np.zeros(mag.shape, dtype=bool)
    for b, (dx, dy) in enumerate(_NMS_STEPS):
        forward = _shift(mag, dx, dy)
        backward = _shift(mag, -dx, -dy)
        keep |= (bins == b) & (mag > backward) & (mag >= forward)
    return keep


def hysteresis(candidates: np.ndarray, strong: np.ndarray) -> np.ndarray:
    """Keep 8-connected components of ``candidates`` that contain a strong pixel."""
    labels, n = ndimage.label(candidates, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return np.zeros(candidates.shape, dtype=bool)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[np.unique(labels[strong & candidates])] = True
    seeded[0] = False
    return seeded[labels]


def canny_edges(img, low=DEFAULT_CANNY_LOW, high=DEFAULT_CANNY_HIGH) -> np.ndarray:
    """Canny edge map (no pre-smoothing) on the raw Sobel magnitude scale.

    Thresholds compare against the L2 Sobel magnitude of 0..255 luminance,
    whose maximum is about 1442.
    """
    if not 0 <= low <= high:
        raise InvalidThresholds(f"need 0 <= low <= high, got low={low}, high={high}")
    grad = sobel_gradients(img)
    thin = non_maximum_suppression(grad)
    candidates = thin & (grad.magnitude >= low)
    strong = thin & (grad.magnitude >= high)
    return hysteresis(candidates, strong)


# ---------------------------------------------------------------------------
# Unit masks


@dataclass(frozen=True, eq=False)
class UnitMask:
    """Pixels belonging to one scaffold unit plus their tight inclusive bbox."""

    inside: np.ndarray
    bbox: tuple  # (x_min, y_min, x_max, y_max)

    @classmethod
    def from_array(cls, inside) -> "UnitMask":
        inside = np.asarray(inside, dtype=bool)
        if inside.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {inside.shape}")
        ys, xs = np.nonzero(inside)
        if xs.size == 0:
            raise ValueError("mask has no set pixels")
        inside = inside.copy()
        inside.setflags(write=False)
        return cls(inside, (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())))

    @property
    def width(self) -> int:
        return self.inside.shape[1]

    @property
    def height(self) -> int:
        return self.inside.shape[0]

    @property
    def area(self) -> int:
        return int(self.inside.sum())


def apply_mask(edges, mask: UnitMask) -> np.ndarray:
    edges = check_edge_map(edges)
    check_same_shape(edges, mask.inside, "edge map and mask")
    return edges & mask.inside
