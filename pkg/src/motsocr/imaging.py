"""Image representation, binarization, projection-profile segmentation and
height normalization.

Pages are cut into lines on blank rows of the row projection, lines into
words on blank columns of the column projection. Everything here is a pure
function; images are immutable once constructed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

Axis = Literal["rows", "columns"]

#: Intensities between words/lines up to this value count as blank.
DEFAULT_EPSILON = 0
#: Column runs separated by fewer than this many blank columns are merged
#: into one word (intra-letter gaps must not split words).
DEFAULT_GAP_MIN = 2
#: Height every word image is normalized to before feeding the network.
DEFAULT_HEIGHT = 32


class ImagingError(ValueError):
    pass


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster, row-major, shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ImagingError("empty input")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ImagingError("intensity outside [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BinaryImage:
    """Ink mask, row-major, shape (height, width); 1 = ink, 0 = background."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ImagingError("empty input")
        if not np.isin(px, (0, 1)).all():
            raise ImagingError("binary image must contain only 0 and 1")
        object.__setattr__(self, "pixels", px.astype(np.uint8))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def ink_count(self) -> int:
        return int(self.pixels.sum())


@dataclass(frozen=True)
class PixelRun:
    """Half-open index interval [start, end) along one axis."""

    start: int
    end: int
    axis: Axis

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ImagingError(f"invalid run [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Projection:
    """Per-row (or per-column) ink pixel counts."""

    axis: Axis
    sums: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sums", np.asarray(self.sums, dtype=np.int64))


def otsu_threshold(img: GrayImage) -> int:
    """Threshold in [0, 254] maximizing between-class variance of the
    256-bin histogram; ties break toward the smallest threshold."""
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    n = hist.sum()
    w0 = np.cumsum(hist)[:255]            # weight of class {0..t}
    w1 = n - w0
    m0 = np.cumsum(hist * np.arange(256))[:255]
    mu_total = m0[-1] + hist[255] * 255
    # between-class variance; degenerate splits (empty class) score 0
    with np.errstate(divide="ignore", invalid="ignore"):
        mean0 = np.where(w0 > 0, m0 / w0, 0.0)
        mean1 = np.where(w1 > 0, (mu_total - m0) / w1, 0.0)
    var_b = w0 * w1 * (mean0 - mean1) ** 2
    return int(np.argmax(var_b))


def binarize(img: GrayImage, t: int) -> BinaryImage:
    """Mark the dark side of the threshold as ink (dark text on light
    background becomes 1)."""
    if not 0 <= t <= 254:
        raise ImagingError(f"threshold {t} outside [0, 254]")
    return BinaryImage((img.pixels <= t).astype(np.uint8))


def axis_projection(img: BinaryImage, axis: Axis) -> Projection:
    if axis == "rows":
        sums = img.pixels.sum(axis=1, dtype=np.int64)
    elif axis == "columns":
        sums = img.pixels.sum(axis=0, dtype=np.int64)
    else:
        raise ImagingError(f"unknown axis {axis!r}")
    return Projection(axis=axis, sums=sums)


def find_content_runs(p: Projection, epsilon: int = DEFAULT_EPSILON) -> list[PixelRun]:
    """Maximal runs of consecutive indices with sums > epsilon, ascending."""
    if epsilon < 0:
        raise ImagingError("epsilon must be >= 0")
    mask = p.sums > epsilon
    if not mask.any():
        return []
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    starts, ends = edges[0::2], edges[1::2]
    return [PixelRun(int(s), int(e), p.axis) for s, e in zip(starts, ends)]


def merge_close_runs(runs: list[PixelRun], gap_min: int) -> list[PixelRun]:
    """Merge adjacent runs separated by fewer than gap_min blank indices."""
    if not runs:
        return []
    merged = [runs[0]]
    for run in runs[1:]:
        prev = merged[-1]
        if run.start - prev.end < gap_min:
            merged[-1] = PixelRun(prev.start, run.end, run.axis)
        else:
            merged.append(run)
    return merged


def segment_lines(page: BinaryImage, epsilon: int = DEFAULT_EPSILON) -> list[BinaryImage]:
    """One full-width sub-image per blank-separated band of ink rows."""
    runs = find_content_runs(axis_projection(page, "rows"), epsilon)
    return [BinaryImage(page.pixels[r.start : r.end, :]) for r in runs]


def segment_words(
    line: BinaryImage,
    epsilon: int = DEFAULT_EPSILON,
    gap_min: int = DEFAULT_GAP_MIN,
) -> list[BinaryImage]:
    """One sub-image per blank-separated band of ink columns, left to right.

    Runs closer than gap_min blank columns are merged so natural gaps
    between letters do not split a word.
    """
    runs = find_content_runs(axis_projection(line, "columns"), epsilon)
    runs = merge_close_runs(runs, gap_min)
    return [BinaryImage(line.pixels[:, r.start : r.end]) for r in runs]


def tight_crop_unit_pad(word: BinaryImage) -> BinaryImage:
    """Minimal bounding box of the ink plus exactly one blank pixel on every
    side. Idempotent."""
    px = word.pixels
    rows = np.flatnonzero(px.any(axis=1))
    cols = np.flatnonzero(px.any(axis=0))
    if rows.size == 0:
        raise ImagingError("blank word")
    core = px[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    return BinaryImage(np.pad(core, 1))


def normalize_height(word: BinaryImage, height: int = DEFAULT_HEIGHT) -> GrayImage:
    """Resample the ink mask to the given height with bilinear interpolation,
    preserving aspect ratio (width rounds half-up, floor 1). Output values are
    the interpolated [0, 1] mask scaled to [0, 255]."""
    if height <= 0:
        raise ImagingError("height must be positive")
    src = word.pixels.astype(np.float64)
    h, w = src.shape
    out_w = max(1, int(w * height / h + 0.5))
    resized = _bilinear_resize(src, height, out_w)
    return GrayImage(np.clip(np.rint(resized * 255.0), 0, 255).astype(np.uint8))


def _bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Classic bilinear resampling at half-pixel centers (edge clamped)."""
    h, w = src.shape
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(np.int64)
    x0 = np.clip(np.floor(xs), 0, w - 1).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :]
    top = src[np.ix_(y0, x0)] * (1 - wx) + src[np.ix_(y0, x1)] * wx
    bot = src[np.ix_(y1, x0)] * (1 - wx) + src[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


# ---------------------------------------------------------------------------
# Composition helpers (used by page-mode dataset generation and tests)

def compose_line(words: list[BinaryImage], gap: int) -> BinaryImage:
    """Place word images left to right, top aligned, `gap` blank columns
    between them."""
    if not words:
        raise ImagingError("empty line")
    height = max(w.height for w in words)
    total_w = sum(w.width for w in words) + gap * (len(words) - 1)
    canvas = np.zeros((height, total_w), dtype=np.uint8)
    x = 0
    for w in words:
        canvas[: w.height, x : x + w.width] = w.pixels
        x += w.width + gap
    return BinaryImage(canvas)


def compose_page(lines: list[BinaryImage], line_gap: int, margin: int = 0) -> BinaryImage:
    """Stack line images top to bottom with `line_gap` blank rows between
    them and an optional blank margin on all sides."""
    if not lines:
        raise ImagingError("empty page")
    width = max(l.width for l in lines)
    total_h = sum(l.height for l in lines) + line_gap * (len(lines) - 1)
    canvas = np.zeros((total_h, width), dtype=np.uint8)
    y = 0
    for l in lines:
        canvas[y : y + l.height, : l.width] = l.pixels
        y += l.height + line_gap
    if margin > 0:
        canvas = np.pad(canvas, margin)
    return BinaryImage(canvas)


# ---------------------------------------------------------------------------
# Image I/O: 8-bit PGM (P5) and PNG

def save_gray(img: GrayImage, path) -> None:
    path = str(path)
    if path.endswith(".pgm"):
        _write_pgm(img.pixels, path)
    elif path.endswith(".png"):
        from PIL import Image

        Image.fromarray(img.pixels, mode="L").save(path)
    else:
        raise ImagingError(f"unsupported image extension: {path}")


def load_gray(path) -> GrayImage:
    path = str(path)
    if path.endswith(".pgm"):
        return GrayImage(_read_pgm(path))
    from PIL import Image

    with Image.open(path) as im:
        return GrayImage(np.asarray(im.convert("L")))


def save_binary(img: BinaryImage, path) -> None:
    """Binary masks are stored as PGM/PNG with ink = 255 on black = 0."""
    save_gray(GrayImage(img.pixels * np.uint8(255)), path)


def load_binary(path) -> BinaryImage:
    gray = load_gray(path)
    if not np.isin(gray.pixels, (0, 255)).all():
        raise ImagingError(f"not a binary image (values beyond 0/255): {path}")
    return BinaryImage((gray.pixels == 255).astype(np.uint8))


def _write_pgm(pixels: np.ndarray, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (pixels.shape[1], pixels.shape[0]))
        fh.write(pixels.tobytes())


def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ImagingError(f"not a P5 PGM file: {path}")
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":  # comment to end of line
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ImagingError(f"unsupported PGM maxval {maxval} (want 255)")
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ImagingError(f"truncated PGM raster: {path}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
