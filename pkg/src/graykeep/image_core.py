"""Image containers, BT.601 grayscale, traversal geometry and file I/O.

Images are plain ``numpy`` arrays of shape ``(rows, cols, 3)`` and dtype
``uint8`` in R, G, B order. Grayscale is computed in integer arithmetic so
encoder and decoder agree bit for bit.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ImageFormatError, ImageTooSmallError

MIN_SIDE = 8

# round(0.299 r + 0.587 g + 0.114 b), half away from zero, scaled by 1000
W_R, W_G, W_B = 299, 587, 114


@njit(cache=True)
def gray_value(r, g, b):
    return (W_R * r + W_G * g + W_B * b + 500) // 1000


def to_gray(img):
    """Per-pixel grayscale of an RGB image as a ``uint8`` array."""
    img = np.asarray(img)
    acc = (W_R * img[..., 0].astype(np.int64) + W_G * img[..., 1].astype(np.int64)
           + W_B * img[..., 2].astype(np.int64))
    return ((acc + 500) // 1000).astype(np.uint8)


def check_color_image(X, min_side=MIN_SIDE):
    """Validate an RGB raster and return it as a C-contiguous ``uint8`` array."""
    X = np.asarray(X)
    if X.ndim != 3 or X.shape[2] != 3:
        raise ImageFormatError(f"not RGB: expected shape (rows, cols, 3), got {X.shape}")
    if X.dtype != np.uint8:
        if not np.issubdtype(X.dtype, np.integer):
            raise ImageFormatError(f"samples must be integers, got {X.dtype}")
        if X.size and (X.min() < 0 or X.max() > 255):
            raise ImageFormatError("samples must lie in [0, 255]")
    if X.shape[0] < min_side or X.shape[1] < min_side:
        raise ImageTooSmallError(f"image must be at least {min_side}x{min_side}, got {X.shape[1]}x{X.shape[0]}")
    return np.ascontiguousarray(X, dtype=np.uint8)


def unit_index_bits(img):
    """Width in bits of a unit index: ceil(log2(cols * rows))."""
    rows, cols = np.shape(img)[:2]
    n = rows * cols
    return max(0, math.ceil(math.log2(n))) if n > 1 else 0


@dataclass(frozen=True)
class TraversalRegion:
    """Units that carry data, in row-major order.

    Rows start at 2: row 0 holds the header and row 1 is the north
    neighbour used by the complexity measure of row-2 units, so neither can
    change grayscale-relevant state. The last two rows and columns, and
    column 0, are dropped so every predictor context is in bounds.
    """

    rows: int
    cols: int

    FIRST_ROW = 2
    FIRST_COL = 1

    @classmethod
    def of(cls, img):
        rows, cols = np.shape(img)[:2]
        if rows < MIN_SIDE or cols < MIN_SIDE:
            raise ImageTooSmallError(f"image must be at least {MIN_SIDE}x{MIN_SIDE}")
        return cls(rows, cols)

    @property
    def height(self):
        return self.rows - 2 - self.FIRST_ROW

    @property
    def width(self):
        return self.cols - 2 - self.FIRST_COL

    def __len__(self):
        return self.height * self.width

    def position(self, k):
        return self.FIRST_ROW + k // self.width, self.FIRST_COL + k % self.width

    def index(self, i, j):
        if not (self.FIRST_ROW <= i < self.FIRST_ROW + self.height
                and self.FIRST_COL <= j < self.FIRST_COL + self.width):
            raise IndexError(f"({i}, {j}) is outside the traversal region")
        return (i - self.FIRST_ROW) * self.width + (j - self.FIRST_COL)

    def slices(self):
        return (slice(self.FIRST_ROW, self.FIRST_ROW + self.height),
                slice(self.FIRST_COL, self.FIRST_COL + self.width))


# ---------------------------------------------------------------------------
# file I/O

def _read_token(buf, pos):
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PPM header")
    return buf[start:pos], pos


def _load_ppm(buf):
    magic, pos = _read_token(buf, 0)
    if magic in (b"P5", b"P2", b"P1", b"P4"):
        raise ImageFormatError("not RGB: grayscale/bitmap PNM file")
    if magic != b"P6":
        raise ImageFormatError(f"unsupported PNM variant {magic!r}")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"bad PPM header field {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"non-8-bit depth (maxval {maxval})")
    pos += 1  # single whitespace byte before raster
    need = width * height * 3
    raster = buf[pos:pos + need]
    if len(raster) < need:
        raise ImageFormatError(f"truncated PPM raster: {len(raster)} of {need} bytes")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def _load_png(path):
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.mode != "RGB":
                if im.mode in ("L", "LA", "1", "I", "I;16", "P"):
                    raise ImageFormatError(f"not RGB: PNG mode {im.mode}")
                raise ImageFormatError(f"unsupported PNG mode {im.mode} (need 8-bit RGB, no alpha)")
            im.load()
            return np.asarray(im, dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot read PNG {path}: {exc}") from exc


def load_image(path):
    """Read a binary PPM (P6) or 8-bit RGB PNG file."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(26)
        if head.startswith(b"\x89PNG"):
            if len(head) < 26:
                raise ImageFormatError("truncated PNG header")
            if head[24] != 8:
                raise ImageFormatError(f"non-8-bit depth ({head[24]} bits per sample)")
            img = _load_png(path)
        elif head[:1] == b"P":
            fh.seek(0)
            img = _load_ppm(fh.read())
        else:
            raise ImageFormatError(f"unsupported image format: {path}")
    return img


def save_image(img, path):
    """Write ``img`` losslessly; format follows the extension (.ppm or .png)."""
    img = check_color_image(img, min_side=1)
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext in (".ppm", ".pnm"):
        rows, cols = img.shape[:2]
        with open(path, "wb") as fh:
            fh.write(b"P6\n%d %d\n255\n" % (cols, rows))
            fh.write(img.tobytes())
    elif ext == ".png":
        from PIL import Image

        Image.fromarray(img).save(path, format="PNG")
    else:
        raise ImageFormatError(f"unsupported output extension {ext!r} (use .ppm or .png)")
