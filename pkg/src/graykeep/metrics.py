"""Distortion and grayscale-invariance measurements."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .image_core import to_gray


def _same_shape(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b):
    """Mean squared error over all rows, columns and channels, as an exact Fraction."""
    a, b = _same_shape(a, b)
    d = a.astype(np.int64) - b.astype(np.int64)
    return Fraction(int((d * d).sum()), d.size)


def psnr(a, b):
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical images."""
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(255 ** 2 / float(err))


def ued(cover_unit, marked_unit, bits_in_R):
    """Unit embedding distortion: squared error over R, G, B, per bit when R holds two."""
    if bits_in_R not in (1, 2):
        raise ValueError("bits_in_R must be 1 or 2")
    total = sum((int(m) - int(c)) ** 2 for c, m in zip(cover_unit, marked_unit))
    return Fraction(total, bits_in_R)


def invariance_report(cover, marked):
    """Pixels whose grayscale differs: ``(list of (row, col), count)``."""
    cover, marked = _same_shape(cover, marked)
    rows, cols = np.nonzero(to_gray(cover) != to_gray(marked))
    changed = list(zip(rows.tolist(), cols.tolist()))
    return changed, len(changed)


def format_psnr(value):
    return "inf" if math.isinf(value) else f"{value:.4f}"


@dataclass
class QualityReport:
    mse: Fraction
    psnr: float
    gray_changed_pixels: int
    capacity_bits: int
    ued_histogram: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, cover, marked, capacity_bits=0):
        _, count = invariance_report(cover, marked)
        return cls(mse(cover, marked), psnr(cover, marked), count, capacity_bits)

    def as_dict(self):
        d = asdict(self)
        d["mse"] = float(self.mse)
        d["psnr"] = format_psnr(self.psnr)
        return d
