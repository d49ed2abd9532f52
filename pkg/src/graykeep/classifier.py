"""Local complexity on the (invariant) grayscale and three-way region split."""
from __future__ import annotations

from enum import IntEnum

import numpy as np

from .image_core import TraversalRegion

DELTA_CAP = 255


class RegionClass(IntEnum):
    SMOOTH = 0
    NORMAL = 1
    COMPLEX = 2


def _delta_from_samples(c, n, s, w, e):
    s1 = c + n + s + w + e
    s2 = c * c + n * n + s * s + w * w + e * e
    # population variance = (5*s2 - s1^2) / 25, floored
    return np.minimum((5 * s2 - s1 * s1) // 25, DELTA_CAP)


def delta(gray, i, j):
    """Floored population variance of gr(i, j) and its 4-neighbours, capped at 255."""
    TraversalRegion.of(gray).index(i, j)
    g = gray.astype(np.int64)
    return int(_delta_from_samples(g[i, j], g[i - 1, j], g[i + 1, j], g[i, j - 1], g[i, j + 1]))


def delta_map(gray):
    """Complexity of every unit in the traversal region, in scan order."""
    region = TraversalRegion.of(gray)
    g = np.asarray(gray, dtype=np.int64)
    rs, cs = region.slices()
    r0, r1, c0, c1 = rs.start, rs.stop, cs.start, cs.stop
    d = _delta_from_samples(g[r0:r1, c0:c1], g[r0 - 1:r1 - 1, c0:c1], g[r0 + 1:r1 + 1, c0:c1],
                            g[r0:r1, c0 - 1:c1 - 1], g[r0:r1, c0 + 1:c1 + 1])
    return d.ravel()


def _check_thresholds(t1, t2):
    if not (0 <= t1 <= 255 and 0 <= t2 <= 255):
        raise ValueError(f"thresholds must lie in [0, 255], got t1={t1}, t2={t2}")
    if t1 > t2:
        raise ValueError(f"t1 must not exceed t2 (t1={t1}, t2={t2})")


def classify(d, t1, t2):
    """SMOOTH if d <= t1, NORMAL if t1 < d <= t2, else COMPLEX."""
    _check_thresholds(t1, t2)
    if d <= t1:
        return RegionClass.SMOOTH
    if d <= t2:
        return RegionClass.NORMAL
    return RegionClass.COMPLEX


def classify_map(deltas, t1, t2):
    _check_thresholds(t1, t2)
    deltas = np.asarray(deltas)
    out = np.full(deltas.shape, RegionClass.COMPLEX, dtype=np.int8)
    out[deltas <= t2] = RegionClass.NORMAL
    out[deltas <= t1] = RegionClass.SMOOTH
    return out
