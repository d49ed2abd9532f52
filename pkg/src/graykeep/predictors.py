"""Pixel predictors.

MED and AGSP work on the nine causal samples south/east of the current
pixel (see :class:`Context9`). Those samples are never modified before the
current pixel during a forward scan, and are already restored when the
decoder reaches it in reverse order.

All arithmetic is integer. AGSP gradients are scaled by 630 (the lcm of
their denominators 9, 7, 6 and 5) so comparisons and the final blend are
exact.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

ABSENT = -1


class Context9(NamedTuple):
    """Causal neighbourhood of pixel (i, j) for one channel.

    ``e``/``ee`` are (i, j+1)/(i, j+2); ``s``/``ss`` are (i+1, j)/(i+2, j);
    ``se``, ``sw``, ``see`` sit in row i+1 at columns j+1, j-1, j+2;
    ``sse``, ``ssw`` sit in row i+2 at columns j+1, j-1.
    """

    e: int
    ee: int
    s: int
    se: int
    sw: int
    ss: int
    sse: int
    ssw: int
    see: int

    @classmethod
    def at(cls, plane, i, j):
        p = plane
        return cls(int(p[i, j + 1]), int(p[i, j + 2]), int(p[i + 1, j]), int(p[i + 1, j + 1]),
                   int(p[i + 1, j - 1]), int(p[i + 2, j]), int(p[i + 2, j + 1]),
                   int(p[i + 2, j - 1]), int(p[i + 1, j + 2]))


class PredictionPair(NamedTuple):
    p_med: int
    p_agsp: int

    @property
    def p1(self):
        return first_level(self.p_med, self.p_agsp)

    @property
    def p_min(self):
        return min(self.p_med, self.p_agsp)

    @property
    def p_max(self):
        return max(self.p_med, self.p_agsp)


@njit(cache=True)
def round_div(num, den):
    """num / den rounded to nearest, halves away from zero."""
    if den < 0:
        num, den = -num, -den
    if num >= 0:
        return (2 * num + den) // (2 * den)
    return -((-2 * num + den) // (2 * den))


@njit(cache=True)
def clamp8(v):
    return 0 if v < 0 else (255 if v > 255 else v)


@njit(cache=True)
def med(e, s, se):
    if se >= max(s, e):
        return min(e, s)
    if se <= min(s, e):
        return max(e, s)
    return s + e - se


@njit(cache=True)
def agsp(e, ee, s, se, sw, ss, sse, ssw, see):
    # gradients D * 630, D = sum / den + 1
    dh = (2 * abs(e - ee) + 2 * abs(s - se) + 2 * abs(s - sw) + abs(ss - sse)
          + abs(ss - ssw) + abs(se - see) + 9) * 70
    dv = (2 * abs(e - se) + 2 * abs(s - ss) + abs(sw - ssw) + abs(ee - see)
          + abs(se - sse) + 7) * 90
    dp = (2 * abs(e - s) + 2 * abs(s - ssw) + abs(se - ss) + abs(ee - see) + 6) * 105
    dm = (2 * abs(e - see) + 2 * abs(s - sse) + abs(sw - ss) + 5) * 126
    grads = (dh, dv, dp, dm)
    pix = (e, s, sw, se)
    # two smallest, ties resolved in H, V, +45, -45 order
    a = 0
    for k in range(1, 4):
        if grads[k] < grads[a]:
            a = k
    b = 1 if a == 0 else 0
    for k in range(4):
        if k != a and grads[k] < grads[b]:
            b = k
    d1, d2 = grads[a], grads[b]
    return round_div(d1 * pix[b] + d2 * pix[a], d1 + d2)


@njit(cache=True)
def first_level(p_med, p_agsp):
    return (p_med + p_agsp + 1) // 2


@njit(cache=True)
def second_level(p_min, p_max, p_wm1):
    if p_wm1 <= p_min:
        return p_min
    if p_wm1 >= p_max:
        return p_max
    return ABSENT


@njit(cache=True)
def pair_at(plane, i, j):
    e = plane[i, j + 1]
    s = plane[i + 1, j]
    se = plane[i + 1, j + 1]
    pm = med(e, s, se)
    pa = agsp(e, plane[i, j + 2], s, se, plane[i + 1, j - 1], plane[i + 2, j],
              plane[i + 2, j + 1], plane[i + 2, j - 1], plane[i + 1, j + 2])
    return pm, pa


@njit(cache=True)
def poly(g1, g2, g3, k1, k2, k3, x):
    if g1 == g2 or g1 == g3 or g2 == g3:
        return round_div(k1 + k2 + k3, 3)
    # Lagrange form of the exact 3-point least-squares fit
    den = (g1 - g2) * (g1 - g3) * (g2 - g3)
    num = (k1 * (x - g2) * (x - g3) * (g2 - g3)
           - k2 * (x - g1) * (x - g3) * (g1 - g3)
           + k3 * (x - g1) * (x - g2) * (g1 - g2))
    return clamp8(round_div(num, den))


@njit(cache=True)
def poly_at(plane, gray, i, j):
    return poly(gray[i + 1, j], gray[i, j + 1], gray[i + 1, j + 1],
                plane[i + 1, j], plane[i, j + 1], plane[i + 1, j + 1], gray[i, j])


# ---------------------------------------------------------------------------
# public scalar API

def med_predict(ctx: Context9) -> int:
    """Median edge detector on the (e, s, se) corner."""
    return int(med(ctx.e, ctx.s, ctx.se))


def agsp_predict(ctx: Context9) -> int:
    """Gradient-selective blend of the two causal pixels along the flattest directions."""
    return int(agsp(*ctx))


def predict_pair(ctx: Context9) -> PredictionPair:
    return PredictionPair(med_predict(ctx), agsp_predict(ctx))


def second_level_predict(pair: PredictionPair, p_wm1: int) -> int | None:
    """Re-prediction after the first embed; ``None`` when ``p_wm1`` sits strictly inside."""
    p2 = int(second_level(pair.p_min, pair.p_max, p_wm1))
    return None if p2 == ABSENT else p2


def poly_predict(gr_neighbors, k, gr_here) -> int:
    """Quadratic gray-to-channel fit through three neighbours, evaluated at ``gr_here``.

    Falls back to the rounded mean of ``k`` when the neighbour grays are not
    pairwise distinct (the normal matrix is singular then).
    """
    g1, g2, g3 = (int(v) for v in gr_neighbors)
    k1, k2, k3 = (int(v) for v in k)
    return int(poly(g1, g2, g3, k1, k2, k3, int(gr_here)))


def poly_fit(gr_neighbors, k):
    """Least-squares coefficients (a, b, c) via the normal equations, in floating point.

    Diagnostic only; :func:`poly_predict` is the bit-exact path.
    """
    g = np.asarray(gr_neighbors, dtype=float)
    design = np.column_stack([np.ones(3), g, g * g])
    beta, *_ = np.linalg.lstsq(design, np.asarray(k, dtype=float), rcond=None)
    return tuple(beta)
