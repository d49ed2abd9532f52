"""Unit-level operations: prediction-error expansion, ECB and green balancing.

A *unit* is one pixel position across R, G and B. R carries payload bits,
B carries the error-correcting bit (ECB) of the previous embedding unit and
G is re-balanced so the grayscale of the unit does not change.
"""
from __future__ import annotations

from numba import njit

from .classifier import RegionClass
from .errors import CorruptStreamError
from .image_core import W_B, W_G, W_R
from .predictors import ABSENT, PredictionPair, first_level, second_level

PROPOSED, HOU, LI = 0, 1, 2
SMOOTH, NORMAL, COMPLEX = int(RegionClass.SMOOTH), int(RegionClass.NORMAL), int(RegionClass.COMPLEX)


@njit(cache=True)
def expand_embed(p, pred, sd):
    pe = p - pred
    if pe >= 0:
        return p + pe + sd
    return p + pe - sd


@njit(cache=True)
def expand_embed_down(p, pred, sd):
    """Expansion that moves a zero error downwards (used against the lower clamp)."""
    pe = p - pred
    if pe > 0:
        return p + pe + sd
    return p + pe - sd


@njit(cache=True)
def expand_extract(pm, pred):
    e = pm - pred
    if e >= 0:
        sd = e & 1
        return sd, pred + (e - sd) // 2
    sd = (-e) & 1
    return sd, pred + (e + sd) // 2


@njit(cache=True)
def _ceil_div(a, b):
    return -((-a) // b)


@njit(cache=True)
def green_range(gr, r, b):
    """Inclusive [lo, hi] of green values giving grayscale ``gr``; lo > hi when empty."""
    rest = W_R * r + W_B * b
    lo = _ceil_div(1000 * gr - 500 - rest, W_G)
    hi = _ceil_div(1000 * gr + 500 - rest, W_G) - 1
    if lo < 0:
        lo = 0
    if hi > 255:
        hi = 255
    return lo, hi


@njit(cache=True)
def adjust(gr, r, b, g_orig):
    """Green closest to ``g_orig`` preserving ``gr``; -1 when none exists."""
    lo, hi = green_range(gr, r, b)
    if lo > hi:
        return -1
    if g_orig <= lo:
        return lo
    if g_orig >= hi:
        return hi
    return g_orig


@njit(cache=True)
def ecb_of(gr, r, b, g):
    lo, hi = green_range(gr, r, b)
    if g < lo or g > hi:
        return -1
    return g - lo


@njit(cache=True)
def green_from_ecb(gr, r, b, ecb):
    lo, hi = green_range(gr, r, b)
    g = lo + ecb
    if lo > hi or g > hi:
        return -1
    return g


@njit(cache=True)
def embed_r(scheme, cls, p, p1, p_min, p_max, sd1, sd2):
    """Marked R and the number of bits it consumed (sd2 only read when 2)."""
    if scheme == HOU or cls == NORMAL:
        return expand_embed(p, p1, sd1), 1
    w1 = expand_embed(p, p1, sd1)
    if scheme == LI:
        return expand_embed(w1, p1, sd2), 2
    p2 = second_level(p_min, p_max, w1)
    if p2 == ABSENT:
        return w1, 1
    if p2 == p_min:
        return expand_embed_down(w1, p2, sd2), 2
    return expand_embed(w1, p2, sd2), 2


@njit(cache=True)
def extract_r(scheme, cls, pm, p1, p_min, p_max):
    """Returns (n_bits, sd1, sd2, original)."""
    if scheme == HOU or cls == NORMAL:
        sd1, p = expand_extract(pm, p1)
        return 1, sd1, 0, p
    if scheme == LI:
        sd2, w1 = expand_extract(pm, p1)
        sd1, p = expand_extract(w1, p1)
        return 2, sd1, sd2, p
    if p_min < pm < p_max:
        sd1, p = expand_extract(pm, p1)
        return 1, sd1, 0, p
    p2 = p_min if pm <= p_min else p_max
    sd2, w1 = expand_extract(pm, p2)
    sd1, p = expand_extract(w1, p1)
    return 2, sd1, sd2, p


# ---------------------------------------------------------------------------
# public scalar API

def _region_code(region):
    code = int(region)
    if code not in (SMOOTH, NORMAL):
        raise ValueError("only SMOOTH and NORMAL units carry data")
    return code


def embed_unit_R(p_orig, pair: PredictionPair, region, bits):
    """Embed the leading bits of ``bits`` into one R sample.

    Returns ``(p_marked, bits_consumed)``. SMOOTH units take a second bit
    unless the first marked value falls strictly between the MED and AGSP
    predictions.
    """
    code = _region_code(region)
    bits = list(bits)
    sd1 = int(bits[0])
    sd2 = int(bits[1]) if len(bits) > 1 else 0
    pm, n = embed_r(PROPOSED, code, int(p_orig), first_level(pair.p_med, pair.p_agsp),
                    pair.p_min, pair.p_max, sd1, sd2)
    if n == 2 and len(bits) < 2:
        raise ValueError("unit needs a second bit but only one was given")
    return int(pm), int(n)


def extract_unit_R(p_marked, pair: PredictionPair, region):
    """Inverse of :func:`embed_unit_R`: ``(bits, p_orig)`` with bits in embed order."""
    code = _region_code(region)
    n, sd1, sd2, p = extract_r(PROPOSED, code, int(p_marked), first_level(pair.p_med, pair.p_agsp),
                               pair.p_min, pair.p_max)
    bits = (int(sd1), int(sd2)) if n == 2 else (int(sd1),)
    return bits, int(p)


def adjust_green(gr_target, r_marked, b_marked, g_orig):
    """``(g_marked, feasible)``: nearest green to ``g_orig`` that keeps the grayscale."""
    g = int(adjust(int(gr_target), int(r_marked), int(b_marked), int(g_orig)))
    return (g, True) if g >= 0 else (None, False)


def green_candidates(gr, r, b):
    lo, hi = green_range(int(gr), int(r), int(b))
    return list(range(lo, hi + 1))


def compute_ecb(gr, r_orig, b_orig, g_orig):
    """Index of ``g_orig`` among the ascending greens sharing this grayscale."""
    ecb = int(ecb_of(int(gr), int(r_orig), int(b_orig), int(g_orig)))
    if ecb < 0:
        raise ValueError(f"green {g_orig} does not reproduce gray {gr} with r={r_orig}, b={b_orig}")
    return ecb


def recover_green(gr, r_orig, b_orig, ecb):
    g = int(green_from_ecb(int(gr), int(r_orig), int(b_orig), int(ecb)))
    if g < 0:
        raise CorruptStreamError(f"ECB {ecb} has no matching green for gray {gr}")
    return g
