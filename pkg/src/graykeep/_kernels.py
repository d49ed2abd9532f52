"""Compiled per-unit loops shared by all three embedding schemes.

Arrays indexed by ``k`` follow the traversal region in scan order. Image
planes are ``int64`` so differences never wrap.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .expansion import (
    COMPLEX,
    HOU,
    adjust,
    ecb_of,
    embed_r,
    expand_embed,
    expand_extract,
    extract_r,
    green_from_ecb,
)
from .predictors import first_level, pair_at, poly_at

# decode status codes
OK = 0
ERR_GREEN = 1
ERR_RANGE = 2
ERR_FIRST_ECB = 3


@njit(cache=True)
def unit_features(scheme, R, G, B, gray, r0, c0, height, width):
    """Cover-side predictions and ECBs for every unit.

    In a forward scan the south/east context of a unit is still the cover,
    so everything here is payload independent.
    """
    n = height * width
    p1r = np.empty(n, np.int64)
    pmin = np.empty(n, np.int64)
    pmax = np.empty(n, np.int64)
    p1b = np.empty(n, np.int64)
    ecb = np.empty(n, np.int64)
    for k in range(n):
        i = r0 + k // width
        j = c0 + k % width
        if scheme == HOU:
            pr = poly_at(R, gray, i, j)
            p1r[k] = pr
            pmin[k] = pr
            pmax[k] = pr
            p1b[k] = poly_at(B, gray, i, j)
        else:
            pm, pa = pair_at(R, i, j)
            p1r[k] = first_level(pm, pa)
            pmin[k] = min(pm, pa)
            pmax[k] = max(pm, pa)
            bm, ba = pair_at(B, i, j)
            p1b[k] = first_level(bm, ba)
        ecb[k] = ecb_of(gray[i, j], R[i, j], B[i, j], G[i, j])
    return p1r, pmin, pmax, p1b, ecb


@njit(cache=True)
def unit_is_safe(scheme, cls, r, g, b, gr, p1r, pmin, pmax, p1b):
    """True when no payload/ECB combination overflows or breaks the green balance."""
    for ecb in range(2):
        b2 = expand_embed(b, p1b, ecb)
        if b2 < 0 or b2 > 255:
            return False
    for sd1 in range(2):
        for sd2 in range(2):
            r2, _ = embed_r(scheme, cls, r, p1r, pmin, pmax, sd1, sd2)
            if r2 < 0 or r2 > 255:
                return False
            for ecb in range(2):
                if adjust(gr, r2, expand_embed(b, p1b, ecb), g) < 0:
                    return False
    return True


@njit(cache=True)
def plan_map(scheme, cls, r, g, b, gr, p1r, pmin, pmax, p1b):
    n = cls.size
    lm = np.zeros(n, np.uint8)
    for k in range(n):
        c = cls[k]
        if c == COMPLEX:
            continue
        if not unit_is_safe(scheme, c, r[k], g[k], b[k], gr[k], p1r[k], pmin[k], pmax[k], p1b[k]):
            lm[k] = 1
    return lm


@njit(cache=True)
def embed_walk(scheme, cls, lm, r, g, b, gr, p1r, pmin, pmax, p1b, ecb, payload,
               start, prev_ecb, out_r, out_g, out_b, out_bits):
    """Embed ``payload`` into units ``start, start+1, ...``.

    ``prev_ecb`` is the ECB the first embedding unit's B channel carries.
    Returns (k_end, padded, ecb_out, sse); k_end == -1 means the payload did
    not fit. ``out_r/g/b`` must hold r, g, b for untouched units; only
    embedding units are overwritten. ``out_bits[k]`` receives the bits R
    took, counting a zero pad bit when the payload ends mid-unit.
    """
    n = cls.size
    total = payload.size
    pos = 0
    k_end = -1
    padded = 0
    sse = 0
    for k in range(start, n):
        if pos >= total:
            break
        c = cls[k]
        if c == COMPLEX or lm[k]:
            continue
        sd1 = payload[pos]
        sd2 = payload[pos + 1] if pos + 1 < total else 0
        r2, used = embed_r(scheme, c, r[k], p1r[k], pmin[k], pmax[k], sd1, sd2)
        if pos + used > total:
            padded = 1
        pos += used
        b2 = expand_embed(b[k], p1b[k], prev_ecb)
        g2 = adjust(gr[k], r2, b2, g[k])
        prev_ecb = ecb[k]
        out_r[k] = r2
        out_g[k] = g2
        out_b[k] = b2
        out_bits[k] = used
        sse += (r2 - r[k]) ** 2 + (g2 - g[k]) ** 2 + (b2 - b[k]) ** 2
        k_end = k
    if pos < total:
        return -1, 0, 0, sse
    return k_end, padded, prev_ecb, sse


@njit(cache=True)
def extract_walk(scheme, R, G, B, gray, cls, lm, k_hi, k_lo, ecb_in, r0, c0, width):
    """Reverse scan over units k_hi..k_lo restoring R, G, B in place.

    ``ecb_in`` restores the green of the last embedding unit. Returns
    (bits_forward, ecb_out, status, bad_units) where ecb_out is the ECB read
    from the first embedding unit's B channel. The walk never stops early:
    on inconsistencies the first failing check is reported in ``status``.
    """
    bits = np.empty(2 * (k_hi - k_lo + 1), np.uint8)
    nb = 0
    cur_ecb = ecb_in
    status = OK
    bad = 0
    for k in range(k_hi, k_lo - 1, -1):
        c = cls[k]
        if c == COMPLEX or lm[k]:
            continue
        i = r0 + k // width
        j = c0 + k % width
        if scheme == HOU:
            pb = poly_at(B, gray, i, j)
            pr = poly_at(R, gray, i, j)
            lo = pr
            hi = pr
        else:
            bm, ba = pair_at(B, i, j)
            pb = first_level(bm, ba)
            rm, ra = pair_at(R, i, j)
            pr = first_level(rm, ra)
            lo = min(rm, ra)
            hi = max(rm, ra)
        prev_ecb, b0 = expand_extract(B[i, j], pb)
        nbits, sd1, sd2, r0v = extract_r(scheme, c, R[i, j], pr, lo, hi)
        if nbits == 2:
            bits[nb] = sd2
            nb += 1
        bits[nb] = sd1
        nb += 1
        if prev_ecb > 1:
            prev_ecb = 1
        if 0 <= r0v <= 255 and 0 <= b0 <= 255:
            g0 = green_from_ecb(gray[i, j], r0v, b0, cur_ecb)
        else:
            bad += 1
            if status == OK:
                status = ERR_RANGE
            r0v = min(max(r0v, 0), 255)
            b0 = min(max(b0, 0), 255)
            g0 = G[i, j]
        if g0 < 0:
            bad += 1
            if status == OK:
                status = ERR_GREEN
            g0 = G[i, j]
        R[i, j] = r0v
        G[i, j] = g0
        B[i, j] = b0
        cur_ecb = prev_ecb
    out = bits[:nb][::-1].copy()
    return out, cur_ecb, status, bad


@njit(cache=True)
def _map_estimate(n, ones):
    """Approximate coded size of a map with ``n`` entries, ``ones`` of them set."""
    if ones == 0 or ones == n:
        return 32
    p = ones / n
    h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return int(n * h) + 32


@njit(cache=True)
def _simulate(scheme, deltas, t1, t2, lm_smooth, lm_normal, r, g, b, gr,
              p1r, pmin, pmax, p1b, ecb, payload, bound):
    """Squared error of a forward embed of ``payload`` followed by an
    estimated location map segment; -1 if it does not fit, -2 once the error
    passes ``bound``."""
    size = payload.size
    total = size
    pos = 0
    prev_ecb = 0
    sse = 0
    entries = 0
    ones = 0
    mapped = False
    for k in range(deltas.size):
        if pos >= total:
            if mapped:
                break
            total += _map_estimate(entries, ones)
            mapped = True
        d = deltas[k]
        if d <= t1:
            c = 0
            skip = lm_smooth[k]
        elif d <= t2:
            c = 1
            skip = lm_normal[k]
        else:
            continue
        if not mapped:
            entries += 1
            ones += skip
        if skip:
            continue
        sd1 = payload[pos % size]
        sd2 = payload[(pos + 1) % size]
        r2, used = embed_r(scheme, c, r[k], p1r[k], pmin[k], pmax[k], sd1, sd2)
        pos += used
        b2 = expand_embed(b[k], p1b[k], prev_ecb)
        g2 = adjust(gr[k], r2, b2, g[k])
        prev_ecb = ecb[k]
        sse += (r2 - r[k]) ** 2 + (g2 - g[k]) ** 2 + (b2 - b[k]) ** 2
        if sse > bound:
            return -2
    if pos < total or not mapped:
        return -1
    return sse


@njit(cache=True)
def sweep(scheme, deltas, t1s, t2s, lm_smooth, lm_normal, r, g, b, gr,
          p1r, pmin, pmax, p1b, ecb, payload):
    """Squared error of embedding ``payload`` for each (t1s[i], t2s[i]).

    -1 marks pairs that cannot hold the payload, -2 pairs abandoned once
    their error exceeded the best complete pair seen so far.
    """
    out = np.empty(t1s.size, np.int64)
    best = np.iinfo(np.int64).max
    # unmapped units per delta value give an upper bound on each pair's capacity
    free_s = np.zeros(257, np.int64)
    free_n = np.zeros(257, np.int64)
    for k in range(deltas.size):
        free_s[deltas[k] + 1] += 1 - lm_smooth[k]
        free_n[deltas[k] + 1] += 1 - lm_normal[k]
    free_s = np.cumsum(free_s)
    free_n = np.cumsum(free_n)
    per_smooth = 1 if scheme == HOU else 2
    for i in range(t1s.size):
        t1, t2 = t1s[i], t2s[i]
        if per_smooth * free_s[t1 + 1] + free_n[t2 + 1] - free_n[t1 + 1] < payload.size:
            out[i] = -1
            continue
        e = _simulate(scheme, deltas, t1s[i], t2s[i], lm_smooth, lm_normal, r, g, b, gr,
                      p1r, pmin, pmax, p1b, ecb, payload, best)
        out[i] = e
        if 0 <= e < best:
            best = e
    return out
