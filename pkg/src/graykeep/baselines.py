"""Reference schemes the adaptive pattern is compared against.

* Hou: one bit per unit everywhere (no classifier), R and B predicted by
  the quadratic gray-to-channel fit of :func:`~graykeep.predictors.poly_predict`.
* Li: SMOOTH units expand the same first-level prediction twice instead of
  re-predicting, isolating the effect of the second-level predictor.

All schemes share traversal, header, location map, ECB chaining and green
balancing, so :func:`graykeep.codec.decode` inverts each of them when told
the scheme.
"""
from __future__ import annotations

import numpy as np

from . import codec
from .expansion import expand_embed, expand_extract
from .predictors import PredictionPair, first_level

SCHEMES = tuple(s.value for s in codec.Scheme)


def hou_embed_unit(r_orig, b_orig, r_pred, b_pred, sd, ecb_in):
    """Marked ``(r, b)`` of one unit: R carries ``sd``, B carries ``ecb_in``."""
    return (int(expand_embed(int(r_orig), int(r_pred), int(sd))),
            int(expand_embed(int(b_orig), int(b_pred), int(ecb_in))))


def hou_extract_unit(r_marked, b_marked, r_pred, b_pred):
    """Inverse of :func:`hou_embed_unit`: ``(sd, ecb, r_orig, b_orig)``."""
    sd, r = expand_extract(int(r_marked), int(r_pred))
    ecb, b = expand_extract(int(b_marked), int(b_pred))
    return int(sd), int(ecb), int(r), int(b)


def li_embed_unit_R(p_orig, pair: PredictionPair, bits):
    """Two bits into a SMOOTH R sample by expanding around ``p1`` twice."""
    sd1, sd2 = (int(b) for b in bits)
    p1 = first_level(pair.p_med, pair.p_agsp)
    return int(expand_embed(expand_embed(int(p_orig), p1, sd1), p1, sd2))


def li_extract_unit_R(p_marked, pair: PredictionPair):
    """Inverse of :func:`li_embed_unit_R`: ``((sd1, sd2), p_orig)``."""
    p1 = first_level(pair.p_med, pair.p_agsp)
    sd2, w1 = expand_extract(int(p_marked), p1)
    sd1, p = expand_extract(w1, p1)
    return (int(sd1), int(sd2)), int(p)


def run_scheme(scheme, cover, secret, **params):
    """Encode with the named scheme; ``params`` are passed to :func:`codec.encode`."""
    return codec.encode(cover, secret, scheme=scheme, **params)


def clamping_violations(max_gap=32):
    """Count cases where the second-level prediction is farther than ``p1``.

    Enumerates every (p_med, p_agsp) pair in [0, 255]^2 with
    ``|p_med - p_agsp| <= max_gap`` and every first-level marked value. A
    correct re-prediction never moves away from the marked sample, so the
    expected result is 0.
    """
    v = np.arange(256)
    pm, pa = np.meshgrid(v, v, indexing="ij")
    keep = np.abs(pm - pa) <= max_gap
    pm, pa = pm[keep], pa[keep]
    lo, hi = np.minimum(pm, pa), np.maximum(pm, pa)
    p1 = (pm + pa + 1) // 2
    bad = 0
    for w in range(256):
        p2 = np.where(w <= lo, lo, np.where(w >= hi, hi, -1))
        live = p2 >= 0
        bad += int((np.abs(w - p2[live]) > np.abs(w - p1[live])).sum())
    return bad

