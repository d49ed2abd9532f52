"""Location-map compression with an adaptive binary arithmetic coder.

The coder is order-0 with Laplace counts (both start at 1) and a 32-bit
renormalising register. Bits past the end of a stream read as zero, so a
compressed map may be zero-padded without changing what it decodes to.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .errors import CorruptStreamError

STATE_BITS = 32
_FULL = 1 << STATE_BITS
_MASK = _FULL - 1
_HALF = _FULL >> 1
_QUARTER = _HALF >> 1
_COUNT_LIMIT = 1 << 24

# A valid stream makes the decoder shift in exactly len(stream) + STATE_BITS - 2 bits.
_MAX_PHANTOM = STATE_BITS - 2


@njit(cache=True)
def _emit(out, n, bit, pending):
    out[n] = bit
    n += 1
    for _ in range(pending):
        out[n] = 1 - bit
        n += 1
    return n


@njit(cache=True)
def _encode(bits):
    # per-symbol cost is at most log2(_COUNT_LIMIT) + 1 bits
    out = np.zeros(26 * bits.size + 64, dtype=np.uint8)
    n = 0
    low = 0
    high = _MASK
    pending = 0
    c0 = 1
    c1 = 1
    for idx in range(bits.size):
        total = c0 + c1
        rng = high - low + 1
        split = low + rng * c0 // total
        if bits[idx]:
            low = split
            c1 += 1
        else:
            high = split - 1
            c0 += 1
        while True:
            if high < _HALF:
                n = _emit(out, n, 0, pending)
                pending = 0
            elif low >= _HALF:
                n = _emit(out, n, 1, pending)
                pending = 0
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < 3 * _QUARTER:
                pending += 1
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low = (low << 1) & _MASK
            high = ((high << 1) & _MASK) | 1
        if c0 + c1 > _COUNT_LIMIT:
            c0 = (c0 + 1) >> 1
            c1 = (c1 + 1) >> 1
    pending += 1
    if low < _QUARTER:
        n = _emit(out, n, 0, pending)
    else:
        n = _emit(out, n, 1, pending)
    return out[:n]


@njit(cache=True)
def _decode(stream, count):
    """Returns (bits, phantom) where phantom counts reads past the stream end."""
    out = np.zeros(count, dtype=np.uint8)
    pos = 0
    phantom = 0
    code = 0
    for _ in range(STATE_BITS):
        if pos < stream.size:
            code = (code << 1) | stream[pos]
        else:
            code = code << 1
            phantom += 1
        pos += 1
    low = 0
    high = _MASK
    c0 = 1
    c1 = 1
    for idx in range(count):
        total = c0 + c1
        rng = high - low + 1
        split = low + rng * c0 // total
        if code >= split:
            out[idx] = 1
            low = split
            c1 += 1
        else:
            high = split - 1
            c0 += 1
        while True:
            if high < _HALF:
                pass
            elif low >= _HALF:
                low -= _HALF
                high -= _HALF
                code -= _HALF
            elif low >= _QUARTER and high < 3 * _QUARTER:
                low -= _QUARTER
                high -= _QUARTER
                code -= _QUARTER
            else:
                break
            low = (low << 1) & _MASK
            high = ((high << 1) & _MASK) | 1
            nxt = 0
            if pos < stream.size:
                nxt = stream[pos]
            else:
                phantom += 1
            pos += 1
            code = ((code << 1) & _MASK) | nxt
        if c0 + c1 > _COUNT_LIMIT:
            c0 = (c0 + 1) >> 1
            c1 = (c1 + 1) >> 1
    return out, phantom


def _as_bits(bits):
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError("bit stream must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("bit stream must contain only 0 and 1")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def compress(lm):
    """Compress a location map (sequence of 0/1) to a bit array."""
    lm = _as_bits(lm)
    if lm.size == 0:
        raise ValueError("location map is empty")
    return _encode(lm).copy()


def decompress(bits, n):
    """Recover the ``n``-bit map from ``compress`` output (trailing zero padding allowed)."""
    if n <= 0:
        raise ValueError("expected map length must be positive")
    out, phantom = _decode(_as_bits(bits), int(n))
    if phantom > _MAX_PHANTOM:
        raise CorruptStreamError(
            f"compressed location map exhausted early ({phantom - _MAX_PHANTOM} bits missing)")
    return out
