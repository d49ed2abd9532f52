"""Bit streams: validation, the payload file format and a reproducible generator.

Payload files hold an 8-byte little-endian bit count followed by the bits
packed MSB-first into bytes (last byte zero-padded).

Random payloads come from xorshift64* (shifts 12, 25, 27; multiplier
0x2545F4914F6CDD1D) seeded through one splitmix64 step. Each 64-bit output
contributes its bits MSB-first.
"""
from __future__ import annotations

import os
import struct

import numpy as np

_M64 = (1 << 64) - 1
XORSHIFT_MULT = 0x2545F4914F6CDD1D


def as_bits(bits):
    """Return ``bits`` as a 1-D ``uint8`` array of 0/1 values."""
    arr = np.asarray(bits if bits is not None else [], dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("bit stream must contain only 0 and 1")
    return arr.astype(np.uint8)


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def random_bits(n, seed):
    """``n`` pseudo-random bits, identical on every platform for a given seed."""
    if n < 0:
        raise ValueError("bit count must be non-negative")
    state = _splitmix64(int(seed) & _M64) or 1
    words = []
    for _ in range((n + 63) // 64):
        state ^= state >> 12
        state ^= (state << 25) & _M64
        state ^= state >> 27
        words.append((state * XORSHIFT_MULT) & _M64)
    raw = np.array(words, dtype=">u8").view(np.uint8)
    return np.unpackbits(raw)[:n]


def write_payload(path, bits):
    bits = as_bits(bits)
    with open(os.fspath(path), "wb") as fh:
        fh.write(struct.pack("<Q", bits.size))
        fh.write(np.packbits(bits).tobytes())


def read_payload(path):
    with open(os.fspath(path), "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise ValueError("payload file too short for its length prefix")
    (n,) = struct.unpack("<Q", data[:8])
    body = np.frombuffer(data[8:], dtype=np.uint8)
    if body.size * 8 < n:
        raise ValueError(f"payload file truncated: {body.size * 8} of {n} bits present")
    return np.unpackbits(body)[:n]
