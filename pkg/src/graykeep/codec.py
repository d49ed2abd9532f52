"""Grayscale-invariant reversible embedding: encoder, decoder and header format.

Marked-image header, stored in the LSBs of row 0 (R, G, B of each pixel,
left to right), fields MSB first::

    T1 (8) | T2 (8) | L_clm (w) | ECB_last (1) | D (5)
    | K_0 (w) | ... | K_D (w) | PAD (D+1) | SLM (L_clm)

with ``w = ceil(log2(rows * cols))``.

Units are filled in a chain of D+1 consecutive segments; segment i ends at
unit K_i and K_D is the last embedding unit. Segment 0 carries the
displaced row-0 LSBs followed by the secret. Every later segment carries
the arithmetic-coded location map of the segment before it, and the map of
the final segment (SLM, zero padded up to L_clm bits) is stored inline.
With D = 0 the whole map sits in the header; the encoder only adds a
segment when doing so shortens the header, which keeps row 0 small even
when many units must be skipped. Location maps hold one entry per SMOOTH
or NORMAL unit; COMPLEX units never carry data and need no entry.

PAD bit i is set when the last unit of segment i carries one zero pad
bit after that segment's data. The ECB chain runs through all segments; the first embedding unit
carries 0. The decoder walks the segments in reverse, recovering each
segment's map from the one after it, then restores the row-0 LSBs, so
decoding returns the exact cover.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
from numba import njit

from . import _kernels
from .classifier import RegionClass, classify_map, delta_map
from .errors import CapacityError, CorruptStreamError, ImageTooSmallError
from .expansion import HOU, LI, PROPOSED
from .image_core import TraversalRegion, check_color_image, to_gray, unit_index_bits
from .locmap import compress, decompress
from .metrics import invariance_report, mse, psnr
from .payload import as_bits, random_bits

FIXED_HEADER_BITS = 8 + 8 + 1 + 5
MAX_SEGMENTS = 32
T2_GRID = (1, 2, 4, 8, 16, 32, 64, 128, 255)
_FILLER_SEED = 0x6A7E


class Scheme(str, Enum):
    PROPOSED = "proposed"
    HOU = "hou"
    LI = "li"

    @property
    def code(self):
        return {Scheme.PROPOSED: PROPOSED, Scheme.HOU: HOU, Scheme.LI: LI}[self]


def _scheme(s):
    try:
        return Scheme(s.value if isinstance(s, Scheme) else str(s).lower())
    except ValueError:
        raise ValueError(f"unknown scheme {s!r}; choose from proposed, hou, li") from None


# ---------------------------------------------------------------------------
# header

@dataclass(frozen=True)
class Header:
    t1: int
    t2: int
    l_clm: int
    ecb_last: int
    pads: int
    bounds: tuple
    slm: np.ndarray = field(repr=False, compare=False)

    @staticmethod
    def bit_length(w, l_clm, segments=1):
        return FIXED_HEADER_BITS + w + segments * (w + 1) + l_clm

    @property
    def segments(self):
        return len(self.bounds)

    @property
    def k_end(self):
        return self.bounds[-1]

    def padded(self, segment):
        return bool(self.pads >> segment & 1)

    def segment_range(self, i):
        """Inclusive unit range (lo, hi) of segment ``i``."""
        lo = 0 if i == 0 else self.bounds[i - 1] + 1
        return lo, self.bounds[i]

    def to_bits(self, w):
        if self.slm.size != self.l_clm:
            raise ValueError("SLM length must equal L_clm")
        if not 1 <= self.segments <= MAX_SEGMENTS:
            raise ValueError(f"between 1 and {MAX_SEGMENTS} segments required")
        fields = [(self.t1, 8), (self.t2, 8), (self.l_clm, w), (self.ecb_last, 1),
                  (self.segments - 1, 5)]
        fields += [(k, w) for k in self.bounds]
        fields.append((self.pads, self.segments))
        out = []
        for value, width in fields:
            if value < 0 or value >= (1 << width):
                raise ValueError(f"header field value {value} does not fit in {width} bits")
            out.extend((value >> (width - 1 - i)) & 1 for i in range(width))
        return np.concatenate([np.array(out, dtype=np.uint8), self.slm.astype(np.uint8)])

    @classmethod
    def from_bits(cls, bits, w):
        bits = np.asarray(bits, dtype=np.int64)
        pos = 0

        def take(width):
            nonlocal pos
            if pos + width > bits.size:
                raise CorruptStreamError("header runs past the end of row 0")
            chunk = bits[pos:pos + width]
            pos += width
            return int(sum(int(b) << (width - 1 - i) for i, b in enumerate(chunk)))

        t1, t2 = take(8), take(8)
        l_clm = take(w)
        ecb_last = take(1)
        segments = take(5) + 1
        bounds = tuple(take(w) for _ in range(segments))
        pads = take(segments)
        if pos + l_clm > bits.size:
            raise CorruptStreamError(f"L_clm={l_clm} runs past the end of row 0")
        slm = bits[pos:pos + l_clm].astype(np.uint8)
        return cls(t1, t2, l_clm, ecb_last, pads, bounds, slm)


def _row0_lsbs(img):
    return (img[0, :, :] & 1).astype(np.uint8).ravel()


def _write_row0_lsbs(img, bits):
    flat = img[0].reshape(-1)
    n = bits.size
    flat[:n] = (flat[:n] & 0xFE) | bits
    img[0] = flat.reshape(img.shape[1], 3)


# ---------------------------------------------------------------------------
# cover preparation

@njit(cache=True)
def _compose(deltas, t1, t2, lm_smooth, lm_normal, cls, lm):
    for k in range(deltas.size):
        d = deltas[k]
        if d <= t1:
            cls[k] = 0
            lm[k] = lm_smooth[k]
        elif d <= t2:
            cls[k] = 1
            lm[k] = lm_normal[k]
        else:
            cls[k] = 2
            lm[k] = 0


class _Cover:
    """Per-image arrays shared by the search and the final embed."""

    def __init__(self, cover, scheme):
        self.img = cover
        self.scheme = scheme
        self.region = TraversalRegion.of(cover)
        if len(self.region) == 0:
            raise ImageTooSmallError("traversal region is empty")
        self.w = unit_index_bits(cover)
        base = Header.bit_length(self.w, 0)
        if base > 3 * cover.shape[1]:
            raise ImageTooSmallError(
                f"row 0 holds {3 * cover.shape[1]} bits, fewer than the {base}-bit header")
        planes = cover.astype(np.int64)
        self.R, self.G, self.B = (np.ascontiguousarray(planes[..., c]) for c in range(3))
        self.gray = to_gray(cover).astype(np.int64)
        rs, cs = self.region.slices()
        self.r, self.g, self.b, self.gr = (np.ascontiguousarray(p[rs, cs]).ravel()
                                           for p in (self.R, self.G, self.B, self.gray))
        self.deltas = delta_map(self.gray)
        self.p1r, self.pmin, self.pmax, self.p1b, self.ecb = _kernels.unit_features(
            scheme.code, self.R, self.G, self.B, self.gray, rs.start, cs.start,
            self.region.height, self.region.width)
        self._lm_cache = {}

    def lm_for_class(self, cls_code):
        if cls_code not in self._lm_cache:
            cls = np.full(self.r.size, cls_code, dtype=np.int8)
            self._lm_cache[cls_code] = self.plan(cls)
        return self._lm_cache[cls_code]

    def plan(self, cls):
        return _kernels.plan_map(self.scheme.code, cls, self.r, self.g, self.b, self.gr,
                                 self.p1r, self.pmin, self.pmax, self.p1b)

    def classes(self, t1, t2):
        if self.scheme is Scheme.HOU:
            cls = np.full(self.r.size, RegionClass.NORMAL, dtype=np.int8)
            return cls, self.lm_for_class(int(RegionClass.NORMAL))
        cls = np.empty(self.r.size, dtype=np.int8)
        lm = np.empty(self.r.size, dtype=np.uint8)
        _compose(self.deltas, t1, t2, self.lm_for_class(0), self.lm_for_class(1), cls, lm)
        return cls, lm

    def blank(self):
        return (self.r.copy(), self.g.copy(), self.b.copy(),
                np.zeros(self.r.size, dtype=np.int8))

    def walk(self, cls, lm, payload, start=0, prev_ecb=0, units=None):
        units = self.blank() if units is None else units
        k_end, padded, ecb_out, sse = _kernels.embed_walk(
            self.scheme.code, cls, lm, self.r, self.g, self.b, self.gr, self.p1r, self.pmin,
            self.pmax, self.p1b, self.ecb, payload, start, prev_ecb, *units)
        return k_end, padded, ecb_out, sse, units


def _threshold_candidates(prep, secret, target_bits):
    """(sse, t2, t1) for every pair that may fit, best first (sse None when pruned)."""
    n_fill = max(0, target_bits - secret.size)
    probe = np.concatenate([secret[:target_bits], random_bits(n_fill, _FILLER_SEED)])
    head = _row0_lsbs(prep.img)[:Header.bit_length(prep.w, 0)]
    payload = np.concatenate([head, probe]).astype(np.uint8)
    pairs = np.array([(t1, t2) for t2 in T2_GRID for t1 in range(t2 + 1)], dtype=np.int64)
    sse = _kernels.sweep(prep.scheme.code, prep.deltas, pairs[:, 0].copy(), pairs[:, 1].copy(),
                         prep.lm_for_class(0), prep.lm_for_class(1), prep.r, prep.g, prep.b,
                         prep.gr, prep.p1r, prep.pmin, prep.pmax, prep.p1b, prep.ecb, payload)
    # Pruned pairs are provably worse than the best one but may still be
    # needed as fallbacks; they follow, roomiest (largest t2) first.
    full = sorted((int(e), int(t2), int(t1)) for e, (t1, t2) in zip(sse, pairs) if e >= 0)
    pruned = sorted(((int(t2), int(t1)) for e, (t1, t2) in zip(sse, pairs) if e == -2),
                    key=lambda p: (-p[0], p[1]))
    return full + [(None, t2, t1) for t2, t1 in pruned]


def select_thresholds(cover, target_bits, scheme="proposed", secret=None):
    """Pick (t1, t2) minimising the simulated squared error for ``target_bits``.

    Ties go to the smaller t2, then the smaller t1. Raises CapacityError when
    no pair fits.
    """
    cover = check_color_image(cover)
    scheme = _scheme(scheme)
    if scheme is Scheme.HOU:
        return 255, 255
    found = _threshold_candidates(_Cover(cover, scheme), as_bits(secret), int(target_bits))
    if not found:
        raise CapacityError(f"{target_bits} bits do not fit this cover for any threshold pair")
    _, t2, t1 = found[0]
    return t1, t2


# ---------------------------------------------------------------------------
# encode / decode

@dataclass
class EncodeReport:
    scheme: str
    t1: int
    t2: int
    capacity_bits: int
    payload_bits: int
    k_end: int
    segments: int
    l_clm: int
    header_bits: int
    header_pixels: int
    padded: bool
    embedding_units: int
    lm_ones: int
    mse: Fraction
    psnr: float
    gray_changed_pixels: int
    ued_histogram: dict = field(default_factory=dict, repr=False)


def _ued_histogram(prep, marked_units, cls):
    out_r, out_g, out_b, out_bits = marked_units
    used = out_bits > 0
    sq = ((out_r - prep.r) ** 2 + (out_g - prep.g) ** 2 + (out_b - prep.b) ** 2)[used]
    per_bit = out_bits[used]
    hist = {}
    counts = np.bincount(sq.astype(np.int64) * 4 + per_bit)  # per_bit is 1 or 2
    for code in np.flatnonzero(counts):
        key = Fraction(int(code) // 4, int(code) % 4)
        hist[key] = hist.get(key, 0) + int(counts[code])
    return hist


def _map_entries(cls, lm, lo, hi):
    """Location-map entries of units lo..hi (inclusive) that can carry data."""
    sel = slice(lo, hi + 1)
    return lm[sel][cls[sel] != RegionClass.COMPLEX]


def _chain(prep, cls, lm, payload):
    """Embed ``payload`` and then as many map segments as shorten the header.

    Returns (bounds, pads, ecb_last, inline_map, units).
    """
    w = prep.w
    k, pad, ecb, _, units = prep.walk(cls, lm, payload)
    if k < 0:
        return None
    bounds, pads = [k], int(pad)
    smap = compress(_map_entries(cls, lm, 0, k))
    while len(bounds) < MAX_SEGMENTS:
        trial = tuple(a.copy() for a in units)
        k2, pad2, ecb2, _, trial = prep.walk(cls, lm, smap, start=bounds[-1] + 1,
                                           prev_ecb=ecb, units=trial)
        if k2 < 0:
            break
        nxt = compress(_map_entries(cls, lm, bounds[-1] + 1, k2))
        if w + nxt.size >= smap.size:
            break
        pads |= int(pad2) << len(bounds)
        bounds.append(k2)
        ecb, smap, units = ecb2, nxt, trial
    return bounds, pads, ecb, smap, units


def _embed_with(prep, secret, t1, t2):
    cls, lm = prep.classes(t1, t2)
    row0 = _row0_lsbs(prep.img)
    max_header = 3 * prep.img.shape[1]
    hbits = Header.bit_length(prep.w, 0)
    for _ in range(64):
        if hbits > max_header:
            if hbits == Header.bit_length(prep.w, 0):
                raise ImageTooSmallError(
                    f"header needs {hbits} bits but row 0 holds {max_header}")
            raise CapacityError(
                f"location map too large: header needs {hbits} bits but row 0 holds "
                f"{max_header} (t1={t1}, t2={t2})")
        payload = np.concatenate([row0[:hbits], secret]).astype(np.uint8)
        res = _chain(prep, cls, lm, payload)
        if res is None:
            raise CapacityError(
                f"{secret.size} secret bits (+{hbits} displaced header LSBs) exceed capacity "
                f"at t1={t1}, t2={t2}")
        bounds, pads, ecb_last, slm, units = res
        need = Header.bit_length(prep.w, slm.size, len(bounds))
        if need <= hbits:
            break
        hbits = need
    else:
        raise CapacityError("header length did not settle")
    l_clm = hbits - Header.bit_length(prep.w, 0, len(bounds))
    if l_clm >= (1 << prep.w):
        raise ImageTooSmallError(f"L_clm={l_clm} does not fit its {prep.w}-bit field")
    slm = np.concatenate([slm, np.zeros(l_clm - slm.size, dtype=np.uint8)])
    header = Header(t1, t2, l_clm, int(ecb_last), pads, tuple(int(k) for k in bounds), slm)
    return header, cls, lm, units, payload.size


def encode(cover, secret, t1=None, t2=None, scheme="proposed", target_bits=None):
    """Embed ``secret`` into ``cover``; returns ``(marked, EncodeReport)``.

    With ``t1``/``t2`` omitted the thresholds are searched for
    ``target_bits`` (default: the secret length). The Hou scheme ignores
    thresholds and embeds one bit in every safe unit.
    """
    cover = check_color_image(cover)
    secret = as_bits(secret)
    scheme = _scheme(scheme)
    prep = _Cover(cover, scheme)
    if scheme is Scheme.HOU:
        candidates = [(255, 255)]
    elif t1 is not None and t2 is not None:
        if not (0 <= t1 <= t2 <= 255):
            raise ValueError(f"need 0 <= t1 <= t2 <= 255, got t1={t1}, t2={t2}")
        candidates = [(int(t1), int(t2))]
    else:
        target = secret.size if target_bits is None else int(target_bits)
        if target < secret.size:
            raise ValueError("target_bits is smaller than the secret")
        return _encode_searched(prep, cover, secret, scheme, target)
    return _finish(prep, cover, secret, scheme, candidates)


def _try_pairs(prep, secret, pairs):
    last_err = None
    for c1, c2 in pairs:
        try:
            return _embed_with(prep, secret, c1, c2)
        except CapacityError as exc:
            last_err = exc
    raise last_err


def _encode_searched(prep, cover, secret, scheme, target):
    # The sweep ignores the location-map segments, so the cheapest pair can
    # come up a little short; retry with a growing allowance for them.
    extra = 0
    for _ in range(12):
        found = _threshold_candidates(prep, secret, target + extra)
        full = [(t1, t2) for e, t2, t1 in found if e is not None]
        if not full:
            break
        try:
            return _finish(prep, cover, secret, scheme, full[:3])
        except CapacityError:
            extra = max(2 * extra, 256)
    found = _threshold_candidates(prep, secret, target)
    if not found:
        raise CapacityError(f"{target} bits do not fit this cover for any threshold pair")
    return _finish(prep, cover, secret, scheme, [(t1, t2) for _, t2, t1 in found])


def _finish(prep, cover, secret, scheme, candidates):
    header, cls, lm, units, payload_bits = _try_pairs(prep, secret, candidates)
    marked = cover.copy()
    rs, cs = prep.region.slices()
    shape = (prep.region.height, prep.region.width)
    for c, arr in enumerate(units[:3]):
        marked[rs, cs, c] = arr.reshape(shape).astype(np.uint8)
    hbits = header.to_bits(prep.w)
    _write_row0_lsbs(marked, hbits)

    _, changed = invariance_report(cover, marked)
    report = EncodeReport(
        scheme=scheme.value, t1=header.t1, t2=header.t2, capacity_bits=int(secret.size),
        payload_bits=int(payload_bits), k_end=header.k_end, segments=header.segments,
        l_clm=header.l_clm,
        header_bits=int(hbits.size), header_pixels=math.ceil(hbits.size / 3),
        padded=header.padded(0), embedding_units=int((units[3] > 0).sum()),
        lm_ones=int(lm[:header.k_end + 1].sum()), mse=mse(cover, marked),
        psnr=psnr(cover, marked), gray_changed_pixels=changed,
        ued_histogram=_ued_histogram(prep, units, cls))
    return marked, report


@dataclass
class DecodeResult:
    cover: np.ndarray
    secret: np.ndarray
    header: Header
    consistent: bool
    inconsistent_units: int


_STATUS_TEXT = {
    _kernels.ERR_GREEN: "ECB contradiction: no green value matches the carried ECB",
    _kernels.ERR_RANGE: "restored sample outside [0, 255]",
    _kernels.ERR_FIRST_ECB: "ECB contradiction: first embedding unit does not carry 0",
}


def read_header(marked):
    marked = check_color_image(marked)
    w = unit_index_bits(marked)
    header = Header.from_bits(_row0_lsbs(marked), w)
    region = TraversalRegion.of(marked)
    if header.t1 > header.t2:
        raise CorruptStreamError(f"header thresholds out of order (t1={header.t1}, t2={header.t2})")
    if header.k_end >= len(region):
        raise CorruptStreamError(f"K_end={header.k_end} beyond the {len(region)} units of the region")
    if any(a >= b for a, b in zip(header.bounds, header.bounds[1:])):
        raise CorruptStreamError(f"segment bounds not increasing: {header.bounds}")
    if header.l_clm == 0:
        raise CorruptStreamError("header carries an empty location map")
    return header


def _expand_map(entries, cls, lm, lo, hi):
    idx = lo + np.flatnonzero(cls[lo:hi + 1] != RegionClass.COMPLEX)
    lm[idx] = entries


def decode_full(marked, scheme="proposed", strict=True):
    """Decode and return a :class:`DecodeResult` with consistency diagnostics.

    With ``strict=False`` ECB contradictions and out-of-range samples are
    counted instead of raised, so a tampered image still yields best-effort
    data; location-map and header corruption always raise.
    """
    marked = check_color_image(marked)
    scheme = _scheme(scheme)
    header = read_header(marked)
    region = TraversalRegion.of(marked)
    w = unit_index_bits(marked)
    n = header.k_end + 1

    gray = to_gray(marked).astype(np.int64)
    if scheme is Scheme.HOU:
        cls = np.full(n, RegionClass.NORMAL, dtype=np.int8)
    else:
        cls = classify_map(delta_map(gray)[:n], header.t1, header.t2)
    lm = np.zeros(n, dtype=np.uint8)
    active = cls != RegionClass.COMPLEX

    planes = marked.astype(np.int64)
    R, G, B = (np.ascontiguousarray(planes[..., c]) for c in range(3))
    rs, cs = region.slices()

    smap = header.slm
    ecb = header.ecb_last
    status, bad = _kernels.OK, 0
    for i in range(header.segments - 1, -1, -1):
        lo, hi = header.segment_range(i)
        n_active = int(active[lo:hi + 1].sum())
        if n_active == 0 or smap.size == 0:
            raise CorruptStreamError(f"segment {i} has an empty location map")
        _expand_map(decompress(smap, n_active), cls, lm, lo, hi)
        bits, ecb, st, nbad = _kernels.extract_walk(
            scheme.code, R, G, B, gray, cls, lm, hi, lo, ecb, rs.start, cs.start, region.width)
        bad += nbad
        if status == _kernels.OK:
            status = st
        if strict and status != _kernels.OK:
            raise CorruptStreamError(_STATUS_TEXT[status])
        if header.padded(i):
            bits = bits[:-1]
        smap = bits
    if ecb != 0:
        bad += 1
        if status == _kernels.OK:
            status = _kernels.ERR_FIRST_ECB
    if strict and status != _kernels.OK:
        raise CorruptStreamError(_STATUS_TEXT[status])
    hbits = Header.bit_length(w, header.l_clm, header.segments)
    if bits.size < hbits:
        raise CorruptStreamError(
            f"stream holds {bits.size} bits, fewer than the {hbits} displaced header LSBs")

    cover = np.stack([R, G, B], axis=-1).astype(np.uint8)
    _write_row0_lsbs(cover, bits[:hbits].astype(np.uint8))
    return DecodeResult(cover, bits[hbits:].copy(), header, status == _kernels.OK, int(bad))


def decode(marked, scheme="proposed", strict=True):
    """Recover ``(cover, secret)`` from a marked image."""
    res = decode_full(marked, scheme, strict)
    return res.cover, res.secret
