import math
import statistics
from fractions import Fraction

import numpy as np
import pytest

from graykeep.classifier import RegionClass, classify, classify_map, delta, delta_map
from graykeep.image_core import TraversalRegion


def delta_oracle(samples):
    return min(math.floor(statistics.pvariance([Fraction(v) for v in samples])), 255)


def plus_image(c, n, s, w, e):
    g = np.zeros((8, 8), np.uint8)
    g[3, 3], g[2, 3], g[4, 3], g[3, 2], g[3, 4] = c, n, s, w, e
    return g


@pytest.mark.parametrize("samples", [(9, 9, 9, 9, 9), (10, 10, 10, 10, 20), (0, 255, 0, 255, 0),
                                     (1, 2, 3, 4, 5), (200, 0, 0, 0, 0)])
def test_delta_matches_pvariance(samples):
    assert delta(plus_image(*samples), 3, 3) == delta_oracle(samples)


def test_delta_worked_values():
    assert delta(plus_image(9, 9, 9, 9, 9), 3, 3) == 0
    # {10,10,10,10,20}: mean 12, squared deviations 4+4+4+4+64 = 80, /5 = 16
    assert delta(plus_image(10, 10, 10, 10, 20), 3, 3) == 16
    assert delta(plus_image(0, 255, 0, 255, 0), 3, 3) == 255


def test_delta_rejects_positions_outside_region():
    g = np.zeros((8, 8), np.uint8)
    for i, j in [(0, 3), (1, 3), (3, 0), (7, 3), (3, 6)]:
        with pytest.raises(IndexError):
            delta(g, i, j)


def test_delta_map_agrees_with_scalar(rng):
    g = rng.integers(0, 256, size=(12, 15)).astype(np.uint8)
    region = TraversalRegion.of(g)
    d = delta_map(g)
    assert d.size == len(region)
    for k in range(len(region)):
        i, j = region.position(k)
        samples = (g[i, j], g[i - 1, j], g[i + 1, j], g[i, j - 1], g[i, j + 1])
        assert d[k] == delta(g, i, j) == delta_oracle([int(v) for v in samples])


@pytest.mark.parametrize("d,expected", [(0, RegionClass.SMOOTH), (5, RegionClass.SMOOTH),
                                        (10, RegionClass.NORMAL), (20, RegionClass.NORMAL),
                                        (25, RegionClass.COMPLEX)])
def test_classify(d, expected):
    assert classify(d, 5, 20) is expected


def test_classify_threshold_order():
    with pytest.raises(ValueError):
        classify(3, 6, 5)
    with pytest.raises(ValueError):
        classify_map(np.arange(5), 6, 5)


def test_classify_map_monotone(rng):
    d = rng.integers(0, 256, 500)
    for t2 in (4, 64, 255):
        prev = None
        for t1 in range(0, t2 + 1, 3):
            m = classify_map(d, t1, t2)
            assert np.array_equal(m, [classify(int(v), t1, t2) for v in d])
            smooth = m == RegionClass.SMOOTH
            if prev is not None:
                assert np.all(smooth[prev])
            prev = smooth
