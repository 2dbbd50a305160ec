import numpy as np
import pytest
from numpy.random import Generator
from randomgen import Xoshiro256

from latticeharm.errors import ValidationError
from latticeharm.generate import from_spec, gevrey_series, poly_series, random_factors
from latticeharm.lattice import LatticeBasis, enumerate_dual_lattice

L1 = LatticeBasis.identity(1)


def test_factors_follow_documented_stream():
    # oracle: the documented draw order on a fresh xoshiro256** stream
    rng = Generator(Xoshiro256(11))
    amp = 0.5 + 0.5 * rng.random(5)
    phase = 2 * np.pi * rng.random(5)
    a, p = random_factors(5, 11)
    np.testing.assert_array_equal(a, amp)
    np.testing.assert_array_equal(p, phase)


def test_factor_ranges():
    a, p = random_factors(2000, 0)
    assert a.min() >= 0.5 and a.max() < 1.0
    assert p.min() >= 0.0 and p.max() < 2 * np.pi


def test_same_seed_same_series():
    f = gevrey_series(L1, 1.0, 2.0, 40 * 2 * np.pi, 7)
    g = gevrey_series(L1, 1.0, 2.0, 40 * 2 * np.pi, 7)
    assert f.keys() == g.keys()
    np.testing.assert_array_equal(f.values, g.values)
    h = gevrey_series(L1, 1.0, 2.0, 40 * 2 * np.pi, 8)
    assert not np.array_equal(f.values, h.values)


@pytest.mark.parametrize("s, r", [(0.5, 1.0), (1.0, 2.0), (2.0, 0.5)])
def test_planted_envelope(s, r):
    f = gevrey_series(L1, s, r, 20 * 2 * np.pi, 3)
    ratio = np.abs(f.values) / np.exp(-r * f.radii ** (1 / s))
    assert ratio.min() >= 0.5 - 1e-12 and ratio.max() < 1.0 + 1e-12


def test_support_is_ball():
    L = LatticeBasis([[1.0, 0.3], [0.0, 1.1]])
    f = poly_series(L, 2.0, 25.0, 1)
    assert f.keys() == enumerate_dual_lattice(L, 25.0)


def test_underflow_is_dropped():
    f = gevrey_series(L1, 0.5, 2.0, 40 * 2 * np.pi, 0)
    assert np.all(np.abs(f.values) > 1e-300)
    assert len(f) < 81


def test_growth_cap():
    with pytest.raises(ValidationError):
        gevrey_series(L1, 0.5, -1.0, 40 * 2 * np.pi, 0)


def test_poly_growth_is_allowed():
    f = poly_series(L1, -2.0, 10 * 2 * np.pi, 0)
    assert np.abs(f[(10,)]) > np.abs(f[(1,)])


@pytest.mark.parametrize("spec", [
    {"kind": "wavelet", "radius": 1, "seed": 0},
    {"kind": "gevrey", "s": 1, "r": 1, "radius": 1},
    {"kind": "poly", "N": 1, "radius": 1, "seed": 0, "extra": 1},
    {"kind": "gevrey", "s": 0, "r": 1, "radius": 1, "seed": 0},
])
def test_bad_specs(spec):
    with pytest.raises(ValidationError):
        from_spec(spec)


def test_seed_range():
    with pytest.raises(ValidationError):
        random_factors(3, -1)
    with pytest.raises(ValidationError):
        random_factors(3, 2**64)
    random_factors(3, 2**64 - 1)
