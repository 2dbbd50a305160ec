import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeharm.errors import IllConditioned, RadiusTooLarge, SingularBasis, ValidationError
from latticeharm.lattice import (LatticeBasis, dual_basis, enumerate_dual_lattice,
                                 enumerate_lattice, random_basis, sample_grid, volume)


def brute_force_dual(L, radius):
    """Scan a generous integer box and keep points inside the ball."""
    D = 2 * np.pi * np.linalg.inv(L.basis).T
    m = int(np.ceil(radius * np.linalg.norm(np.linalg.inv(D), 2))) + 2
    out = []
    for j in itertools.product(range(-m, m + 1), repeat=L.dim):
        if np.linalg.norm(D @ np.array(j)) <= radius * (1 + 1e-12):
            out.append(j)
    return sorted(out)


def test_identity_dual():
    D = dual_basis(LatticeBasis.identity(2))
    np.testing.assert_allclose(D.basis, 2 * np.pi * np.eye(2), rtol=0, atol=1e-15)


def test_diagonal_dual():
    D = dual_basis(LatticeBasis(np.diag([1.0, 2.0])))
    np.testing.assert_allclose(D.basis, np.diag([2 * np.pi, np.pi]), rtol=1e-15)


@pytest.mark.parametrize("theta", [0.3, 1.1, -2.0])
def test_rotation_dual(theta):
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    np.testing.assert_allclose(dual_basis(LatticeBasis(R)).basis, 2 * np.pi * R, atol=1e-14)


def test_biorthogonality_random():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 5))
        L = random_basis(rng, d)
        G = L.basis.T @ dual_basis(L).basis
        worst = max(worst, np.max(np.abs(G - 2 * np.pi * np.eye(d))) / (2 * np.pi))
    assert worst < 1e-12


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_double_dual_is_identity(d, seed):
    L = random_basis(np.random.default_rng(seed), d)
    back = dual_basis(dual_basis(L))
    np.testing.assert_allclose(back.basis, L.basis, rtol=1e-12, atol=1e-12 * np.abs(L.basis).max())


@pytest.mark.parametrize("T", [[[1.0, 2.0], [2.0, 4.0]], [[0.0, 0.0], [0.0, 0.0]]])
def test_singular_basis(T):
    with pytest.raises(SingularBasis):
        LatticeBasis(T)


def test_ill_conditioned():
    with pytest.raises(IllConditioned):
        LatticeBasis([[1.0, 0.0], [0.0, 1e-9]])
    # a looser cap accepts the same matrix
    LatticeBasis([[1.0, 0.0], [0.0, 1e-9]], cond_cap=1e10)


@pytest.mark.parametrize("bad", [[[1.0, 2.0]], [[np.nan]], []])
def test_malformed_basis(bad):
    with pytest.raises(ValidationError):
        LatticeBasis(bad)


def test_basis_is_read_only():
    L = LatticeBasis.identity(2)
    with pytest.raises(ValueError):
        L.basis[0, 0] = 3.0


def test_enumerate_unit_square_radius_7():
    pts = enumerate_dual_lattice(LatticeBasis.identity(2), 7.0)
    assert pts == [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]


def test_enumerate_radius_zero():
    assert enumerate_dual_lattice(LatticeBasis.identity(3), 0.0) == [(0, 0, 0)]


def test_enumerate_negative_radius():
    with pytest.raises(ValidationError):
        enumerate_dual_lattice(LatticeBasis.identity(1), -1.0)


def test_enumerate_cap():
    with pytest.raises(RadiusTooLarge):
        enumerate_dual_lattice(LatticeBasis.identity(3), 1e4)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.floats(0.0, 50.0))
@settings(max_examples=40, deadline=None)
def test_enumerate_matches_brute_force(d, seed, radius):
    L = random_basis(np.random.default_rng(seed), d, max_cond=5.0)
    # keep the brute-force box small
    scale = np.linalg.norm(dual_basis(L).basis, 2)
    radius = min(radius, 6 * scale / (d * d))
    assert enumerate_dual_lattice(L, radius) == brute_force_dual(L, radius)


def test_enumerate_primal():
    pts = enumerate_lattice(LatticeBasis(np.diag([1.0, 3.0])), 2.0)
    assert pts == [(-2, 0), (-1, 0), (0, 0), (1, 0), (2, 0)]


@pytest.mark.parametrize("T, vol", [(np.eye(3), 1.0), (np.diag([2.0, 3.0]), 6.0),
                                    ([[1.0, 0.5], [0.0, 2.0]], 2.0)])
def test_volume(T, vol):
    assert volume(LatticeBasis(T)) == pytest.approx(vol, rel=1e-15)


def test_sample_grid_1d():
    g = sample_grid(LatticeBasis.identity(1), 4)
    np.testing.assert_array_equal(g.nodes.ravel(), [0.0, 0.25, 0.5, 0.75])
    np.testing.assert_array_equal(g.weights, [0.25] * 4)


@given(st.integers(1, 3), st.integers(1, 9), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_sample_grid_invariants(d, n, seed):
    L = random_basis(np.random.default_rng(seed), d)
    g = sample_grid(L, n)
    assert g.nodes.shape == (n**d, d)
    assert abs(g.weights.sum() - L.volume) <= 1e-12 * L.volume


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_sample_grid_bad_n(n):
    with pytest.raises(ValidationError):
        sample_grid(LatticeBasis.identity(1), n)


def test_points_and_coordinates_roundtrip():
    L = LatticeBasis([[1.0, 0.3], [0.2, 1.5]])
    j = np.array([[1, -2], [3, 4]])
    np.testing.assert_allclose(L.coordinates(L.points(j)), j, atol=1e-14)
