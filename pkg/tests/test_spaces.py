import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeharm.errors import NotModerate, ValidationError, ZeroSeries
from latticeharm.lattice import LatticeBasis, random_basis
from latticeharm.series import FourierSeries
from latticeharm.spaces import (MixedNormSpec, Polynomial, Product, SubExponential,
                                conjugate_exponent, dual_witness, duality_gap, lq_norm,
                                mixed_seq_norm, moderate_check, modulation_norm_M,
                                modulation_norm_W, modulation_norms, periodic_space_norm,
                                weight_from_json)
from latticeharm.stft import GaussianWindow, make_grid, stft_point

QS = [0.5, 1.0, 2.0, math.inf]


def nested_oracle(a, q, tau):
    """Plain recursion b_k(j_{k+1}, ...) = || b_{k-1}(., j_{k+1}, ...) ||_{q_k}."""
    d = a.ndim

    def norm(vals, p):
        vals = [abs(v) for v in vals]
        if math.isinf(p):
            return max(vals)
        return sum(v**p for v in vals) ** (1.0 / p)

    def rec(k, tail):
        if k == 0:
            idx = [0] * d
            for m, j in enumerate(tail):
                idx[tau[m] - 1] = j
            return abs(a[tuple(idx)])
        n = a.shape[tau[k - 1] - 1]
        return norm([rec(k - 1, (j,) + tail) for j in range(n)], q[k - 1])

    return rec(d, ())


def random_series(rng, L, n_modes, max_coord):
    keys = {tuple(rng.integers(-max_coord, max_coord + 1, size=L.dim)) for _ in range(n_modes)}
    return FourierSeries(L, {k: complex(*rng.normal(size=2)) for k in keys})


A = np.array([[1.0, 3.0], [2.0, 4.0]])  # A[j1, j2] = a(j1, j2)


def test_mixed_norm_example_one_inf():
    assert mixed_seq_norm(A, MixedNormSpec((1, math.inf))) == 7.0


def test_mixed_norm_example_inf_one():
    assert mixed_seq_norm(A, MixedNormSpec((math.inf, 1))) == 6.0


def test_mixed_norm_all_inf():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 4, 2))
    assert mixed_seq_norm(a, MixedNormSpec((math.inf,) * 3)) == np.max(np.abs(a))


def test_mixed_norm_from_series_and_empty():
    L = LatticeBasis.identity(2)
    f = FourierSeries(L, {(0, 0): 1, (1, 0): 2, (0, 1): 3, (1, 1): 4})
    assert mixed_seq_norm(f, MixedNormSpec((1, math.inf))) == 7.0
    assert mixed_seq_norm(FourierSeries(L, {}), MixedNormSpec((1, 1))) == 0.0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mixed_norm_matches_oracle_exhaustive(d):
    rng = np.random.default_rng(d)
    for q in itertools.product(QS, repeat=d):
        for tau in itertools.permutations(range(1, d + 1)):
            a = rng.normal(size=tuple(rng.integers(1, 6, size=d)))
            got = mixed_seq_norm(a, MixedNormSpec(q, tau))
            want = nested_oracle(a, q, tau)
            assert abs(got - want) <= 1e-12 * want


@given(st.integers(0, 2**32 - 1), st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
@settings(max_examples=60, deadline=None)
def test_mixed_norm_homogeneity(seed, lam):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    a = rng.normal(size=tuple(rng.integers(1, 5, size=d)))
    spec = MixedNormSpec(tuple(rng.choice(QS, size=d)), tuple(rng.permutation(d) + 1))
    assert mixed_seq_norm(lam * a, spec) == pytest.approx(abs(lam) * mixed_seq_norm(a, spec),
                                                          rel=1e-12)


def test_lq_norm_scaling_avoids_overflow():
    x = np.array([1e200, 1e200])
    assert lq_norm(x, 2.0) == pytest.approx(np.sqrt(2) * 1e200)


@pytest.mark.parametrize("q, tau", [((0.0, 1.0), None), ((1.0, -2.0), None),
                                    ((1.0, 1.0), (1, 1)), ((1.0, 2.0), (0, 1))])
def test_spec_validation(q, tau):
    with pytest.raises(ValidationError):
        MixedNormSpec(q, tau)


def test_spec_rank_mismatch():
    with pytest.raises(ValidationError):
        mixed_seq_norm(np.ones((2, 2)), MixedNormSpec((1.0,)))


@pytest.mark.parametrize("t", [-1.5, 0.0, 2.0])
def test_periodic_norm_single_mode(t):
    L = LatticeBasis([[1.0, 0.4], [0.0, 2.0]])
    f = FourierSeries(L, {(2, -1): 1.0})
    expected = (1 + float(f.radii[0]) ** 2) ** (t / 2)
    assert periodic_space_norm(f, Polynomial(t), MixedNormSpec((3.0, 0.5))) == pytest.approx(
        expected, rel=1e-14)


def test_periodic_norm_l2():
    rng = np.random.default_rng(4)
    f = random_series(rng, LatticeBasis.identity(2), 12, 3)
    got = periodic_space_norm(f, Polynomial(0), MixedNormSpec((2.0, 2.0)))
    assert got == pytest.approx(np.sqrt(np.sum(np.abs(f.values) ** 2)), rel=1e-14)


@pytest.mark.parametrize("tau", [(1, 2), (2, 1)])
def test_periodic_norm_oracle(tau):
    rng = np.random.default_rng(5)
    L = LatticeBasis([[1.0, 0.2], [0.3, 1.0]])
    f = random_series(rng, L, 10, 2)
    omega = Polynomial(1.0)
    lo = f.indices.min(axis=0)
    box = np.zeros(tuple(f.indices.max(axis=0) - lo + 1), dtype=complex)
    for k, c, p in zip(f.indices, f.values, f.points):
        box[tuple(k - lo)] = c * np.sqrt(1 + p @ p)
    q = (1.0, 2.0)
    got = periodic_space_norm(f, omega, MixedNormSpec(q, tau))
    assert got == pytest.approx(nested_oracle(box, q, tau), rel=1e-12)


def test_moderate_peetre():
    out = moderate_check(Polynomial(2.0), Polynomial(2.0), radius=10.0)
    assert out["ok"] and out["worstConstant"] <= 2.0
    # dense grid oracle in d = 1
    x = np.linspace(-10, 10, 801)
    X, Y = np.meshgrid(x, x)
    dense = np.max((1 + (X + Y) ** 2) / ((1 + X**2) * (1 + Y**2)))
    assert out["worstConstant"] <= dense + 1e-12 and dense <= 2.0


def test_moderate_exponential_triangle():
    out = moderate_check(SubExponential(1.0), SubExponential(1.0), radius=5.0, dim=2)
    assert out["ok"] and out["worstConstant"] <= 1 + 1e-9


def test_moderate_exponential_against_constant():
    out = moderate_check(SubExponential(1.0), Polynomial(0.0), radius=5.0)
    assert not out["ok"]


def test_moderate_check_validation():
    with pytest.raises(ValidationError):
        moderate_check(Polynomial(1.0), Polynomial(1.0), radius=1.0, samples=10)


def test_not_moderate_family():
    with pytest.raises(NotModerate):
        SubExponential(1.0, 0.5).companion()


@pytest.mark.parametrize("w", [Polynomial(1.5), SubExponential(0.5, 2.0),
                               Product((Polynomial(1.0), SubExponential(0.2)))])
def test_weight_json_roundtrip_and_reciprocal(w):
    back = weight_from_json(w.to_json())
    xi = np.random.default_rng(0).normal(size=(5, 2))
    np.testing.assert_allclose(back(xi), w(xi), rtol=1e-15)
    np.testing.assert_allclose(w.reciprocal()(xi) * w(xi), 1.0, rtol=1e-14)


@pytest.mark.parametrize("obj", [{"variant": "gaussian"}, {"variant": "polynomial", "z": 1},
                                 "polynomial"])
def test_weight_json_errors(obj):
    with pytest.raises(ValidationError):
        weight_from_json(obj)


def test_modulation_single_mode_closed_form():
    L = LatticeBasis([[1.0, 0.3], [0.0, 1.2]])
    w = GaussianWindow(1.0, 2)
    f = FourierSeries(L, {(1, 1): 1.0})
    g = make_grid(f, w, xi_step=0.25, alphas=np.array([[0, 0]]))
    spec = MixedNormSpec((math.inf, math.inf))
    peak = float(w.fourier(np.zeros(2)))
    # the xi grid need not hit alpha0; the nearest node is within half a cell diagonal
    m = modulation_norm_M(f, Polynomial(0), spec, w, g)
    offset = 0.5 * float(np.sum(g.xi_step))
    assert m <= peak * (1 + 1e-12)
    assert m >= peak * np.exp(-(offset**2) / 2)
    assert modulation_norm_W(f, Polynomial(0), spec, w, g) == pytest.approx(m, rel=1e-12)


def test_modulation_dominates_single_node():
    rng = np.random.default_rng(6)
    L = LatticeBasis.identity(1)
    w = GaussianWindow(1.0, 1)
    f = random_series(rng, L, 5, 2)
    g = make_grid(f, w)
    spec = MixedNormSpec((math.inf,))
    node = g.box_nodes()[[len(g.box_nodes()) // 3]]
    lower = np.max(np.abs(stft_point(f, w, g.x_grid.nodes, node)))
    assert modulation_norm_M(f, Polynomial(0), spec, w, g) >= lower


FAMILY = {(0, 0): 1.0, (1, 0): 0.5 - 0.3j, (0, -1): -0.4j, (1, 1): 0.3, (-2, 1): 0.2 + 0.1j}
T0 = np.array([[1.0, 0.2], [0.0, 0.9]])


@pytest.mark.parametrize("t", [0.0, 1.0])
def test_modulation_ratio_stable_under_dilation(t):
    w = GaussianWindow(1.0, 2)
    spec = MixedNormSpec((math.inf, math.inf))
    ratios = []
    for lam in [1.0, 1.5, 2.0]:
        f = FourierSeries(LatticeBasis(T0 / lam), FAMILY)
        rep = modulation_norms(f, Polynomial(t), spec, w, make_grid(f, w, xi_step=0.25))
        ratios.append(rep["ratios"]["mOverPeriodic"])
    assert max(ratios) / min(ratios) < 1.2


@pytest.mark.parametrize("q", [(math.inf, math.inf), (2.0, 2.0), (1.0, math.inf)])
def test_w_bounded_by_m(q):
    # sup_x ||V(x, .)|| <= || sup_x |V(x, .)| || for every lattice-norm choice
    w = GaussianWindow(1.0, 2)
    f = FourierSeries(LatticeBasis(T0), FAMILY)
    rep = modulation_norms(f, Polynomial(1.0), MixedNormSpec(q), w, make_grid(f, w, xi_step=0.25))
    assert rep["wNorm"] <= rep["mNorm"] * (1 + 1e-12)


def test_modulation_grid_refinement():
    w = GaussianWindow(1.0, 2)
    f = FourierSeries(LatticeBasis(T0), FAMILY)
    spec = MixedNormSpec((math.inf, math.inf))
    a = modulation_norm_M(f, Polynomial(1.0), spec, w, make_grid(f, w, n=6, xi_step=0.25))
    b = modulation_norm_M(f, Polynomial(1.0), spec, w, make_grid(f, w, n=12, xi_step=0.25))
    assert abs(a - b) < 0.01 * b


def test_modulation_finite_q_quadrature():
    # f = 1: ||phi_hat||_{L^2} = ||phi||_{L^2} = 1
    w = GaussianWindow(1.0, 1)
    f = FourierSeries(LatticeBasis.identity(1), {(0,): 1.0})
    g = make_grid(f, w)
    m = modulation_norm_M(f, Polynomial(0), MixedNormSpec((2.0,)), w, g)
    assert m * np.sqrt(g.xi_step / g.h) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("q, qc", [(1.0, math.inf), (2.0, 2.0), (4.0, 4 / 3), (math.inf, 1.0)])
def test_conjugate_exponent(q, qc):
    assert conjugate_exponent(q) == pytest.approx(qc)


def test_conjugate_exponent_range():
    with pytest.raises(ValidationError):
        conjugate_exponent(0.5)


def test_duality_examples():
    L = LatticeBasis.identity(1)
    f = FourierSeries(L, {(2,): 1.5})
    assert duality_gap(f, f, Polynomial(0), 2.0)["ratio"] == pytest.approx(1.0)
    g = FourierSeries(L, {(3,): 1.0})
    assert duality_gap(f, g, Polynomial(0), 2.0)["ratio"] == 0.0


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]),
       st.booleans())
@settings(max_examples=100, deadline=None)
def test_duality_ratio_bounded(seed, q, conj):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    L = random_basis(rng, d, max_cond=10)
    f, g = random_series(rng, L, 10, 3), random_series(rng, L, 10, 3)
    assert duality_gap(f, g, Polynomial(1.0), q, conjugate=conj)["ratio"] <= 1 + 1e-12


def test_witness_single_mode():
    L = LatticeBasis.identity(1)
    f = FourierSeries(L, {(1,): 2.0 - 1.0j})
    g = dual_witness(f, Polynomial(0), 3.0)
    assert g.keys() == f.keys()
    assert abs(g.values[0]) == pytest.approx(1.0)


def test_witness_q2_is_f_direction():
    rng = np.random.default_rng(7)
    f = random_series(rng, LatticeBasis.identity(1), 10, 10)
    g = dual_witness(f, Polynomial(0), 2.0)
    np.testing.assert_allclose(g.values, f.values / np.linalg.norm(f.values), rtol=1e-13)
    gb = dual_witness(f, Polynomial(0), 2.0, conjugate=False)
    np.testing.assert_allclose(gb.values, np.conj(f.values) / np.linalg.norm(f.values),
                               rtol=1e-13)


@pytest.mark.parametrize("q", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("conj", [True, False])
def test_witness_attains_bound(q, conj):
    rng = np.random.default_rng(8)
    f = random_series(rng, LatticeBasis([[1.0, 0.5], [0.0, 1.0]]), 10, 3)
    g = dual_witness(f, Polynomial(1.0), q, conjugate=conj)
    assert duality_gap(f, g, Polynomial(1.0), q, conjugate=conj)["ratio"] >= 0.999999


def test_witness_errors():
    with pytest.raises(ZeroSeries):
        dual_witness(FourierSeries(LatticeBasis.identity(1), {}), Polynomial(0), 2.0)
    with pytest.raises(ValidationError):
        dual_witness(FourierSeries(LatticeBasis.identity(1), {(0,): 1}), Polynomial(0), 1.0)
