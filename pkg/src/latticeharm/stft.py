"""Gaussian-window short-time Fourier transforms of periodic series.

With the angular Fourier transform F(g)(xi) = (2 pi)^(-d/2) int g(y) e^{-i<y,xi>} dy,

    V_phi f(x, xi) = F(f * conj(phi(. - x)))(xi),

and for a Fourier series this collapses to the mode sum

    V_phi f(x, xi) = e^{-i<x,xi>} sum_alpha c(alpha) conj(phi_hat(alpha - xi)) e^{i<x,alpha>}.

The quadrature routines below integrate V over E x R^d on an
:class:`STFTGrid`: rectangle rule in x over the sample grid of E and in xi
over a uniform lattice restricted to a ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .errors import LatticeMismatch, NyquistViolation, TailTooLarge, ValidationError
from .lattice import SampleGrid, dual_basis
from .series import FourierSeries

__all__ = [
    "GaussianWindow",
    "STFTGrid",
    "make_grid",
    "stft_point",
    "stft_quadrature",
    "stft_values",
    "coefficient_via_stft",
    "parseval_stft",
    "stft_profile",
    "stft_dump",
]

_CHUNK = 1 << 21


@dataclass(frozen=True)
class GaussianWindow:
    """L2-normalized Gaussian phi(x) = (pi sigma^2)^(-d/4) exp(-|x|^2 / (2 sigma^2)).

    Its Fourier transform is (sigma^2/pi)^(d/4) exp(-sigma^2 |xi|^2 / 2).  The
    unit norm is re-checked by quadrature on construction.
    """

    sigma: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValidationError("window width must be positive", sigma=self.sigma)
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError("window dimension must be a positive integer", dim=self.dim)
        # product structure: the d-dim norm is the 1-d norm to the power d
        h = self.sigma / 16
        z = np.arange(-14 * 16, 14 * 16 + 1) * h
        one_d = np.sum(np.exp(-(z**2) / self.sigma**2)) * h / np.sqrt(np.pi * self.sigma**2)
        if abs(one_d**self.dim - 1.0) > 1e-12:
            raise ValidationError("window normalization check failed", norm_sq=one_d**self.dim)

    @property
    def l2norm(self):
        return 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x**2, axis=-1)
        return (np.pi * self.sigma**2) ** (-self.dim / 4) * np.exp(-r2 / (2 * self.sigma**2))

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        r2 = np.sum(xi**2, axis=-1)
        return (self.sigma**2 / np.pi) ** (self.dim / 4) * np.exp(-(self.sigma**2) * r2 / 2)

    def tail_radius(self, tol):
        """Radius R with exp(-sigma^2 R^2 / 2) = tol."""
        return np.sqrt(2 * np.log(1 / tol)) / self.sigma

    def to_json(self):
        return {"sigma": self.sigma}


@dataclass(frozen=True, eq=False)
class STFTGrid:
    """Quadrature nodes for integrals over E x R^d.

    x runs over ``x_grid``; xi runs over the lattice ``h * T' m`` (m integer,
    |m|_inf <= box) restricted to |xi| <= xi_radius.  ``h`` is the spacing in
    dual coordinates, so axis k of the xi lattice has physical step
    h * |e'_k|.
    """

    x_grid: SampleGrid
    h: float
    box: int
    xi_radius: float

    @property
    def basis(self):
        return self.x_grid.basis

    @property
    def xi_step(self):
        return self.h * np.linalg.norm(dual_basis(self.basis).basis, axis=0)

    @property
    def box_coords(self):
        """Integer coordinates of the full xi box, C order, shape (K, d)."""
        d = self.basis.dim
        axis = np.arange(-self.box, self.box + 1)
        return np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)

    @property
    def box_shape(self):
        return (2 * self.box + 1,) * self.basis.dim

    def box_nodes(self):
        return dual_basis(self.basis).points(self.h * self.box_coords)

    def ball_mask(self):
        return np.linalg.norm(self.box_nodes(), axis=1) <= self.xi_radius

    @property
    def xi_nodes(self):
        nodes = self.box_nodes()
        return nodes[np.linalg.norm(nodes, axis=1) <= self.xi_radius]

    @property
    def xi_weight(self):
        """Lebesgue measure d xi carried by one xi node."""
        return self.h**self.basis.dim * dual_basis(self.basis).volume


def make_grid(series, window, tol=1e-13, n=None, xi_step=None, xi_radius=None, alphas=()):
    """Build an :class:`STFTGrid` adequate for the given series.

    Defaults: xi_radius = max mode radius + sqrt(2 ln(1/tol)) / sigma; physical
    xi step at most 1/(8 sigma) along every dual axis; n = 2 K + 2 where K is
    the largest integer coordinate among the modes and `alphas`, which makes
    the x rectangle rule exact for the trigonometric integrands involved.
    """
    if isinstance(series, FourierSeries):
        series = [series]
    L = series[0].lattice
    if any(not f.lattice.same_lattice(L) for f in series):
        raise ValidationError("all series must share one lattice")
    kmax = max([f.max_coordinate for f in series] + [int(np.max(np.abs(a))) for a in alphas] + [0])
    rmax = max([float(np.max(f.radii)) if len(f) else 0.0 for f in series]
               + [float(np.linalg.norm(dual_basis(L).points(a))) for a in alphas] + [0.0])
    if xi_radius is None:
        xi_radius = rmax + window.tail_radius(tol)
    if xi_step is None:
        xi_step = 1.0 / (8 * window.sigma)
    if n is None:
        n = 2 * kmax + 2
    T_dual = dual_basis(L).basis
    h = xi_step / float(np.max(np.linalg.norm(T_dual, axis=0)))
    box = int(np.ceil(float(np.linalg.norm(np.linalg.inv(T_dual), 2)) * xi_radius / h))
    return STFTGrid(SampleGrid(L, n), h, box, float(xi_radius))


def _reduced(L, x):
    u = L.coordinates(x)
    return u - np.floor(u)


def _block(f, window, u, x, xi, phase=True):
    """V_phi f on the product of x nodes (fractional coords `u`) and `xi`.

    With ``phase=False`` the unimodular factor e^{-i<x,xi>} is left out,
    which is all that modulus-based callers need.
    """
    if len(f) == 0:
        return np.zeros((u.shape[0], xi.shape[0]), dtype=complex)
    modes = np.exp(2j * np.pi * (u @ f.indices.T.astype(float))) * f.values
    # phi_hat is real for a Gaussian, so conj(phi_hat) = phi_hat
    ph = window.fourier(f.points[:, None, :] - xi[None, :, :])
    V = modes @ ph
    if phase:
        V *= np.exp(-1j * (x @ xi.T))
    return V


def _chunks(m, k):
    step = max(1, _CHUNK // max(m, 1))
    for start in range(0, k, step):
        yield slice(start, min(k, start + step))


def stft_point(f, window, x, xi):
    """V_phi f(x, xi) from the mode sum.

    `x` with shape (m, d) and `xi` with shape (k, d) give an (m, k) array;
    single points give a scalar.  The series is finite, so the sum is exact.
    """
    scalar = np.ndim(x) == 1 and np.ndim(xi) == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    v = _block(f, window, _reduced(f.lattice, x), x, xi)
    return complex(v[0, 0]) if scalar else v


def stft_values(f, window, grid, xi=None):
    """V_phi f on all x nodes of `grid` times `xi` (default: the grid's ball nodes)."""
    xi = grid.xi_nodes if xi is None else xi
    return _block(f, window, grid.x_grid.fractional, grid.x_grid.nodes, xi)


def stft_quadrature(samples, window, x, xi, truncation=None, tol=1e-10):
    """V_phi f(x, xi) by direct rectangle-rule integration of sampled data.

    The samples are extended periodically to every cell meeting the ball
    |y - x| <= truncation, and (2 pi)^(-d/2) sum w f(y) phi(y - x) e^{-i<y,xi>}
    is formed over all those nodes.

    Parameters
    ----------
    samples : PeriodicSamples
    window : GaussianWindow
    x : array_like, shape (d,)
    xi : array_like, shape (k, d) or (d,)
    truncation : float, optional
        Window cut-off radius; the default is the smallest radius from
        sigma * sqrt(2 ln(1/tol)) upward in steps of sigma/2 whose tail
        bound is below tol/100.
    tol : float
        Largest accepted bound on the discarded window mass times max |f|.

    Raises
    ------
    NyquistViolation
        If some xi has a dual coordinate T^t xi / (2 pi) of modulus >= n/2.
    TailTooLarge
        If the truncation leaves more than `tol` behind.
    """
    grid = samples.grid
    L = grid.basis
    d = L.dim
    sigma = window.sigma
    x = np.asarray(x, dtype=float).reshape(d)
    scalar = np.ndim(xi) == 1
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    fmax = float(np.max(np.abs(samples.values))) if samples.values.size else 0.0

    def tail_bound(radius):
        mass = gammaincc(d / 2, radius**2 / (2 * sigma**2))
        return fmax * (np.pi * sigma**2) ** (-d / 4) * sigma**d * mass

    if truncation is None:
        truncation = sigma * np.sqrt(2 * np.log(1 / tol))
        while tail_bound(truncation) > 0.01 * tol:
            truncation += sigma / 2
    tail = tail_bound(truncation)
    if tail > tol:
        raise TailTooLarge("window truncation too short", truncation=truncation, tail=tail, tol=tol)
    kappa = xi @ L.basis / (2 * np.pi)
    if np.any(np.abs(kappa) >= grid.n / 2):
        raise NyquistViolation("xi beyond the sampling band of the grid", n=grid.n,
                               max_dual_coordinate=float(np.max(np.abs(kappa))))
    ux = L.coordinates(x)
    reach = float(np.linalg.norm(L.inverse, 2)) * truncation
    lo = np.floor(ux - reach).astype(int) - 1
    hi = np.ceil(ux + reach).astype(int) + 1
    cells = np.stack(np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij"),
                     axis=-1).reshape(-1, d)
    u = grid.fractional
    out = np.zeros(xi.shape[0], dtype=complex)
    for cell in cells:
        y = L.points(u + cell)
        wf = samples.values * window(y - x)
        out += np.exp(-1j * (y @ xi.T)).T @ wf
    out *= grid.weight * (2 * np.pi) ** (-d / 2)
    return complex(out[0]) if scalar else out


def coefficient_via_stft(f, window, alpha, grid):
    """Fourier coefficients recovered from the STFT by double quadrature.

    c(f, alpha) = (||phi||^2 |E|)^-1 int_E int V_phi f(x, xi) phi_hat(alpha - xi)
    e^{-i<x, alpha - xi>} d xi dx.  `alpha` is one integer index or an (N, d)
    array of them; the return value matches.
    """
    L = f.lattice
    scalar = np.ndim(alpha) == 1
    A = np.atleast_2d(np.asarray(alpha, dtype=np.int64))
    apts = dual_basis(L).points(A)
    ug, xg = grid.x_grid.fractional, grid.x_grid.nodes
    xi = grid.xi_nodes
    acc = np.zeros((xg.shape[0], A.shape[0]), dtype=complex)
    for sl in _chunks(xg.shape[0], xi.shape[0]):
        x_i = xi[sl]
        V = _block(f, window, ug, xg, x_i)
        W = V * np.exp(1j * (xg @ x_i.T))
        acc += W @ window.fourier(apts[None, :, :] - x_i[:, None, :])
    phase = np.exp(-2j * np.pi * (ug @ A.T.astype(float)))
    total = np.sum(acc * phase, axis=0) * grid.x_grid.weight * grid.xi_weight
    c = total / (window.l2norm**2 * L.volume)
    return complex(c[0]) if scalar else c


def parseval_stft(f, g, window, grid):
    """(f, g)_E from (||phi||^2 |E|)^-1 int_E int V f conj(V g) d xi dx.

    Returns
    -------
    value : complex
    l1_mass : float
        The same quadrature applied to |V f conj(V g)|.
    """
    if not f.lattice.same_lattice(g.lattice):
        raise LatticeMismatch("series live on different lattices")
    ug, xg = grid.x_grid.fractional, grid.x_grid.nodes
    xi = grid.xi_nodes
    total = 0j
    mass = 0.0
    for sl in _chunks(xg.shape[0], xi.shape[0]):
        # the common factor e^{-i<x,xi>} cancels in Vf * conj(Vg)
        Vf = _block(f, window, ug, xg, xi[sl], phase=False)
        Vg = _block(g, window, ug, xg, xi[sl], phase=False)
        prod = Vf * np.conj(Vg)
        total += complex(np.sum(prod))
        mass += float(np.sum(np.abs(prod)))
    w = grid.x_grid.weight * grid.xi_weight / (window.l2norm**2 * f.lattice.volume)
    return total * w, mass * w


def stft_profile(f, window, grid, xi=None):
    """max over the x grid of |V_phi f(x, xi)| for each xi node.

    Returns ``(xi_nodes, profile)``; by default the nodes are the grid's ball.
    """
    xi = grid.xi_nodes if xi is None else np.atleast_2d(xi)
    ug, xg = grid.x_grid.fractional, grid.x_grid.nodes
    out = np.empty(xi.shape[0])
    for sl in _chunks(xg.shape[0], xi.shape[0]):
        out[sl] = np.max(np.abs(_block(f, window, ug, xg, xi[sl], phase=False)), axis=0)
    return xi, out


def stft_dump(f, window, grid, xi=None):
    """Plot-ready mapping of the STFT on the grid (x major, xi minor)."""
    xi = grid.xi_nodes if xi is None else np.atleast_2d(xi)
    V = stft_values(f, window, grid, xi)
    return {
        "window": window.to_json(),
        "xNodes": grid.x_grid.nodes.tolist(),
        "xiNodes": xi.tolist(),
        "values": [[float(v.real), float(v.imag)] for v in V.reshape(-1)],
    }
