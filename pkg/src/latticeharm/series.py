"""Fourier series of E-periodic functions.

Conventions: f(x) = sum_alpha c(alpha) exp(i <x, alpha>) with alpha running
over the dual lattice, and

    c(f, alpha) = |E|^-1 * integral_E f(x) exp(-i <x, alpha>) dx.

For x = T u and alpha = T' j the phase <x, alpha> equals 2*pi*(u . j)
exactly, and every phase in this module is formed that way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LatticeMismatch, NyquistViolation, TailTooLarge, ValidationError
from .lattice import LatticeBasis, SampleGrid, dual_basis, enumerate_dual_lattice

__all__ = [
    "FourierSeries",
    "PeriodicSamples",
    "analyze",
    "synthesize",
    "sample",
    "pairing_E",
    "norm_E",
    "distribution_action",
]


def _lexsort(keys):
    if len(keys) == 0:
        return np.zeros(0, dtype=int)
    return np.lexsort(keys.T[::-1])


class FourierSeries:
    """Finite map from dual-lattice integer coordinates to complex coefficients.

    Keys absent from the map are zero coefficients; explicit zeros are
    dropped on construction.  Coefficients are kept in lexicographic key
    order, which is the summation order used everywhere.
    """

    __slots__ = ("lattice", "_keys", "_vals", "_lookup")

    def __init__(self, lattice, coeffs=None):
        if not isinstance(lattice, LatticeBasis):
            lattice = LatticeBasis(lattice)
        self.lattice = lattice
        d = lattice.dim
        items = dict(coeffs or {})
        keys = np.array([tuple(int(v) for v in k) for k in items], dtype=np.int64).reshape(-1, d)
        vals = np.array([complex(v) for v in items.values()], dtype=complex)
        if keys.shape[0] != vals.shape[0]:
            raise ValidationError("every index must have length d", d=d)
        if not np.all(np.isfinite(vals)):
            raise ValidationError("coefficients must be finite")
        nz = vals != 0
        keys, vals = keys[nz], vals[nz]
        order = _lexsort(keys)
        self._keys = keys[order]
        self._vals = vals[order]
        self._keys.setflags(write=False)
        self._vals.setflags(write=False)
        self._lookup = None

    @classmethod
    def from_arrays(cls, lattice, indices, values):
        indices = np.asarray(indices, dtype=np.int64).reshape(-1, lattice.dim)
        return cls(lattice, zip(map(tuple, indices.tolist()), np.asarray(values, dtype=complex)))

    @property
    def dim(self):
        return self.lattice.dim

    @property
    def indices(self):
        """Integer dual coordinates, shape (N, d), lexicographic order."""
        return self._keys

    @property
    def values(self):
        return self._vals

    @property
    def points(self):
        """Dual-lattice points alpha in R^d, shape (N, d)."""
        return dual_basis(self.lattice).points(self._keys)

    @property
    def radii(self):
        return np.linalg.norm(self.points, axis=1)

    @property
    def max_coordinate(self):
        return int(np.max(np.abs(self._keys))) if len(self) else 0

    def __len__(self):
        return self._vals.shape[0]

    def __iter__(self):
        return iter(self.keys())

    def keys(self):
        return [tuple(k) for k in self._keys.tolist()]

    def items(self):
        return list(zip(self.keys(), self._vals.tolist()))

    def __getitem__(self, index):
        if self._lookup is None:
            self._lookup = dict(self.items())
        return self._lookup.get(tuple(int(v) for v in index), 0j)

    def map_values(self, values):
        """Same support, new coefficient array (zeros are pruned)."""
        return FourierSeries.from_arrays(self.lattice, self._keys, values)

    def __mul__(self, scalar):
        return self.map_values(self._vals * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"FourierSeries(dim={self.dim}, modes={len(self)})"


@dataclass(frozen=True, eq=False)
class PeriodicSamples:
    """Values of an E-periodic function at the nodes of a :class:`SampleGrid`."""

    grid: SampleGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.shape[0] != self.grid.size:
            raise ValidationError("sample count does not match grid", expected=self.grid.size,
                                  got=int(v.shape[0]))
        if not np.all(np.isfinite(v)):
            raise ValidationError("samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _phase(u, keys):
    return np.exp(2j * np.pi * (u @ keys.T.astype(float)))


def sample(F, n):
    """Evaluate `F` on the n-per-axis grid of its fundamental domain."""
    grid = SampleGrid(F.lattice, n)
    u = grid.fractional
    values = _phase(u, F.indices) @ F.values if len(F) else np.zeros(grid.size, dtype=complex)
    return PeriodicSamples(grid, values)


def synthesize(F, points):
    """Evaluate sum_alpha c(alpha) exp(i <x, alpha>) at arbitrary points of R^d.

    Points are reduced modulo the lattice before the phases are formed, so
    values at x and x + k (k in the lattice) agree to roundoff.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[-1] != F.dim:
        raise ValidationError("points must have d columns", d=F.dim)
    if len(F) == 0:
        return np.zeros(points.shape[0], dtype=complex)
    u = F.lattice.coordinates(points)
    u = u - np.floor(u)
    return _phase(u, F.indices) @ F.values


def analyze(samples, max_radius, method="fft", atol=0.0):
    """Fourier coefficients of sampled data for all |alpha| <= max_radius.

    Parameters
    ----------
    samples : PeriodicSamples
    max_radius : float
        Euclidean cut-off for dual-lattice points.
    method : {"fft", "direct"}
        ``"fft"`` reads the coefficients off an n-point FFT; ``"direct"``
        evaluates the rectangle rule mode by mode.  Both compute the same
        discrete sums.
    atol : float
        Coefficients with modulus <= atol are dropped (0 keeps everything
        except exact zeros).

    Raises
    ------
    NyquistViolation
        If the grid resolution does not exceed twice the largest integer
        coordinate inside `max_radius`.
    """
    grid = samples.grid
    L = grid.basis
    keys = np.array(enumerate_dual_lattice(L, max_radius), dtype=np.int64).reshape(-1, L.dim)
    kmax = int(np.max(np.abs(keys))) if keys.size else 0
    if grid.n <= 2 * kmax:
        raise NyquistViolation("grid too coarse for requested radius", n=grid.n,
                               max_coordinate=kmax, required=2 * kmax + 1)
    if method == "fft":
        spec = np.fft.fftn(samples.values.reshape(grid.shape)) / grid.size
        coeffs = spec[tuple((keys % grid.n).T)]
    elif method == "direct":
        # |E|^-1 * sum_nodes w f(x) exp(-i<x,alpha>) with w = |E|/n^d
        coeffs = np.conj(_phase(grid.fractional, keys)).T @ samples.values / grid.size
    else:
        raise ValidationError("unknown method", method=method)
    if atol > 0:
        keep = np.abs(coeffs) > atol
        keys, coeffs = keys[keep], coeffs[keep]
    return FourierSeries.from_arrays(L, keys, coeffs)


def _aligned(f, g):
    if not f.lattice.same_lattice(g.lattice):
        raise LatticeMismatch("series live on different lattices")
    keys = np.concatenate([f.indices, g.indices])
    if keys.shape[0] == 0:
        z = np.zeros(0, dtype=complex)
        return z, z
    keys, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    a = np.zeros(keys.shape[0], dtype=complex)
    b = np.zeros(keys.shape[0], dtype=complex)
    a[inv[: len(f)]] = f.values
    b[inv[len(f):]] = g.values
    return a, b


def pairing_E(f, g, conjugate=True):
    """Coefficient pairing over the union of supports.

    ``conjugate=True`` gives (f, g)_E = sum c(f,a) conj(c(g,a)), which equals
    |E|^-1 * integral_E f conj(g); ``conjugate=False`` gives the bilinear
    form sum c(f,a) c(g,a).
    """
    a, b = _aligned(f, g)
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    # explicit real arithmetic keeps (f,g) == conj((g,f)) bit for bit
    if conjugate:
        re = ar * br + ai * bi
        im = ai * br - ar * bi
    else:
        re = ar * br - ai * bi
        im = ai * br + ar * bi
    return complex(np.sum(re), np.sum(im))


def norm_E(f):
    """||f||_E = |E|^-1/2 ||f||_L2(E) = sqrt(sum |c|^2)."""
    return float(np.sqrt(pairing_E(f, f).real))


def distribution_action(f, test_ft, radius=None, tol=1e-10):
    """Action <f, phi> = (2 pi)^(d/2) sum_alpha c(f, alpha) phi_hat(-alpha).

    Parameters
    ----------
    f : FourierSeries
    test_ft : callable
        Fourier transform of the test function; receives an (N, d) array.
    radius : float, optional
        Truncate the sum to |alpha| <= radius.  Without it the finite sum is
        exact and the tail bound is 0.
    tol : float
        Largest accepted tail estimate.

    Returns
    -------
    value : complex
    tail : float
        Sum of |terms| over the outermost shell of width min_k |e'_k|.
    """
    d = f.dim
    if len(f) == 0:
        return 0j, 0.0
    pts = f.points
    terms = (2 * np.pi) ** (d / 2) * f.values * np.asarray(test_ft(-pts), dtype=complex).reshape(-1)
    if radius is None:
        return complex(np.sum(terms)), 0.0
    rho = np.linalg.norm(pts, axis=1)
    inside = rho <= radius
    width = float(np.min(np.linalg.norm(dual_basis(f.lattice).basis, axis=0)))
    tail = float(np.sum(np.abs(terms[inside & (rho > radius - width)])))
    if tail > tol:
        raise TailTooLarge("truncated action has a large outer shell", radius=radius,
                           tail=tail, tol=tol)
    return complex(np.sum(terms[inside])), tail
