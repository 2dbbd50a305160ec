"""Parallelepiped bases, lattices and their duals, and sampling grids.

A basis is stored as a d x d matrix ``T`` whose *columns* are the edge vectors
e_1, ..., e_d of the fundamental domain E.  The dual basis satisfies
<e_j, e'_k> = 2*pi*delta_jk, i.e. ``T' = 2*pi * inv(T).T``.

Lattice points are always addressed by integer coordinates; turning them into
points of R^d is the only floating point step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditioned, RadiusTooLarge, SingularBasis, ValidationError

__all__ = [
    "LatticeBasis",
    "DualBasis",
    "SampleGrid",
    "dual_basis",
    "enumerate_dual_lattice",
    "enumerate_lattice",
    "volume",
    "sample_grid",
    "COND_CAP",
    "POINT_CAP",
]

COND_CAP = 1e8
POINT_CAP = 10**7
# slack for points sitting exactly on the enumeration sphere
_RADIUS_RTOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Basis of a non-degenerate parallelepiped E (columns are edge vectors).

    Parameters
    ----------
    basis : array_like, shape (d, d)
        Column j is the edge vector e_j.
    cond_cap : float
        Largest accepted 2-norm condition number.
    """

    basis: np.ndarray
    cond_cap: float = COND_CAP
    _inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
            raise ValidationError("basis must be a non-empty square matrix", shape=list(T.shape))
        if not np.all(np.isfinite(T)):
            raise ValidationError("basis entries must be finite")
        d = T.shape[0]
        scale = float(np.max(np.linalg.norm(T, axis=0)))
        det = float(np.linalg.det(T))
        if scale == 0.0 or abs(det) < 1e-12 * scale**d:
            raise SingularBasis("basis is singular", det=det, scale=scale)
        cond = float(np.linalg.cond(T))
        if not cond <= self.cond_cap:
            raise IllConditioned("basis condition number exceeds cap", cond=cond, cap=self.cond_cap)
        object.__setattr__(self, "basis", _frozen(T))
        object.__setattr__(self, "_inv", _frozen(np.linalg.inv(T)))

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d))

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def volume(self):
        return abs(float(np.linalg.det(self.basis)))

    @property
    def inverse(self):
        return self._inv

    def dual(self):
        return dual_basis(self)

    def points(self, coords):
        """Map integer (or fractional) coordinates, shape (..., d), to R^d."""
        coords = np.asarray(coords, dtype=float)
        return coords @ self.basis.T

    def coordinates(self, points):
        """Inverse of :meth:`points`."""
        points = np.asarray(points, dtype=float)
        return points @ self._inv.T

    def same_lattice(self, other):
        return self.dim == other.dim and np.array_equal(self.basis, other.basis)

    def to_json(self):
        return {"basis": self.basis.tolist()}

    def __repr__(self):
        return f"{type(self).__name__}({self.basis.tolist()!r})"


class DualBasis(LatticeBasis):
    """Basis e'_1, ..., e'_d of the dual lattice; also a lattice basis itself."""


def dual_basis(L):
    """Return the dual basis ``2*pi * inv(T).T`` of `L`.

    The result is again a basis, so ``dual_basis(dual_basis(L))`` gives back
    the original columns.
    """
    T_dual = 2.0 * np.pi * L.inverse.T
    return DualBasis(T_dual, cond_cap=L.cond_cap)


def volume(L):
    """Volume |E| = |det T| of the fundamental domain."""
    return L.volume


def _box_halfwidth(B, radius):
    # |B j| <= radius  =>  |j|_inf <= |j|_2 <= ||inv(B)||_2 * radius
    inv_norm = float(np.linalg.norm(np.linalg.inv(B), 2))
    return int(np.floor(inv_norm * radius * (1.0 + 1e-9)))


def _enumerate(B, radius, cap):
    if radius < 0 or not np.isfinite(radius):
        raise ValidationError("radius must be a finite non-negative number", radius=radius)
    d = B.shape[0]
    m = _box_halfwidth(B, radius)
    count = (2 * m + 1) ** d
    if count > cap:
        raise RadiusTooLarge("integer box for this radius exceeds the point cap",
                             radius=radius, box_points=count, cap=cap)
    axis = np.arange(-m, m + 1)
    # lexicographic order: first coordinate varies slowest
    J = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    norms = np.linalg.norm(J @ B.T, axis=1)
    keep = norms <= radius * (1.0 + _RADIUS_RTOL)
    return [tuple(int(v) for v in row) for row in J[keep]]


def enumerate_dual_lattice(L, radius, cap=POINT_CAP):
    """Integer dual coordinates of all dual-lattice points with ``|point| <= radius``.

    The result is sorted lexicographically.  Raises :class:`RadiusTooLarge`
    when the scanned integer box would hold more than `cap` points.
    """
    return _enumerate(dual_basis(L).basis, radius, cap)


def enumerate_lattice(L, radius, cap=POINT_CAP):
    """Primal counterpart of :func:`enumerate_dual_lattice`."""
    return _enumerate(L.basis, radius, cap)


@dataclass(frozen=True, eq=False)
class SampleGrid:
    """Uniform grid x(u) = T u, u in {0, 1/n, ..., (n-1)/n}^d, over E.

    Nodes are in C order (first coordinate slowest).  Each node carries the
    rectangle-rule weight |E| / n^d.
    """

    basis: LatticeBasis
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("grid resolution n must be a positive integer", n=self.n)
        object.__setattr__(self, "n", int(self.n))

    @property
    def size(self):
        return self.n ** self.basis.dim

    @property
    def shape(self):
        return (self.n,) * self.basis.dim

    @property
    def weight(self):
        return self.basis.volume / self.size

    @property
    def weights(self):
        return np.full(self.size, self.weight)

    @property
    def fractional(self):
        """Fractional coordinates u of the nodes, shape (n^d, d)."""
        d = self.basis.dim
        axis = np.arange(self.n) / self.n
        return np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)

    @property
    def nodes(self):
        return self.basis.points(self.fractional)


def sample_grid(L, n):
    return SampleGrid(L, n)


def random_basis(rng, d, max_cond=50.0):
    """Draw a random basis with condition number at most `max_cond`."""
    while True:
        T = rng.normal(size=(d, d))
        if np.linalg.cond(T) <= max_cond:
            return LatticeBasis(T)
