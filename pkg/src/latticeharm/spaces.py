"""Weights, mixed norms, modulation norms and duality checks.

Mixed norms follow the nested recipe: permute the axes of |a| by tau, then
reduce the first remaining axis with l^{q_1}, the next with l^{q_2}, and so
on.  Axis k of a coefficient box is the k-th integer coordinate with respect
to the dual basis, so the nesting runs along e'_{tau(1)}, ..., e'_{tau(d)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotModerate, ValidationError, ZeroSeries
from .series import FourierSeries, pairing_E
from .stft import _block

__all__ = [
    "Weight",
    "Polynomial",
    "SubExponential",
    "Product",
    "weight_from_json",
    "MixedNormSpec",
    "moderate_check",
    "lq_norm",
    "mixed_seq_norm",
    "coefficient_box",
    "periodic_space_norm",
    "modulation_norm_M",
    "modulation_norm_W",
    "modulation_norms",
    "conjugate_exponent",
    "duality_gap",
    "dual_witness",
]


class Weight:
    """Positive weight on R^d, evaluated through its logarithm."""

    def log(self, xi):
        raise NotImplementedError

    def __call__(self, xi):
        return np.exp(self.log(xi))

    def reciprocal(self):
        raise NotImplementedError

    def companion(self):
        """Submultiplicative v and constant C with w(x+y) <= C w(x) v(y)."""
        raise NotImplementedError


def _norms(xi):
    return np.linalg.norm(np.atleast_2d(np.asarray(xi, dtype=float)), axis=-1)


@dataclass(frozen=True)
class Polynomial(Weight):
    """<xi>^t = (1 + |xi|^2)^(t/2)."""

    t: float = 0.0

    def log(self, xi):
        return 0.5 * self.t * np.log1p(_norms(xi) ** 2)

    def reciprocal(self):
        return Polynomial(-self.t)

    def companion(self):
        # Peetre: <x+y>^t <= 2^{|t|/2} <x>^t <y>^{|t|}
        return Polynomial(abs(self.t)), 2.0 ** (abs(self.t) / 2)

    def to_json(self):
        return {"variant": "polynomial", "t": self.t}


@dataclass(frozen=True)
class SubExponential(Weight):
    """exp(r |xi|^(1/s)); moderate only for s >= 1."""

    r: float
    s: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValidationError("sub-exponential order must be positive", s=self.s)

    def log(self, xi):
        return self.r * _norms(xi) ** (1.0 / self.s)

    def reciprocal(self):
        return SubExponential(-self.r, self.s)

    def companion(self):
        if self.s < 1 and self.r != 0:
            raise NotModerate("exp(r|xi|^(1/s)) with s < 1 is not moderate", r=self.r, s=self.s)
        # |x+y|^p <= |x|^p + |y|^p for p = 1/s <= 1
        return SubExponential(abs(self.r), self.s), 1.0

    def to_json(self):
        return {"variant": "subexponential", "r": self.r, "s": self.s}


@dataclass(frozen=True)
class Product(Weight):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def log(self, xi):
        out = np.zeros(_norms(xi).shape)
        for w in self.factors:
            out = out + w.log(xi)
        return out

    def reciprocal(self):
        return Product(tuple(w.reciprocal() for w in self.factors))

    def companion(self):
        pairs = [w.companion() for w in self.factors]
        return Product(tuple(v for v, _ in pairs)), math.prod(c for _, c in pairs)

    def to_json(self):
        return {"variant": "product", "factors": [w.to_json() for w in self.factors]}


def weight_from_json(obj):
    """Parse ``{"variant": "polynomial", "t": ..}``, ``"subexponential"`` or ``"product"``."""
    if obj is None:
        return Polynomial(0.0)
    if not isinstance(obj, dict):
        raise ValidationError("weight must be a JSON object", got=repr(obj))
    kind = obj.get("variant")
    allowed = {"polynomial": {"t"}, "subexponential": {"r", "s"}, "product": {"factors"}}
    if kind not in allowed:
        raise ValidationError("unknown weight variant", variant=kind, allowed=sorted(allowed))
    extra = sorted(set(obj) - allowed[kind] - {"variant"})
    if extra:
        raise ValidationError("unknown weight fields", fields=extra)
    if kind == "polynomial":
        return Polynomial(float(obj.get("t", 0.0)))
    if kind == "subexponential":
        return SubExponential(float(obj["r"]), float(obj.get("s", 1.0)))
    return Product(tuple(weight_from_json(w) for w in obj["factors"]))


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponents q in (0, inf]^d and a 1-based axis permutation tau."""

    q: tuple
    tau: tuple | None = None

    def __post_init__(self):
        q = tuple(float(v) for v in self.q)
        if not q or any(not v > 0 for v in q):
            raise ValidationError("exponents must lie in (0, inf]", q=list(q))
        tau = tuple(range(1, len(q) + 1)) if self.tau is None else tuple(int(t) for t in self.tau)
        if sorted(tau) != list(range(1, len(q) + 1)):
            raise ValidationError("tau must permute 1..d", tau=list(tau))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def uniform(cls, q, d):
        return cls((q,) * d)

    @property
    def dim(self):
        return len(self.q)

    def to_json(self):
        return {"q": [v if math.isfinite(v) else "inf" for v in self.q], "tau": list(self.tau)}


def lq_norm(x, q, axis=None):
    """l^q (quasi-)norm of |x| along `axis`; q = inf gives the maximum."""
    x = np.abs(np.asarray(x))
    if math.isinf(q):
        return np.max(x, axis=axis, initial=0.0)
    m = np.max(x, axis=axis, keepdims=True, initial=0.0)
    safe = np.where(m > 0, m, 1.0)
    out = np.sum((x / safe) ** q, axis=axis, keepdims=True) ** (1.0 / q) * m
    return np.squeeze(out, axis=axis) if axis is not None else float(out.reshape(()))


def coefficient_box(series, values=None):
    """Dense box holding coefficients (or `values` on the same support).

    Returns ``(box, origin)`` where ``box[j - origin]`` is the value at index j.
    """
    vals = series.values if values is None else np.asarray(values)
    d = series.dim
    if len(series) == 0:
        return np.zeros((1,) * d, dtype=vals.dtype), np.zeros(d, dtype=np.int64)
    lo = series.indices.min(axis=0)
    hi = series.indices.max(axis=0)
    box = np.zeros(tuple(hi - lo + 1), dtype=vals.dtype)
    box[tuple((series.indices - lo).T)] = vals
    return box, lo


def _nested(b, spec, scale=1.0):
    if b.ndim != spec.dim:
        raise ValidationError("array rank does not match exponent vector", rank=b.ndim, d=spec.dim)
    b = np.transpose(np.abs(b), axes=[t - 1 for t in spec.tau])
    for qk in spec.q:
        b = lq_norm(b, qk, axis=0)
        if not math.isinf(qk):
            b = b * scale ** (1.0 / qk)
    return float(b)


def mixed_seq_norm(a, spec):
    """Nested mixed (quasi-)norm of a coefficient box or :class:`FourierSeries`."""
    if isinstance(a, FourierSeries):
        a, _ = coefficient_box(a)
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return _nested(a, spec)


def periodic_space_norm(f, omega, spec):
    """Mixed norm of alpha -> c(f, alpha) * omega(alpha) (weight at the dual point)."""
    box, _ = coefficient_box(f, f.values * omega(f.points))
    return _nested(box, spec)


def moderate_check(omega, v, radius, samples=10000, seed=0, dim=1):
    """Monte Carlo estimate of sup omega(x+y) / (omega(x) v(y)) over |x|, |y| <= radius.

    Returns a dict with ``ok`` (estimate below 1.01 x the constant declared by
    omega's companion), ``worstConstant`` and ``declared``.
    """
    if not radius > 0 or samples < 100:
        raise ValidationError("need radius > 0 and at least 100 samples",
                              radius=radius, samples=samples)
    rng = np.random.default_rng(seed)

    def ball(n):
        g = rng.normal(size=(n, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * radius * rng.random((n, 1)) ** (1.0 / dim)

    x, y = ball(samples), ball(samples)
    logs = omega.log(x + y) - omega.log(x) - v.log(y)
    worst = float(np.exp(np.max(logs)))
    try:
        declared = float(omega.companion()[1])
    except NotModerate:
        declared = math.nan
    ok = bool(math.isfinite(declared) and worst <= 1.01 * declared)
    return {"ok": ok, "worstConstant": worst, "declared": declared}


def _weighted_moduli(f, window, grid, omega):
    """Yield |V f| * omega blocks, rows over the x grid, columns over the xi box.

    Only nodes inside the xi ball are evaluated; outside it the transform is
    below the grid tolerance and is stored as zero.
    """
    nodes = grid.box_nodes()
    inside = np.linalg.norm(nodes, axis=1) <= grid.xi_radius
    nodes = nodes[inside]
    w = omega(nodes)
    ug, xg = grid.x_grid.fractional, grid.x_grid.nodes
    step = max(1, (1 << 21) // max(nodes.shape[0], 1))
    for start in range(0, xg.shape[0], step):
        sl = slice(start, start + step)
        out = np.zeros((ug[sl].shape[0], inside.size))
        out[:, inside] = np.abs(_block(f, window, ug[sl], xg[sl], nodes, phase=False)) * w
        yield out


def _m_and_w(f, omega, spec, window, grid):
    shape = grid.box_shape
    prof = np.zeros(int(np.prod(shape)))
    w_norm = 0.0
    for V in _weighted_moduli(f, window, grid, omega):
        np.maximum(prof, np.max(V, axis=0), out=prof)
        w_norm = max([w_norm] + [_nested(row.reshape(shape), spec, scale=grid.h) for row in V])
    return _nested(prof.reshape(shape), spec, scale=grid.h), w_norm


def modulation_norm_M(f, omega, spec, window, grid):
    """|| sup_x |V f(x, .)| * omega ||_{L^q} with sup over the x grid.

    The xi integrals run over the dual-coordinate box of `grid`; every
    l^{q_k} reduction is scaled by h^{1/q_k}.
    """
    prof = np.zeros(int(np.prod(grid.box_shape)))
    for V in _weighted_moduli(f, window, grid, omega):
        np.maximum(prof, np.max(V, axis=0), out=prof)
    return _nested(prof.reshape(grid.box_shape), spec, scale=grid.h)


def modulation_norm_W(f, omega, spec, window, grid):
    """sup_x || V f(x, .) * omega ||_{L^q}, sup over the x grid."""
    shape = grid.box_shape
    best = 0.0
    for V in _weighted_moduli(f, window, grid, omega):
        best = max([best] + [_nested(row.reshape(shape), spec, scale=grid.h) for row in V])
    return best


def modulation_norms(f, omega, spec, window, grid):
    """Periodic-space, M and W norms with their ratios, as one report mapping."""
    pn = periodic_space_norm(f, omega, spec)
    m, w = _m_and_w(f, omega, spec, window, grid)
    return {
        "periodicSpaceNorm": pn,
        "mNorm": m,
        "wNorm": w,
        "ratios": {"mOverPeriodic": m / pn if pn else None,
                   "wOverPeriodic": w / pn if pn else None,
                   "wOverM": w / m if m else None},
    }


def conjugate_exponent(q):
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    if not q > 1:
        raise ValidationError("duality needs q in [1, inf]", q=q)
    return q / (q - 1)


def duality_gap(f, g, omega, q, conjugate=True):
    """Compare |(f, g)_E| with ||f||_{E(omega, l^q)} * ||g||_{E(1/omega, l^q')}.

    Returns ``{"pairing", "bound", "ratio"}``; Hoelder's inequality keeps the
    ratio at most 1.
    """
    q = float(q)
    qc = conjugate_exponent(q)
    p = pairing_E(f, g, conjugate=conjugate)
    nf = lq_norm(f.values * omega(f.points), q) if len(f) else 0.0
    inv = omega.reciprocal()
    ng = lq_norm(g.values * inv(g.points), qc) if len(g) else 0.0
    bound = float(nf * ng)
    ratio = abs(p) / bound if bound > 0 else 0.0
    return {"pairing": p, "bound": bound, "ratio": ratio}


def dual_witness(f, omega, q, conjugate=True):
    """Hoelder extremal g for f in E(omega, l^q), normalized in E(1/omega, l^q').

    c(g, a) = u(a) |c(f, a) omega(a)|^(q-1) omega(a) with u the unit phase of
    c(f, a) for the sesquilinear pairing and its conjugate for the bilinear
    one, so that duality_gap(f, g) has ratio 1.
    """
    q = float(q)
    if not 1 < q < math.inf:
        raise ValidationError("witness needs q in (1, inf)", q=q)
    if len(f) == 0:
        raise ZeroSeries("the zero series has no dual witness")
    w = omega(f.points)
    a = np.abs(f.values) * w
    phase = f.values / np.abs(f.values)
    if not conjugate:
        phase = np.conj(phase)
    amax = float(np.max(a))
    b = (a / amax) ** (q - 1)
    b /= lq_norm(b, q / (q - 1))
    return f.map_values(phase * b * w)
