"""Seeded synthetic series with planted decay.

Random factors come from xoshiro256** (``randomgen.Xoshiro256``) seeded via
``numpy.random.SeedSequence(seed)``, so a given seed yields the same series
on every platform.  For each index, in lexicographic order, one amplitude in
[0.5, 1) and one phase in [0, 2*pi) are drawn: first all amplitudes, then
all phases.
"""

import numpy as np
from randomgen import Xoshiro256

from .errors import ValidationError
from .lattice import LatticeBasis, enumerate_dual_lattice
from .series import FourierSeries

__all__ = ["GENERATOR_KINDS", "rng_from_seed", "random_factors", "gevrey_series",
           "poly_series", "from_spec"]

GENERATOR_KINDS = ("gevrey", "poly")
LOG_FLOOR = np.log(1e-300)
LOG_CEIL = np.log(1e300)


def rng_from_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValidationError("seed must be a uint64", seed=seed)
    return np.random.Generator(Xoshiro256(seed))


def random_factors(n, seed):
    rng = rng_from_seed(seed)
    amp = 0.5 + 0.5 * rng.random(n)
    phase = 2 * np.pi * rng.random(n)
    return amp, phase


def _build(L, radius, seed, log_envelope):
    keys = np.array(enumerate_dual_lattice(L, radius), dtype=np.int64).reshape(-1, L.dim)
    amp, phase = random_factors(keys.shape[0], seed)
    rho = np.linalg.norm(L.dual().points(keys), axis=1)
    logmag = np.log(amp) + log_envelope(rho)
    if np.any(logmag > LOG_CEIL):
        raise ValidationError("planted growth exceeds 1e300 within the radius",
                              radius=radius, max_log_magnitude=float(np.max(logmag)))
    # coefficients below 1e-300 are dropped rather than stored as subnormals
    keep = logmag > LOG_FLOOR
    vals = np.exp(logmag[keep] + 1j * phase[keep])
    return FourierSeries.from_arrays(L, keys[keep], vals)


def gevrey_series(L, s, r, radius, seed):
    """c(alpha) = u(alpha) * exp(-r |alpha|^(1/s)) on |alpha| <= radius.

    Negative `r` plants growth instead of decay.
    """
    if not s > 0:
        raise ValidationError("Gevrey order s must be positive", s=s)
    return _build(L, radius, seed, lambda rho: -r * rho ** (1.0 / s))


def poly_series(L, N, radius, seed):
    """c(alpha) = u(alpha) * <alpha>^(-N); negative `N` plants growth."""
    return _build(L, radius, seed, lambda rho: -0.5 * N * np.log1p(rho**2))


def from_spec(spec, lattice=None):
    """Build a series from a generator spec mapping.

    ``{"kind": "gevrey", "s": .., "r": .., "radius": .., "seed": ..}`` or
    ``{"kind": "poly", "N": .., "radius": .., "seed": ..}``; `lattice`
    defaults to the 1-d unit cell.
    """
    kind = spec.get("kind")
    fields = {"gevrey": ("s", "r", "radius", "seed"), "poly": ("N", "radius", "seed")}
    if kind not in fields:
        raise ValidationError("unknown generator kind", kind=kind, allowed=list(GENERATOR_KINDS))
    extra = sorted(set(spec) - set(fields[kind]) - {"kind", "basis"})
    if extra:
        raise ValidationError("unknown generator fields", fields=extra)
    missing = [k for k in fields[kind] if k not in spec]
    if missing:
        raise ValidationError("generator spec is missing fields", fields=missing)
    L = lattice if lattice is not None else LatticeBasis.identity(1)
    if kind == "gevrey":
        return gevrey_series(L, float(spec["s"]), float(spec["r"]), float(spec["radius"]),
                             int(spec["seed"]))
    return poly_series(L, float(spec["N"]), float(spec["radius"]), int(spec["seed"]))
