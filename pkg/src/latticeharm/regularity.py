"""Decay and growth fits for Fourier coefficients and STFT profiles.

A periodic f is Gevrey of order s exactly when |c(alpha)| <= C e^{-r|alpha|^(1/s)}
for some r > 0, a Gevrey ultradistribution when the bound holds with
e^{+r|alpha|^(1/s)}, smooth under polynomial decay and tempered under
polynomial growth; finite sums are the order-0 class.  Finite data can
only show a fitted rate r and a residual.  Whether the bound holds for
some r or for every r (Roumieu or Beurling type) is left to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateFit, InsufficientSupport, ValidationError

__all__ = [
    "DecayModel",
    "RegularityReport",
    "Thresholds",
    "GevreyFit",
    "PolyFit",
    "shells",
    "fit_gevrey",
    "fit_poly",
    "classify",
    "fit_stft_decay",
]

VARIANTS = ("TrigPolynomial", "GevreyDecay", "GevreyGrowth", "PolyDecay", "PolyGrowth")
S_BOUNDS = (0.1, 10.0)
FLOOR = 1e-300
MIN_SHELLS = 8


@dataclass(frozen=True)
class DecayModel:
    variant: str
    s: float | None = None
    r: float | None = None
    N: float | None = None
    logC: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError("unknown decay model variant", variant=self.variant)
        if self.variant.startswith("Gevrey"):
            if self.s is None or not self.s > 0 or self.r is None or self.r < 0 or self.N is not None:
                raise ValidationError("Gevrey models need s > 0, r >= 0 and no N",
                                      s=self.s, r=self.r)
        elif self.variant.startswith("Poly"):
            if self.N is None or self.N < 0 or self.s is not None or self.r is not None:
                raise ValidationError("polynomial models need N >= 0 only", N=self.N)
        elif any(v is not None for v in (self.s, self.r, self.N)):
            raise ValidationError("TrigPolynomial carries no rate parameters")


@dataclass(frozen=True)
class RegularityReport:
    model: DecayModel
    residual: float
    support: int
    notes: tuple = ()

    @property
    def variant(self):
        return self.model.variant

    def to_json(self):
        m = self.model
        return {
            "variant": m.variant,
            "s": m.s,
            "r": m.r,
            "N": m.N,
            "logC": m.logC,
            "residual": self.residual,
            "support": self.support,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class Thresholds:
    """Classification knobs.

    residual : RMS log-residual below which an exponential-family fit is
        accepted.
    min_shells : series with fewer nonzero shells (origin excluded) are
        treated as trigonometric polynomials.
    floor : coefficients below this modulus are ignored.
    """

    residual: float = 0.5
    min_shells: int = MIN_SHELLS
    floor: float = FLOOR


@dataclass(frozen=True)
class GevreyFit:
    s: float
    r: float
    logC: float
    residual: float
    shells: int


@dataclass(frozen=True)
class PolyFit:
    N: float
    logC: float
    residual: float
    shells: int


def shells(radii, values, reduce=np.median, rtol=1e-9):
    """Group equal radii and reduce the values of each group.

    Returns ``(shell_radii, reduced_values)`` sorted by radius.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if radii.size == 0:
        return radii, values
    order = np.argsort(radii, kind="stable")
    radii, values = radii[order], values[order]
    breaks = np.flatnonzero(np.diff(radii) > rtol * np.maximum(1.0, radii[1:])) + 1
    groups = np.split(np.arange(radii.size), breaks)
    rho = np.array([radii[g[0]] for g in groups])
    red = np.array([reduce(values[g]) for g in groups])
    return rho, red


def _linfit(x, y):
    if not np.all(np.isfinite(x)) or np.ptp(x) == 0:
        raise DegenerateFit("regressor is constant or overflowed")
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), res


def _fit_power(rho, y, s=None):
    """Fit y = logC - r rho^(1/s); search s on S_BOUNDS when not given."""

    def at(s_):
        logC, slope, res = _linfit(rho ** (1.0 / s_), y)
        return logC, -slope, res

    if s is not None:
        logC, r, res = at(s)
        return float(s), r, logC, res
    lo, hi = np.log(S_BOUNDS[0]), np.log(S_BOUNDS[1])
    grid = np.exp(np.linspace(lo, hi, 61))
    vals = [at(g)[2] for g in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    opt = minimize_scalar(lambda t: at(np.exp(t))[2], bounds=(np.log(a), np.log(b)),
                          method="bounded", options={"xatol": 1e-10})
    s_best = float(np.exp(opt.x)) if opt.fun <= vals[k] else float(grid[k])
    logC, r, res = at(s_best)
    return s_best, r, logC, res


def _coefficient_shells(series, floor):
    mag = np.abs(series.values)
    rho = series.radii
    keep = (mag > floor) & (rho > 0)
    return shells(rho[keep], np.log(mag[keep]))


def fit_gevrey(series, s=None, floor=FLOOR, min_shells=MIN_SHELLS):
    """Least-squares fit of log|c(alpha)| = logC - r |alpha|^(1/s).

    Shell medians of log|c| (one value per distinct |alpha|, origin excluded)
    are regressed; with `s` free, the residual is minimized over s in
    [0.1, 10] by a coarse log-grid scan followed by bounded Brent refinement.
    A negative `r` in the result means growth.

    Raises
    ------
    InsufficientSupport
        Fewer than `min_shells` nonzero shells.
    DegenerateFit
        The regressor column is constant.
    """
    rho, y = _coefficient_shells(series, floor)
    if rho.size < min_shells:
        raise InsufficientSupport("not enough distinct nonzero shells", shells=int(rho.size),
                                  required=min_shells)
    s_, r, logC, res = _fit_power(rho, y, s)
    return GevreyFit(s_, r, logC, res, int(rho.size))


def fit_poly(series, floor=FLOOR, min_shells=MIN_SHELLS):
    """Fit log|c| = logC - N log<alpha> on shell medians; negative N is growth."""
    rho, y = _coefficient_shells(series, floor)
    if rho.size < min_shells:
        raise InsufficientSupport("not enough distinct nonzero shells", shells=int(rho.size),
                                  required=min_shells)
    logC, slope, res = _linfit(0.5 * np.log1p(rho**2), y)
    return PolyFit(-slope, logC, res, int(rho.size))


def classify(series, thresholds=None):
    thr = thresholds or Thresholds()
    support = int(np.count_nonzero(np.abs(series.values) > thr.floor))
    rho, _ = _coefficient_shells(series, thr.floor)
    if rho.size < thr.min_shells:
        note = f"{rho.size} nonzero shells: finite trigonometric sum"
        return RegularityReport(DecayModel("TrigPolynomial"), 0.0, support, (note,))
    gev = fit_gevrey(series, floor=thr.floor, min_shells=thr.min_shells)
    poly = fit_poly(series, floor=thr.floor, min_shells=thr.min_shells)
    notes = [f"gevrey residual {gev.residual:.6g}", f"poly residual {poly.residual:.6g}"]
    if gev.residual < thr.residual and gev.residual <= poly.residual:
        variant = "GevreyDecay" if gev.r >= 0 else "GevreyGrowth"
        if gev.s in S_BOUNDS:
            notes.append("fitted s sits on the search bound")
        model = DecayModel(variant, s=gev.s, r=abs(gev.r), logC=gev.logC)
        return RegularityReport(model, gev.residual, support, tuple(notes))
    variant = "PolyDecay" if poly.N >= 0 else "PolyGrowth"
    if poly.residual >= thr.residual:
        notes.append("high residual: no family fits well")
    model = DecayModel(variant, N=abs(poly.N), logC=poly.logC)
    return RegularityReport(model, poly.residual, support, tuple(notes))


def fit_stft_decay(xi, profile, s=None, xi_range=None, bin_width=None, floor=FLOOR,
                   min_shells=MIN_SHELLS):
    """Fit log profile(xi) = logC - r |xi|^(1/s) on |xi|-shell maxima.

    Parameters
    ----------
    xi : array, shape (K, d)
        Frequency nodes.
    profile : array, shape (K,)
        Typically max over x of |V_phi f(x, xi)|.
    s : float, optional
        Fixed order; searched on [0.1, 10] when omitted.
    xi_range : (float, float), optional
        Radii outside this interval are ignored.
    bin_width : float, optional
        Radial shell width; defaults to the smallest nonzero node spacing.

    Only shells from the radius of the overall maximum outward enter the
    regression, so the fit sees the decaying tail.

    Returns
    -------
    (s, r, residual)
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    profile = np.asarray(profile, dtype=float).reshape(-1)
    rho = np.linalg.norm(xi, axis=1)
    keep = profile > floor
    if xi_range is not None:
        keep &= (rho >= xi_range[0]) & (rho <= xi_range[1])
    if not np.any(keep):
        raise InsufficientSupport("profile vanishes on the requested range")
    rho, prof = rho[keep], profile[keep]
    if bin_width is None:
        u = np.unique(np.round(rho, 12))
        gaps = np.diff(u)
        bin_width = float(np.min(gaps[gaps > 0])) if np.any(gaps > 0) else 1.0
    bins = np.round(rho / bin_width).astype(np.int64)
    uniq, inv = np.unique(bins, return_inverse=True)
    inv = inv.reshape(-1)
    smax = np.full(uniq.size, -np.inf)
    np.maximum.at(smax, inv, prof)
    srad = uniq * bin_width
    start = int(np.argmax(smax))
    srad, smax = srad[start:], smax[start:]
    mask = srad > 0
    srad, smax = srad[mask], smax[mask]
    if srad.size < min_shells:
        raise InsufficientSupport("not enough profile shells beyond the peak",
                                  shells=int(srad.size), required=min_shells)
    s_, r, _, res = _fit_power(srad, np.log(smax), s)
    return s_, r, res
