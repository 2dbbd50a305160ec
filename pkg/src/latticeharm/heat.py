"""Spectral heat flow on the torus R^d / Lambda.

The solution of u_t = Delta u with u(0) = f0 is diagonal in the Fourier
basis: c(alpha) -> c(alpha) e^{-|alpha|^2 t}, with |alpha| the Euclidean
norm of the dual-lattice point.  Negative times run the flow backwards,
which is only meaningful for coefficients decaying faster than e^{-|t||alpha|^2}.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BackwardBlowup, ValidationError
from .regularity import Thresholds, classify
from .series import FourierSeries

__all__ = ["HeatTrajectory", "evolve", "trajectory", "smoothing_report", "wellposedness_check",
           "MAGNITUDE_CAP"]

MAGNITUDE_CAP = 1e300


def evolve(f0, t):
    """Heat flow of `f0` at time `t` (any sign).

    Raises
    ------
    BackwardBlowup
        Some evolved coefficient exceeds 1e300 in modulus (only possible for t < 0).
    """
    t = float(t)
    if not np.isfinite(t):
        raise ValidationError("time must be finite", t=t)
    if len(f0) == 0 or t == 0.0:
        return FourierSeries.from_arrays(f0.lattice, f0.indices, f0.values)
    rho2 = f0.radii ** 2
    # work in the log domain so a blowup is detected before it overflows
    logmag = np.log(np.abs(f0.values)) - rho2 * t
    if np.any(logmag > np.log(MAGNITUDE_CAP)):
        k = int(np.argmax(logmag))
        raise BackwardBlowup("backward heat flow exceeds the magnitude cap", t=t,
                             index=[int(v) for v in f0.indices[k]],
                             log_magnitude=float(logmag[k]), cap=MAGNITUDE_CAP)
    return FourierSeries.from_arrays(f0.lattice, f0.indices, f0.values * np.exp(-rho2 * t))


@dataclass(frozen=True)
class HeatTrajectory:
    times: tuple
    states: tuple

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValidationError("times and states differ in length")
        if any(b < a for a, b in zip(self.times, self.times[1:])):
            raise ValidationError("times must be ordered")

    def __len__(self):
        return len(self.times)

    def to_json(self):
        from .io import series_to_json

        return {"times": list(self.times), "states": [series_to_json(s) for s in self.states]}


def trajectory(f0, times):
    times = sorted(float(t) for t in times)
    return HeatTrajectory(tuple(times), tuple(evolve(f0, t) for t in times))


def smoothing_report(f0, t, thresholds=None):
    """Classify the heat flow of `f0` at a positive time.

    Bounded coefficients are expected to come out as GevreyDecay with s near
    1/2 and r near `t`.
    """
    if not t > 0:
        raise ValidationError("smoothing is reported for positive times only", t=t)
    return classify(evolve(f0, t), thresholds)


def wellposedness_check(f0, s_range, t_grid, thresholds=None):
    """Check class preservation of the heat flow on a grid of times.

    Parameters
    ----------
    f0 : FourierSeries
        Typically from :func:`latticeharm.generate.gevrey_series`.
    s_range : (float, float)
        Accepted interval for the fitted Gevrey order.
    t_grid : sequence of float
        Times of either sign.

    Returns
    -------
    dict
        ``{"initial": report, "entries": [...], "ok": bool}``.  When the
        initial series is a trigonometric polynomial every time must keep that
        class.  Otherwise forward times, and backward times when
        ``s_range`` lies below 1/2, must stay GevreyDecay with s in range.
        For s near 1/2 backward entries are flagged instead of judged, since
        the flow may turn decay into growth.
    """
    lo, hi = (float(v) for v in s_range)
    if not 0 < lo <= hi:
        raise ValidationError("s_range must satisfy 0 < lo <= hi", s_range=[lo, hi])
    initial = classify(f0, thresholds)
    trig = initial.variant == "TrigPolynomial"
    thr = thresholds or Thresholds()
    entries = []
    ok = True
    for t in sorted(float(t) for t in t_grid):
        entry = {"t": t}
        try:
            rep = classify(evolve(f0, t), thresholds)
        except BackwardBlowup as exc:
            entry.update(report=None, blowup=exc.to_json(), judged=t >= 0 or hi < 0.5,
                         ok=False, flagged=True)
            ok &= not entry["judged"]
            entries.append(entry)
            continue
        if trig:
            good, judged, flagged = rep.variant == "TrigPolynomial", True, False
        elif t >= 0 or hi < 0.5:
            good = rep.variant == "GevreyDecay" and lo <= rep.model.s <= hi
            judged, flagged = True, False
        else:
            good, judged = None, False
            flagged = rep.variant != "GevreyDecay" or rep.residual >= thr.residual
        entry.update(report=rep.to_json(), judged=judged, ok=good, flagged=flagged)
        if judged:
            ok &= bool(good)
        entries.append(entry)
    return {"initial": initial.to_json(), "sRange": [lo, hi], "entries": entries, "ok": bool(ok)}
