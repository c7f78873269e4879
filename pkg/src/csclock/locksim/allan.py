from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from ..errors import TooShortTrace


@dataclass(frozen=True, eq=False)
class AllanSeries:
    tau: np.ndarray
    sigma: np.ndarray
    lower: np.ndarray  # confidence half-width below sigma
    upper: np.ndarray  # confidence half-width above sigma
    edf: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau_s", "adev", "minus", "plus"])
        for row in zip(self.tau, self.sigma, self.lower, self.upper):
            w.writerow([f"{row[0]:.6g}"] + [f"{v:.6e}" for v in row[1:]])
        return buf.getvalue()

    def slope(self, tau_min: float | None = None, tau_max: float | None = None) -> float:
        """Least-squares log-log slope over a τ range."""
        keep = np.ones(self.tau.size, dtype=bool)
        if tau_min is not None:
            keep &= self.tau >= tau_min
        if tau_max is not None:
            keep &= self.tau <= tau_max
        return float(np.polyfit(np.log(self.tau[keep]), np.log(self.sigma[keep]), 1)[0])


def white_fm_edf(n: int, m: int) -> float:
    """Equivalent degrees of freedom of the overlapping estimator for white FM.

    ``n`` counts frequency samples and ``m`` the averaging factor.
    """
    n_phase = n + 1
    return (3 * (n_phase - 1) / (2 * m) - 2 * (n_phase - 2) / n_phase) * 4 * m * m / (4 * m * m + 5)


def overlapping_adev(y: np.ndarray, dt: float, m: int) -> float:
    phase = np.concatenate([[0.0], np.cumsum(y)]) * dt
    tau = m * dt
    d = phase[2 * m:] - 2 * phase[m:-m] + phase[:-2 * m]
    return float(np.sqrt(np.mean(d * d) / (2 * tau * tau)))


def allan_deviation(trace_or_y, tau, dt: float | None = None, confidence: float = 0.683) -> AllanSeries:
    """Overlapping Allan deviation of fractional frequency samples.

    Accepts a :class:`SimTrace` or a plain array plus ``dt``.  Each τ is
    rounded to a whole number of samples.
    """
    if dt is None:
        y, dt = trace_or_y.y, trace_or_y.dt
    else:
        y = np.asarray(trace_or_y, dtype=float)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    ms = np.maximum(1, np.rint(taus / dt).astype(int))
    if y.size < 2 * ms.max() + 1:
        raise TooShortTrace(f"{y.size} samples cannot resolve tau = {ms.max() * dt:g} s")
    order = np.argsort(ms, kind="stable")
    ms = ms[order]
    sig = np.array([overlapping_adev(y, dt, int(m)) for m in ms])
    edf = np.array([max(white_fm_edf(y.size, int(m)), 1.0) for m in ms])
    p = (1 - confidence) / 2
    lo = sig * np.sqrt(edf / chi2.ppf(1 - p, edf))
    hi = sig * np.sqrt(edf / chi2.ppf(p, edf))
    return AllanSeries(ms * dt, sig, sig - lo, hi - sig, edf)
