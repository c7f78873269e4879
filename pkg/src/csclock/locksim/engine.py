from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri, pdtr

from ..errors import UnstableServo
from .config import STRETCHED_HZ_PER_T, SimConfig

RUNAWAY_LINEWIDTHS = 1e4


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Output of one lock run.

    ``y`` is the fractional frequency error of the steered output at every
    time step; ``counts`` holds (high-side, low-side) photon counts per probe
    window and ``corrections`` the (+m, −m) laser offsets in Hz applied
    during each window.
    """

    dt: float
    y: np.ndarray
    counts: np.ndarray
    corrections: np.ndarray
    lines: np.ndarray  # +1 / −1 per window, 0 for dead windows
    seed: int

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.y.size) * self.dt

    def to_csv(self, decimate: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_s", "y"])
        for t, v in zip(self.time[::decimate], self.y[::decimate]):
            w.writerow([f"{t:.6f}", f"{v:.9e}"])
        return buf.getvalue()


def _lo_noise(cfg: SimConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    if cfg.lo_psd == 0 and cfg.lo_flicker == 0:
        return np.zeros(n)
    white = rng.standard_normal(n)
    if cfg.lo_cutoff is None:
        return np.sqrt(cfg.lo_psd / (2 * cfg.dt)) * white
    # shape the one-sided PSD in the frequency domain
    freqs = np.fft.rfftfreq(n, cfg.dt)
    psd = np.where(freqs >= cfg.lo_cutoff, cfg.lo_psd, 0.0)
    low = (freqs > 0) & (freqs < cfg.lo_cutoff)
    psd[low] = cfg.lo_flicker / freqs[low]
    spectrum = np.fft.rfft(white) * np.sqrt(psd / (2 * cfg.dt))
    return np.fft.irfft(spectrum, n)


def _field(cfg: SimConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    base = cfg.b_bias + cfg.b_offset
    if cfg.b_amplitude == 0:
        return np.full(n, base)
    noise = rng.standard_normal(n)
    if cfg.b_noise == "white":
        return base + cfg.b_amplitude * noise
    return base + np.cumsum(cfg.b_amplitude * np.sqrt(cfg.dt) * noise)


def _live_windows(n: int, duty: float) -> np.ndarray:
    # spread dead windows evenly: window k is live when floor((k+1)d) > floor(kd)
    k = np.arange(n)
    return np.floor((k + 1) * duty + 1e-12) > np.floor(k * duty + 1e-12)


def _draw(u: float, mean: float, threshold: float) -> int:
    """Count with expectation ``mean`` by inversion of a shared uniform ``u``.

    Inversion keeps the draw monotone in ``mean`` so runs that share a seed
    stay coupled when only the detuning changes.
    """
    if mean <= 0:
        return 0
    z = ndtri(u)
    if mean > threshold:
        return max(int(np.rint(mean + np.sqrt(mean) * z)), 0)
    # Cornish-Fisher start, then walk to the exact quantile
    k = max(int(np.floor(mean + np.sqrt(mean) * z + (z * z - 1) / 6)), 0)
    while pdtr(k, mean) < u:
        k += 1
    while k > 0 and pdtr(k - 1, mean) >= u:
        k -= 1
    return k


def simulate(cfg: SimConfig) -> SimTrace:
    """Run the lock loop for ``cfg.duration`` seconds."""
    streams = np.random.SeedSequence(cfg.seed).spawn(3)
    rng_lo, rng_b, rng_counts = (np.random.default_rng(s) for s in streams)
    nw, ws, hm = cfg.n_windows, cfg.window_steps, cfg.half_mod_steps
    n = nw * ws
    x = _lo_noise(cfg, n, rng_lo)
    field = _field(cfg, n, rng_b)

    fm = np.where((np.arange(ws) // hm) % 2 == 0, 1.0, -1.0)
    half = cfg.linewidth / 2
    r0 = cfg.rate / 2  # the addressed line holds half of the atoms
    window_time = ws * cfg.dt
    gain = cfg.servo_gain
    limit = RUNAWAY_LINEWIDTHS * cfg.linewidth
    live = _live_windows(nw, cfg.duty)

    corr = {1: STRETCHED_HZ_PER_T * cfg.b_bias, -1: -STRETCHED_HZ_PER_T * cfg.b_bias}
    y = np.empty(n)
    counts = np.zeros((nw, 2), dtype=np.int64)
    history = np.empty((nw, 2))
    lines = np.zeros(nw, dtype=np.int8)
    for k in range(nw):
        sl = slice(k * ws, (k + 1) * ws)
        line = 1 if (not cfg.averaging or k % 2 == 0) else -1
        history[k] = corr[1], corr[-1]
        xs = x[sl]
        if cfg.averaging:
            y[sl] = (xs + 0.5 * (corr[1] + corr[-1])) / cfg.nu_c
        else:
            y[sl] = (xs + corr[1] - STRETCHED_HZ_PER_T * cfg.b_bias) / cfg.nu_c
        if not live[k]:
            continue
        lines[k] = line
        detuning = xs + corr[line] - line * STRETCHED_HZ_PER_T * field[sl]
        if np.max(np.abs(detuning)) > limit:
            raise UnstableServo(f"detuning exceeded {RUNAWAY_LINEWIDTHS:g} linewidths at t = {k * window_time:.3f} s")
        probe = detuning + fm * half
        mean = r0 * cfg.dt / (1 + (probe / half) ** 2)
        # only the two half-window totals enter the discriminant
        u_hi, u_lo = rng_counts.random(2)
        hi = _draw(u_hi, float(mean[fm > 0].sum()), cfg.gaussian_threshold)
        lo = _draw(u_lo, float(mean[fm < 0].sum()), cfg.gaussian_threshold)
        counts[k] = hi, lo
        if r0 > 0:
            # linearized discriminant: N_hi − N_lo ≈ −Ṅ_line T δ / Δν
            estimate = -cfg.linewidth * (hi - lo) / (r0 * window_time)
            corr[line] -= gain * estimate
    return SimTrace(cfg.dt, y, counts, history, lines, cfg.seed)
