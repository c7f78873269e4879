from __future__ import annotations

import math
from dataclasses import dataclass

from ..constants import CONST
from ..errors import ConfigError

# (6 g_f' - 4 g_f) μB/h with g_f' = 1/2, g_f = 1/4
STRETCHED_HZ_PER_T = 2 * CONST.bohr_magneton / CONST.planck_h


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one Monte Carlo lock run.

    ``rate`` is the detected photon rate Ṅ of the full sample on resonance;
    each stretched transition holds half of the atoms, so the addressed
    line scatters at most Ṅ/2.  Probe windows of length 1/(2 f_s) alternate
    between the +m and −m lines; inside a window the probe frequency is
    square-wave modulated by ±Δν/2 at f_m.
    """

    nu_c: float = CONST.c / 685e-9
    linewidth: float = 1.7584e5  # Hz, FWHM
    rate: float = 2.3e5  # 1/s
    f_s: float = 10.0
    f_m: float = 100.0
    gain: float | None = None  # integrator gain per update; None: bandwidth f_s/10
    lo_psd: float = 0.0  # Hz²/Hz, white frequency noise
    lo_cutoff: float | None = None  # Hz; white noise only above this frequency
    lo_flicker: float = 0.0  # Hz², flicker coefficient h/f below the cutoff
    b_bias: float = 0.0  # T, nominal bias known to the servo
    b_offset: float = 0.0  # T, static error of the true field
    b_noise: str = "white"  # or "random_walk"
    b_amplitude: float = 0.0  # T per step (white) or T/√s (random walk)
    averaging: bool = True  # probe both lines; False: only the +m line
    duty: float = 1.0
    duration: float = 100.0  # s
    dt: float = 1e-3  # s
    seed: int = 0
    gaussian_threshold: float = 1e4  # expected counts per half window above which to draw from a normal

    def __post_init__(self):
        for name in ("nu_c", "linewidth", "f_s", "f_m", "duration", "dt"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.rate < 0 or self.lo_psd < 0 or self.lo_flicker < 0 or self.b_amplitude < 0:
            raise ConfigError("rates and noise levels must be non-negative")
        if self.dt > 1 / (10 * self.f_m) * (1 + 1e-9):
            raise ConfigError("time step must be at most 1/(10 f_m)")
        if self.duration < 100 / self.f_s * (1 - 1e-9):
            raise ConfigError("duration must cover at least 100 switching periods")
        if not 0 < self.duty <= 1:
            raise ConfigError("duty cycle must lie in (0, 1]")
        if self.b_noise not in ("white", "random_walk"):
            raise ConfigError(f"unknown magnetic noise model {self.b_noise!r}")
        for name, value in (("window", self.window_steps_exact), ("modulation", self.half_mod_steps_exact)):
            if abs(value - round(value)) > 1e-6 or round(value) < 1:
                raise ConfigError(f"{name} length must be a whole number of time steps")
        if self.window_steps % (2 * self.half_mod_steps):
            raise ConfigError("each probe window must hold whole modulation periods")

    @property
    def window_steps_exact(self) -> float:
        return 1 / (2 * self.f_s * self.dt)

    @property
    def half_mod_steps_exact(self) -> float:
        return 1 / (2 * self.f_m * self.dt)

    @property
    def window_steps(self) -> int:
        return int(round(self.window_steps_exact))

    @property
    def half_mod_steps(self) -> int:
        return int(round(self.half_mod_steps_exact))

    @property
    def n_windows(self) -> int:
        return int(self.duration * 2 * self.f_s + 1e-9)

    @property
    def servo_gain(self) -> float:
        if self.gain is not None:
            return self.gain
        # each line is corrected once per switching period
        return 2 * math.pi * (self.f_s / 10) / self.f_s

    @property
    def expected_sigma(self) -> float:
        """Shot-noise white-FM coefficient (Δν/ν_c)/√Ṅ."""
        return self.linewidth / self.nu_c / math.sqrt(self.rate) if self.rate > 0 else math.inf
