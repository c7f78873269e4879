"""Projected dark-lattice geometry, trap depth and axial sideband structure."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .constants import CONST
from .errors import ConfigError, SubwavelengthPeriod, ZeroArea, ZeroBuildup


@dataclass(frozen=True)
class LatticeConfig:
    period_um: float = 0.9
    wavelength_um: float = 0.803
    region_um: float = 250.0
    power_w: float = 2.0
    axial_power_w: float = 2.2
    buildup: float = 50.0
    axial_waist_um: float | None = None  # side w of the 1D beam area w²; None: region_um
    fill: float = 0.5
    probe_nm: float = 685.0
    alpha0_A3: float = -374.0
    linewidth_hz: float = 1.75e5  # saturation-broadened probe linewidth
    mass_kg: float = CONST.cs_mass

    def __post_init__(self):
        if not 0.0 <= self.fill <= 1.0:
            raise ConfigError(f"fill fraction {self.fill} outside [0, 1]")
        if self.power_w < 0 or self.axial_power_w < 0:
            raise ConfigError("powers must be non-negative")
        for name in ("period_um", "wavelength_um", "region_um", "probe_nm", "mass_kg", "linewidth_hz"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.axial_waist_um is not None and not self.axial_waist_um > 0:
            raise ConfigError("axial_waist_um must be positive")

    @property
    def paraxial(self) -> bool:
        return self.period_um > self.wavelength_um / 2

    @property
    def area_m2(self) -> float:
        return (self.region_um * 1e-6) ** 2

    @property
    def axial_area_m2(self) -> float:
        w = self.region_um if self.axial_waist_um is None else self.axial_waist_um
        return (w * 1e-6) ** 2


@dataclass(frozen=True)
class TrapMetrics:
    talbot_length_um: float
    sites: float
    atoms: float
    depth_uK: float
    recoil_uK: float
    depth_recoils: float
    axial_frequency_mhz: float
    lamb_dicke: float
    sideband_relative: float


def talbot_length(wavelength_um: float, period_um: float) -> float:
    if period_um < wavelength_um:
        raise SubwavelengthPeriod(f"period {period_um} um is below the wavelength {wavelength_um} um")
    ratio = min(1.0, (wavelength_um / period_um) ** 2)
    return wavelength_um / (1.0 - math.sqrt(1.0 - ratio))


def lattice_geometry(cfg: LatticeConfig) -> tuple[float, float]:
    """(site count, atom number) for a cubic region filled with the projected array."""
    lt = talbot_length(cfg.wavelength_um, cfg.period_um)
    sites = cfg.region_um ** 3 / (cfg.period_um ** 2 * lt)
    return sites, cfg.fill * sites


def _potential(alpha_A3: float, intensity: float) -> float:
    # U = |α| I / (2 ε0 c) with α = 4π ε0 α_vol
    return 2 * math.pi * abs(alpha_A3) * 1e-30 * intensity / CONST.c


def recoil_energy(wavelength_m: float, mass_kg: float) -> float:
    """E_rec = h² / (2 m λ²) in J."""
    return CONST.planck_h ** 2 / (2 * mass_kg * wavelength_m ** 2)


def trap_depth(alpha_A3: float, power_w: float, area_m2: float, wavelength_um: float = 0.803,
               mass_kg: float = CONST.cs_mass, bright: bool = False) -> tuple[float, float]:
    """Trap depth in μK and in units of the lattice-light recoil energy.

    Uniform intensity P/area with full-contrast dark holes.  A positive
    polarizability is only accepted with ``bright=True``.
    """
    if not area_m2 > 0:
        raise ZeroArea("trap area must be positive")
    if alpha_A3 > 0 and not bright:
        raise ConfigError("positive polarizability gives a bright trap; pass bright=True")
    depth = _potential(alpha_A3, power_w / area_m2)
    return depth / CONST.kB * 1e6, depth / recoil_energy(wavelength_um * 1e-6, mass_kg)


def axial_frequency(alpha_A3: float, intensity: float, wavelength_m: float, mass_kg: float) -> float:
    """Harmonic frequency (Hz) at the bottom of U0 cos²(kz) with U0 set by ``intensity``."""
    u0 = _potential(alpha_A3, intensity)
    return math.sqrt(2 * u0 / mass_kg) / wavelength_m


def lamb_dicke(axial_hz: float, probe_m: float, mass_kg: float) -> float:
    """η = k √(ħ / (2 m ω))."""
    if axial_hz <= 0:
        return math.inf
    k = 2 * math.pi / probe_m
    return k * math.sqrt(CONST.hbar / (2 * mass_kg * 2 * math.pi * axial_hz))


def relative_absorption(detuning_hz, linewidth_hz: float):
    """Lorentzian response normalized to 1 on resonance; FWHM ``linewidth_hz``."""
    return 1.0 / (1.0 + (2.0 * np.asarray(detuning_hz, dtype=float) / linewidth_hz) ** 2)


@dataclass(frozen=True)
class SidebandResult:
    axial_hz: float
    lamb_dicke: float
    sideband_relative: float
    detuning_hz: np.ndarray
    absorption: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["detuning_Hz", "relative_absorption"])
        for x, y in zip(self.detuning_hz, self.absorption):
            w.writerow([f"{x:.1f}", f"{y:.6e}"])
        return buf.getvalue()


def axial_sidebands(cfg: LatticeConfig, span_hz: float = 3e6, samples: int = 1201) -> SidebandResult:
    """Axial trap frequency, Lamb-Dicke parameter and the absorption profile.

    The 1D lattice is a standing wave in a build-up cavity: each running
    wave carries ``buildup * P / w²`` and the antinode intensity is four
    times that.  Sidebands enter the sampled profile with weight η².
    """
    if not cfg.buildup > 0 or not cfg.axial_power_w > 0:
        raise ZeroBuildup("axial lattice needs positive power and build-up")
    running = cfg.buildup * cfg.axial_power_w / cfg.axial_area_m2
    nu = axial_frequency(cfg.alpha0_A3, 4 * running, cfg.wavelength_um * 1e-6, cfg.mass_kg)
    eta = lamb_dicke(nu, cfg.probe_nm * 1e-9, cfg.mass_kg)
    side = float(relative_absorption(nu, cfg.linewidth_hz))
    det = np.linspace(-span_hz, span_hz, samples)
    profile = (relative_absorption(det, cfg.linewidth_hz)
               + eta ** 2 * (relative_absorption(det - nu, cfg.linewidth_hz)
                             + relative_absorption(det + nu, cfg.linewidth_hz)))
    profile = profile / (1.0 + 2 * eta ** 2 * side)
    return SidebandResult(nu, eta, side, det, profile)


def depumping(saturation: float, hfs_splitting_rad_s: float, gamma_rad_s: float,
              branching: float = 1.0) -> tuple[float, float]:
    """Off-resonant scattering via the neighbouring hyperfine level.

    Returns (ratio to the clock scattering rate, rate in 1/s); the rate
    carries an optional branching multiplier to the dark ground level.
    """
    if not saturation > 0 or not hfs_splitting_rad_s > 0 or not gamma_rad_s > 0:
        raise ValueError("saturation, splitting and linewidth must be positive")
    ratio = 0.5 / (2.0 / saturation + 4.0 * hfs_splitting_rad_s ** 2 / gamma_rad_s ** 2)
    return ratio, ratio * gamma_rad_s * branching


def design(cfg: LatticeConfig) -> TrapMetrics:
    lt = talbot_length(cfg.wavelength_um, cfg.period_um)
    sites, atoms = lattice_geometry(cfg)
    depth, recoils = trap_depth(cfg.alpha0_A3, cfg.power_w, cfg.area_m2, cfg.wavelength_um,
                                cfg.mass_kg, bright=cfg.alpha0_A3 > 0)
    rec = recoil_energy(cfg.wavelength_um * 1e-6, cfg.mass_kg) / CONST.kB * 1e6
    sb = axial_sidebands(cfg, samples=3)
    return TrapMetrics(lt, sites, atoms, depth, rec, recoils, sb.axial_hz / 1e6, sb.lamb_dicke,
                       sb.sideband_relative)
