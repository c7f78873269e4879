"""Analytic short-term stability budget of the dual-line clock.

All σ values are coefficients of 1/√τ (τ in seconds).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .constants import CONST
from .errors import ConfigError


@dataclass(frozen=True)
class ClockParams:
    nu_c: float  # Hz
    tau_a: float  # s, excited-state lifetime
    atoms: float
    eta_col: float = 0.2
    eta_det: float = 0.9
    lo_psd: float = 1.0  # Hz²/Hz, white frequency noise seen at 2f
    f_s: float = 1e3  # Hz, ν± switching rate
    f_m: float = 1e4  # Hz, lock-in modulation rate
    saturation: float = 1.0
    # optional separate LO noise levels at 2 f_s and 2 f_m
    lo_psd_2fs: float | None = None
    lo_psd_2fm: float | None = None

    def __post_init__(self):
        for name in ("nu_c", "tau_a", "f_s", "f_m"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.atoms < 0 or self.saturation < 0 or self.lo_psd < 0:
            raise ConfigError("atom number, saturation and LO noise must be non-negative")
        for name in ("eta_col", "eta_det"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class StabilityBudget:
    linewidth: float  # Hz, FWHM
    rate: float  # detected photons / s
    photocurrent: float  # A
    snr: float  # in a 1 Hz bandwidth
    sigma_qpn: float
    sigma_im_lo: float
    sigma_im_shot: float
    sigma_total: float
    im_lo_by_process: dict = field(default_factory=dict)

    def components(self) -> dict[str, float]:
        return {"qpn": self.sigma_qpn, "im_lo": self.sigma_im_lo,
                "im_shot": self.sigma_im_shot, "total": self.sigma_total}

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_text(self) -> str:
        rows = [
            ("linewidth", self.linewidth, "Hz"),
            ("detection rate", self.rate, "1/s"),
            ("photocurrent", self.photocurrent, "A"),
            ("SNR", self.snr, "sqrt(Hz)"),
            ("sigma_QPN", self.sigma_qpn, "1/sqrt(tau)"),
            ("sigma_IM_LO", self.sigma_im_lo, "1/sqrt(tau)"),
            ("sigma_IM_shot", self.sigma_im_shot, "1/sqrt(tau)"),
            ("sigma_total", self.sigma_total, "1/sqrt(tau)"),
        ]
        rows += [(f"  IM_LO at {k}", v, "1/sqrt(tau)") for k, v in sorted(self.im_lo_by_process.items())]
        return "\n".join(f"{name:<16} {value:12.4e}  {unit}" for name, value, unit in rows) + "\n"


def linewidth(tau_a: float, saturation: float = 1.0) -> float:
    """Power-broadened FWHM √(1+s)/(2π τ_a) in Hz."""
    if not tau_a > 0:
        raise ValueError("lifetime must be positive")
    return math.sqrt(1.0 + saturation) / (2 * math.pi * tau_a)


def detection_rate(p: ClockParams) -> tuple[float, float, float]:
    """(photon rate 1/s, photocurrent A, shot-noise SNR in 1 Hz)."""
    s = p.saturation
    rate = p.eta_col * p.eta_det * p.atoms * s / (2 * (1 + s)) / p.tau_a
    return rate, CONST.elementary_charge * rate, math.sqrt(rate / 2)


def qpn_stability(dnu: float, nu_c: float, rate: float) -> float:
    if rate <= 0:
        return math.inf
    return dnu / nu_c / math.sqrt(rate)


def _im_lo(psd: float, nu_c: float) -> float:
    return math.sqrt(psd) / (2 * nu_c)


def intermodulation(p: ClockParams, dnu: float, snr: float) -> tuple[float, float]:
    """(LO contribution, detection shot-noise contribution)."""
    shot = math.sqrt(dnu / snr) / (2 * p.nu_c) if snr > 0 else math.inf
    return _im_lo(p.lo_psd, p.nu_c), shot


def total_budget(p: ClockParams) -> StabilityBudget:
    dnu = linewidth(p.tau_a, p.saturation)
    rate, current, snr = detection_rate(p)
    qpn = qpn_stability(dnu, p.nu_c, rate)
    lo, shot = intermodulation(p, dnu, snr)
    by_process = {
        "2f_s": _im_lo(p.lo_psd if p.lo_psd_2fs is None else p.lo_psd_2fs, p.nu_c),
        "2f_m": _im_lo(p.lo_psd if p.lo_psd_2fm is None else p.lo_psd_2fm, p.nu_c),
    }
    total = math.sqrt(qpn ** 2 + lo ** 2 + shot ** 2)
    return StabilityBudget(dnu, rate, current, snr, qpn, lo, shot, total, by_process)
