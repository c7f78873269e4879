"""Systematic-shift sensitivities, error budgets and control requirements.

A row's sensitivity β is the clock shift in Hz per unit change of an
environmental parameter.  For a timing target δt after averaging time τ the
allowed excursion is ``δa = ν_c δt_i / (|β| τ)``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace

from .constants import CONST
from .errors import ConfigError, MissingModelInput, ZeroSensitivity
from .polarizability import bbr_shift
from .zeeman import MU_B_HZ_PER_T

ROW_ORDER = ("probe_power", "lattice_frequency", "magnetic_gradient", "dc_field", "blackbody")


@dataclass(frozen=True)
class TimingTarget:
    dt: float  # s
    tau: float  # s

    def __post_init__(self):
        if self.dt < 0 or not self.tau > 0:
            raise ConfigError("timing target needs dt >= 0 and tau > 0")

    @classmethod
    def parse(cls, text: str) -> "TimingTarget":
        """Parse strings such as ``1ns@30d`` or ``2.5e-9s@1e6s``."""
        scale = {"ps": 1e-12, "ns": 1e-9, "us": 1e-6, "ms": 1e-3, "s": 1.0,
                 "min": 60.0, "h": 3600.0, "d": 86400.0}

        def one(part: str) -> float:
            part = part.strip()
            for suffix in sorted(scale, key=len, reverse=True):
                if part.endswith(suffix):
                    try:
                        return float(part[: -len(suffix)]) * scale[suffix]
                    except ValueError:
                        break
            raise ConfigError(f"cannot parse duration {part!r}")

        try:
            dt, tau = text.split("@")
        except ValueError:
            raise ConfigError(f"target must look like '1ns@30d', got {text!r}") from None
        return cls(one(dt), one(tau))


@dataclass(frozen=True)
class BudgetRow:
    name: str
    beta: float  # Hz per unit
    unit: str
    nu_c: float  # Hz
    delta: float | None = None  # environment excursion, unit
    requirement: float | None = None  # allowed excursion, unit
    display_unit: str = ""
    display_scale: float = 1.0  # display value = value * display_scale

    @property
    def fractional(self) -> float:
        """β / ν_c, per unit."""
        return self.beta / self.nu_c

    @property
    def requirement_display(self) -> str:
        if self.requirement is None:
            return ""
        return f"{self.requirement * self.display_scale:.4g} {self.display_unit or self.unit}"


@dataclass(frozen=True)
class SystematicsInputs:
    nu_c: float | None = None  # Hz
    probe_delta_alpha_A3: float | None = None  # differential polarizability at the clock line
    probe_saturation_intensity: float | None = None  # W/m²
    lattice_slope_A3_per_mhz: float | None = None
    lattice_alpha0_A3: float | None = None
    temperature_K: float | None = 1e-6  # atom temperature for the lattice row
    dc_beta: float | None = None  # Hz/(V/m), calibrated
    bbr_ground_300k: float | None = None  # Hz
    bbr_excited_300k: float | None = None  # Hz
    bbr_temperature: float | None = 300.0  # K

    def require(self, *names: str):
        for name in names:
            if getattr(self, name) is None:
                raise MissingModelInput(name)


def fractional_target(target: TimingTarget) -> float:
    return target.dt / target.tau


def _row(name, beta, unit, nu_c, display_unit="", display_scale=1.0) -> BudgetRow:
    return BudgetRow(name, beta, unit, nu_c, display_unit=display_unit, display_scale=display_scale)


def sensitivity_coefficients(inp: SystematicsInputs) -> list[BudgetRow]:
    """The five sensitivity rows, in fixed table order."""
    inp.require("nu_c")
    nu_c = inp.nu_c
    inp.require("probe_delta_alpha_A3", "probe_saturation_intensity")
    # δν = −Δα_SI I / (2 ε0 c h) = −2π Δα_vol I / (c h); per 1 % of the saturating power
    probe = -2 * math.pi * inp.probe_delta_alpha_A3 * 1e-30 * inp.probe_saturation_intensity \
        / (CONST.c * CONST.planck_h) / 100.0
    inp.require("lattice_slope_A3_per_mhz", "lattice_alpha0_A3", "temperature_K")
    # the trap depth is ~kB T; a slope δα per MHz shifts it by the fraction δα/|α0|
    lattice = (inp.lattice_slope_A3_per_mhz / abs(inp.lattice_alpha0_A3)
               * CONST.kB * inp.temperature_K / CONST.planck_h)
    # ±δB/2 on the two stretched lines averages to μB δB / h
    magnetic = MU_B_HZ_PER_T * 1e-7
    inp.require("dc_beta")
    inp.require("bbr_ground_300k", "bbr_excited_300k", "bbr_temperature")
    _, bbr = bbr_shift(inp.bbr_ground_300k, inp.bbr_excited_300k, inp.bbr_temperature)
    return [
        _row("probe_power", probe, "%", nu_c),
        _row("lattice_frequency", lattice, "MHz", nu_c),
        _row("magnetic_gradient", magnetic, "1e-7 T", nu_c, "pT", 1e5),
        _row("dc_field", inp.dc_beta, "V/m", nu_c),
        _row("blackbody", bbr, "K", nu_c),
    ]


@dataclass(frozen=True)
class BudgetResult:
    shift: float  # Hz, signed linear sum
    fractional: float
    worst_case: float  # Hz, Σ|β δa|
    quadrature: float  # Hz, √Σ(β δa)²
    per_row: dict  # name -> Hz


def budget(rows: list[BudgetRow], deltas: dict | None = None) -> BudgetResult:
    """Aggregate δν = Σ β_i δa_i; ``deltas`` overrides each row's ``delta``."""
    deltas = deltas or {}
    per_row = {}
    for r in rows:
        da = deltas.get(r.name, r.delta)
        if da is None:
            raise MissingModelInput(f"{r.name}.delta")
        per_row[r.name] = r.beta * da
    total = sum(per_row.values())
    return BudgetResult(
        total,
        total / rows[0].nu_c if rows else 0.0,
        sum(abs(v) for v in per_row.values()),
        math.sqrt(sum(v * v for v in per_row.values())),
        per_row,
    )


def timing_error(shift_hz: float, nu_c: float, tau: float) -> float:
    return shift_hz / nu_c * tau


def requirements(rows: list[BudgetRow], target: TimingTarget, policy: str = "full") -> list[BudgetRow]:
    """Attach the allowed excursion for each row.

    ``full``: every row alone may use the whole δt.  ``equal``: δt is split
    evenly across rows.
    """
    if policy not in ("full", "equal"):
        raise ConfigError(f"unknown allocation policy {policy!r}")
    share = target.dt if policy == "full" else target.dt / max(1, len(rows))
    out = []
    for r in rows:
        if r.beta == 0:
            raise ZeroSensitivity(r.name)
        out.append(replace(r, requirement=r.nu_c * share / (abs(r.beta) * target.tau)))
    return out


_COLUMNS = ("name", "beta", "unit", "fractional", "requirement", "requirement_display")


def rows_to_csv(rows: list[BudgetRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS)
    for r in rows:
        w.writerow([r.name, f"{r.beta:.6e}", r.unit, f"{r.fractional:.6e}",
                    "" if r.requirement is None else f"{r.requirement:.6e}", r.requirement_display])
    return buf.getvalue()


def rows_to_json(rows: list[BudgetRow]) -> str:
    return json.dumps([{**asdict(r), "fractional": r.fractional, "requirement_display": r.requirement_display}
                       for r in rows], indent=2)
