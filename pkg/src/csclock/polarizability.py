"""Dynamic polarizabilities by sum over states, magic wavelengths, BBR shift.

Polarizabilities are reported in Å³ (Gaussian polarizability volume).
Frequencies inside the sums are in atomic units; linewidths are neglected,
so every evaluation point must stay outside a small exclusion zone around
each resonance of the dataset.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .angular import wigner6j
from .constants import A3_PER_AU, CONST
from .dataset import AtomicDataset, LevelId, TransitionRecord
from .errors import (
    EmptyDataset,
    EmptyWindow,
    InvalidF,
    InvalidM,
    NegativeTemperature,
    TooCloseToResonance,
)

DEFAULT_EXCLUSION_NM = 0.01
GROUND_STATE = {"Cs": "6s1/2", "Rb87": "5s1/2"}


@dataclass(frozen=True)
class PolarizabilityRecord:
    level: LevelId
    wavelength_nm: float | None  # None for the static limit
    alpha0: float  # Å³
    alpha2: float  # Å³
    core_included: bool

    @property
    def is_static(self) -> bool:
        return self.wavelength_nm is None


@dataclass(frozen=True)
class HyperfinePolarizability:
    f: int
    m: int
    alpha: float  # Å³
    wavelength_nm: float | None


@dataclass(frozen=True)
class MagicPoint:
    wavelength_nm: float
    slope_per_mhz: float  # d(Δα)/dν, Å³/MHz
    bracket: tuple[float, float]
    residual: float  # Δα at the root, Å³


def _omega_au(wavelength_nm):
    """Photon angular frequency in Hartree for a vacuum wavelength in nm."""
    return CONST.c / (np.asarray(wavelength_nm, dtype=float) * 1e-9) / CONST.hartree_hz


def _partners(d: AtomicDataset, level: LevelId) -> list[tuple[TransitionRecord, float, Fraction]]:
    """(transition, signed ω_ba in a.u., partner j) for each line touching level."""
    out = []
    for t in d.transitions:
        if t.lower.label == level.label:
            out.append((t, float(_omega_au(t.wavelength_nm)), t.upper.j))
        elif t.upper.label == level.label:
            out.append((t, -float(_omega_au(t.wavelength_nm)), t.lower.j))
    return out


def _tensor_weight(j: Fraction, jp: Fraction) -> float:
    c = math.sqrt(5 * j * (2 * j - 1) / (6 * (j + 1) * (2 * j + 1) * (2 * j + 3)))
    phase = -1 if int(j + jp + 1) % 2 else 1
    return -4 * c * phase * float(wigner6j(j, 1, jp, 1, j, 2))


def _check_resonances(partners, wavelengths_nm: np.ndarray, exclusion_nm: float):
    for t, _, _ in partners:
        close = np.abs(wavelengths_nm - t.wavelength_nm) < exclusion_nm
        if np.any(close):
            raise TooCloseToResonance(t, float(wavelengths_nm[np.argmax(close)]))


def polarizability_arrays(d: AtomicDataset, level: LevelId, wavelengths_nm,
                          exclusion_nm: float = DEFAULT_EXCLUSION_NM,
                          include_core: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized α0, α2 (Å³) of a fine-structure level over a wavelength array.

    ``np.inf`` stands for the static limit.
    """
    partners = _partners(d, level)
    if not partners:
        raise EmptyDataset(f"dataset has no transitions for {level.label}")
    lam = np.atleast_1d(np.asarray(wavelengths_nm, dtype=float))
    _check_resonances(partners, lam, exclusion_nm)
    w = _omega_au(lam)
    j = level.j
    a0 = np.zeros_like(w)
    a2 = np.zeros_like(w)
    for t, wba, jp in partners:
        term = t.reduced_dipole ** 2 * wba / (wba ** 2 - w ** 2)
        a0 += term
        if j >= 1:
            a2 += _tensor_weight(j, jp) * term
    a0 *= float(2 / (3 * (2 * j + 1)))
    if include_core and level.label == GROUND_STATE.get(d.species):
        a0 += d.core_polarizability_a03
    return a0 * A3_PER_AU, a2 * A3_PER_AU


def dynamic_polarizability(d: AtomicDataset, level: LevelId, wavelength_nm: float | str | None,
                           exclusion_nm: float = DEFAULT_EXCLUSION_NM) -> PolarizabilityRecord:
    """Scalar and tensor polarizability of a fine-structure level.

    ``wavelength_nm`` may be ``None`` or ``"static"`` for the dc limit.
    The core contribution is added to the ground state only.
    """
    static = wavelength_nm is None or wavelength_nm == "static"
    lam = math.inf if static else float(wavelength_nm)
    a0, a2 = polarizability_arrays(d, level, lam, exclusion_nm)
    alpha2 = float(a2[0]) if level.j >= 1 else 0.0
    return PolarizabilityRecord(level.fine, None if static else lam, float(a0[0]), alpha2,
                                level.label == GROUND_STATE.get(d.species))


def tensor_recoupling_factor(j, spin, f) -> Fraction:
    """Ratio α2^(f)/α2^(j) for hyperfine level f of a level j with nuclear spin I."""
    j, spin, f = Fraction(j), Fraction(spin), Fraction(f)
    if j < 1 or f < 1:
        return Fraction(0)
    k = f * (f + 1) + j * (j + 1) - spin * (spin + 1)
    num = 3 * k * (k - 1) - 4 * f * (f + 1) * j * (j + 1)
    den = (2 * f + 3) * (2 * f + 2) * j * (2 * j - 1)
    return num / den


def _check_fm(j: Fraction, spin: Fraction, f: int, m: int):
    if Fraction(f).denominator != 1 or not abs(j - spin) <= f <= j + spin:
        raise InvalidF(f"f={f} outside {abs(j - spin)}..{j + spin}")
    if Fraction(m).denominator != 1 or abs(m) > f:
        raise InvalidM(f"m={m} not allowed for f={f}")


def m_coefficient(f: int, m: int) -> float:
    return (3 * m * m - f * (f + 1)) / (f * (2 * f - 1)) if f >= 1 else 0.0


def hyperfine_polarizability(rec: PolarizabilityRecord, spin, f: int, m: int) -> HyperfinePolarizability:
    spin = Fraction(spin)
    _check_fm(rec.level.j, spin, f, m)
    alpha = rec.alpha0
    if rec.alpha2:
        alpha += m_coefficient(f, m) * float(tensor_recoupling_factor(rec.level.j, spin, f)) * rec.alpha2
    return HyperfinePolarizability(f, m, alpha, rec.wavelength_nm)


def state_polarizability(d: AtomicDataset, state: LevelId, wavelengths_nm,
                         exclusion_nm: float = DEFAULT_EXCLUSION_NM) -> np.ndarray:
    """α(f, m) in Å³ over a wavelength array for a hyperfine-resolved state."""
    a0, a2 = polarizability_arrays(d, state.fine, wavelengths_nm, exclusion_nm)
    if state.f is None:
        return a0
    _check_fm(state.j, d.nuclear_spin, state.f, state.m)
    if state.j < 1:
        return a0
    factor = float(tensor_recoupling_factor(state.j, d.nuclear_spin, state.f))
    return a0 + m_coefficient(state.f, state.m) * factor * a2


def differential_polarizability(d: AtomicDataset, ground: LevelId, excited: LevelId, wavelengths_nm,
                                exclusion_nm: float = DEFAULT_EXCLUSION_NM) -> np.ndarray:
    return (state_polarizability(d, excited, wavelengths_nm, exclusion_nm)
            - state_polarizability(d, ground, wavelengths_nm, exclusion_nm))


def tensor_spread(d: AtomicDataset, excited: LevelId, wavelength_nm: float) -> float:
    """|[α(f, f) − α(f, 0)] / α(f, 0)| for the excited hyperfine level."""
    f = excited.f
    hi = state_polarizability(d, LevelId(d.species, excited.config, excited.j, f, f), wavelength_nm)[0]
    lo = state_polarizability(d, LevelId(d.species, excited.config, excited.j, f, 0), wavelength_nm)[0]
    return float(abs((hi - lo) / lo))


def resonances(d: AtomicDataset, *levels: LevelId) -> list[TransitionRecord]:
    labels = {lv.label for lv in levels}
    return sorted({t for t in d.transitions if labels & set(t.pair)}, key=lambda t: t.wavelength)


def _slope_per_mhz(fn, lam: float, h: float = 1e-4) -> float:
    dadl = (fn(lam + h) - fn(lam - h)) / (2 * h)  # Å³/nm
    dl_dnu = -(lam * 1e-9) ** 2 / CONST.c * 1e9 * 1e6  # nm per MHz
    return dadl * dl_dnu


def find_magic_wavelengths(d: AtomicDataset, ground: LevelId, excited: LevelId,
                           window: Sequence[float] = (795.0, 810.0), step: float = 0.01,
                           exclusion_nm: float = DEFAULT_EXCLUSION_NM,
                           tol: float = 1e-6) -> list[MagicPoint]:
    """Zeros of Δα(λ) = α_e − α_g inside a wavelength window.

    Sign changes on the grid that straddle a resonance are poles, not roots,
    and are skipped.  Each root is refined by bisection until |Δα| < ``tol``.
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo or step <= 0:
        raise EmptyWindow(f"empty wavelength window [{lo}, {hi}]")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(n)
    lines = np.array([t.wavelength_nm for t in resonances(d, ground, excited)])
    valid = np.ones(n, dtype=bool)
    for lam0 in lines:
        valid &= np.abs(grid - lam0) >= exclusion_nm
    grid = grid[valid]
    if grid.size < 2:
        raise EmptyWindow(f"window [{lo}, {hi}] has no usable grid points")
    delta = differential_polarizability(d, ground, excited, grid, exclusion_nm)

    def fn(lam: float) -> float:
        return float(differential_polarizability(d, ground, excited, lam, 0.0)[0])

    points = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], delta[:-1], delta[1:]):
        if fa == 0:
            roots = [(a, a)]
        elif np.sign(fa) == np.sign(fb) or np.any((lines > a) & (lines < b)):
            continue
        else:
            roots = [(a, b)]
        for x0, x1 in roots:
            f0 = fn(x0)
            mid, fm = x0, f0
            for _ in range(200):
                if abs(fm) < tol or x1 - x0 < 1e-13:
                    break
                mid = 0.5 * (x0 + x1)
                fm = fn(mid)
                if np.sign(fm) == np.sign(f0):
                    x0, f0 = mid, fm
                else:
                    x1 = mid
            points.append(MagicPoint(float(mid), float(_slope_per_mhz(fn, mid)), (float(a), float(b)), float(fm)))
    return points


@dataclass(frozen=True)
class PolarizabilityScan:
    wavelength_nm: np.ndarray
    alpha0_ground: np.ndarray
    alpha0_excited: np.ndarray
    alpha2_excited: np.ndarray
    delta_alpha: np.ndarray

    COLUMNS = ("wavelength_nm", "alpha0_ground", "alpha0_excited", "alpha2_excited", "delta_alpha")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for row in zip(*(getattr(self, c) for c in self.COLUMNS)):
            writer.writerow([f"{row[0]:.6f}"] + [f"{x:.6e}" for x in row[1:]])
        return buf.getvalue()


def scan(d: AtomicDataset, ground: LevelId, excited: LevelId, wavelengths_nm,
         exclusion_nm: float = DEFAULT_EXCLUSION_NM) -> PolarizabilityScan:
    """Polarizabilities over a grid; points inside exclusion zones are dropped."""
    lam = np.asarray(wavelengths_nm, dtype=float)
    keep = np.ones(lam.shape, dtype=bool)
    for t in resonances(d, ground, excited):
        keep &= np.abs(lam - t.wavelength_nm) >= exclusion_nm
    lam = lam[keep]
    a0g, _ = polarizability_arrays(d, ground.fine, lam, exclusion_nm)
    a0e, a2e = polarizability_arrays(d, excited.fine, lam, exclusion_nm)
    delta = differential_polarizability(d, ground, excited, lam, exclusion_nm)
    return PolarizabilityScan(lam, a0g, a0e, a2e, delta)


def bbr_shift(shift_ground_300k: float, shift_excited_300k: float, temperature: float) -> tuple[float, float]:
    """Differential blackbody shift (Hz) and its temperature sensitivity (Hz/K)."""
    if temperature < 0:
        raise NegativeTemperature(f"T = {temperature} K")
    ref = shift_excited_300k - shift_ground_300k
    return ref * (temperature / 300.0) ** 4, 4 * ref * temperature ** 3 / 300.0 ** 4
