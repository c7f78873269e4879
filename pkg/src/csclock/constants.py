"""Physical constants (CODATA 2018 via scipy) and polarizability units."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as sc

from .errors import UnknownUnit


@dataclass(frozen=True)
class PhysConstants:
    planck_h: float = sc.h
    hbar: float = sc.hbar
    c: float = sc.c
    kB: float = sc.k
    bohr_magneton: float = sc.physical_constants["Bohr magneton"][0]
    elementary_charge: float = sc.e
    bohr_radius: float = sc.physical_constants["Bohr radius"][0]
    vacuum_permittivity: float = sc.epsilon_0
    cs_mass: float = 132.905451961 * sc.atomic_mass
    rb87_mass: float = 86.909180531 * sc.atomic_mass
    electron_g: float = -sc.physical_constants["electron g factor"][0]
    hartree_hz: float = sc.physical_constants["hartree-hertz relationship"][0]

    def mass(self, species: str) -> float:
        return {"Cs": self.cs_mass, "Rb87": self.rb87_mass}[species]


CONST = PhysConstants()

# one atomic unit of polarizability, a0^3 (Gaussian volume) -> SI
_A3_PER_A03 = (CONST.bohr_radius * 1e10) ** 3
_SI_PER_A3 = 4 * math.pi * CONST.vacuum_permittivity * 1e-30

_ALIASES = {
    "A3": "A3", "A^3": "A3", "Å³": "A3", "Å^3": "A3", "angstrom3": "A3",
    "a03": "a03", "a0³": "a03", "a0^3": "a03", "au": "a03",
    "SI": "SI", "C m^2/V": "SI", "C·m²/V": "SI", "C m2/V": "SI",
}
# value of one unit expressed in Å³
_IN_A3 = {"A3": 1.0, "a03": _A3_PER_A03, "SI": 1.0 / _SI_PER_A3}


def _canon(unit: str) -> str:
    try:
        return _ALIASES[unit]
    except KeyError:
        raise UnknownUnit(f"unknown polarizability unit {unit!r}") from None


def convert_polarizability(value: float, from_unit: str, to_unit: str) -> float:
    """Linear conversion between Å³, a0³ (atomic units) and SI (C·m²/V).

    The volume units are the Gaussian polarizability volume; SI values carry
    the factor 4πε0.
    """
    src, dst = _canon(from_unit), _canon(to_unit)
    if src == dst:
        return value
    return value * _IN_A3[src] / _IN_A3[dst]


A3_PER_AU = _A3_PER_A03
