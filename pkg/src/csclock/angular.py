"""Exact Wigner 3j/6j symbols and relative E2 amplitudes.

Symbols are evaluated with the Racah single-sum formulas in exact integer
arithmetic.  A symbol is always of the form ``sign * sqrt(p/q)``, which
:class:`RootRational` stores exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import ForbiddenTransition, InvalidGeometry, InvalidQuantumNumbers


@dataclass(frozen=True, order=True)
class HalfInt:
    """An integer or half-integer, stored as twice its value."""

    twice: int

    @classmethod
    def of(cls, value) -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, float):
            if not (2 * value).is_integer():
                raise InvalidQuantumNumbers(f"{value} is not a half-integer")
            return cls(int(round(2 * value)))
        if isinstance(value, Rational):
            twice = Fraction(value) * 2
            if twice.denominator != 1:
                raise InvalidQuantumNumbers(f"{value} is not a half-integer")
            return cls(int(twice))
        raise InvalidQuantumNumbers(f"cannot interpret {value!r} as a half-integer")

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt.of(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).twice - self.twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __abs__(self):
        return HalfInt(abs(self.twice))

    def __float__(self):
        return self.twice / 2

    def __str__(self):
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"


@dataclass(frozen=True)
class RootRational:
    """Exact number ``sign * sqrt(square)`` with rational ``square >= 0``."""

    sign: int
    square: Fraction

    def __post_init__(self):
        object.__setattr__(self, "square", Fraction(self.square))
        if self.square < 0:
            raise ValueError("square must be non-negative")
        if self.square == 0:
            object.__setattr__(self, "sign", 0)
        elif self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def zero(cls) -> "RootRational":
        return cls(0, Fraction(0))

    @classmethod
    def from_rational(cls, value) -> "RootRational":
        value = Fraction(value)
        return cls((value > 0) - (value < 0), value * value)

    def __float__(self):
        return self.sign * math.sqrt(self.square)

    def __mul__(self, other):
        if not isinstance(other, RootRational):
            other = RootRational.from_rational(other)
        return RootRational(self.sign * other.sign, self.square * other.square)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, RootRational):
            other = RootRational.from_rational(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by an exact zero")
        return RootRational(self.sign * other.sign, self.square / other.square)

    def __neg__(self):
        return RootRational(-self.sign, self.square)

    def __abs__(self):
        return RootRational(abs(self.sign), self.square)

    def __bool__(self):
        return self.sign != 0

    def __eq__(self, other):
        if isinstance(other, RootRational):
            return self.sign == other.sign and self.square == other.square
        if isinstance(other, (int, Fraction)):
            return self == RootRational.from_rational(other)
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.sign, self.square))

    def __str__(self):
        if self.sign == 0:
            return "0"
        s = "-" if self.sign < 0 else ""
        num, den = self.square.numerator, self.square.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            return f"{s}{Fraction(rn, rd)}"
        return f"{s}sqrt({self.square})"


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _half_ints(*values) -> tuple[int, ...]:
    return tuple(HalfInt.of(v).twice for v in values)


def _triangle_twice(a: int, b: int, c: int) -> bool:
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _delta(a: int, b: int, c: int) -> Fraction:
    # triangle coefficient from twice-values; all sums are even by construction
    return Fraction(
        _fact((a + b - c) // 2) * _fact((a - b + c) // 2) * _fact((-a + b + c) // 2),
        _fact((a + b + c) // 2 + 1),
    )


@lru_cache(maxsize=65536)
def _wigner3j_twice(j1, j2, j3, m1, m2, m3) -> RootRational:
    if m1 + m2 + m3 != 0 or not _triangle_twice(j1, j2, j3):
        return RootRational.zero()
    # all integer combinations below are halved twice-values
    a = (j1 + j2 - j3) // 2
    b = (j1 - m1) // 2
    c = (j2 + m2) // 2
    d = (j3 - j2 + m1) // 2
    e = (j3 - j1 - m2) // 2
    total = 0
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        term = Fraction(1, _fact(k) * _fact(a - k) * _fact(b - k) * _fact(c - k)
                        * _fact(d + k) * _fact(e + k))
        total += -term if k % 2 else term
    if total == 0:
        return RootRational.zero()
    pref = _delta(j1, j2, j3) * (
        _fact((j1 + m1) // 2) * _fact((j1 - m1) // 2) * _fact((j2 + m2) // 2)
        * _fact((j2 - m2) // 2) * _fact((j3 + m3) // 2) * _fact((j3 - m3) // 2)
    )
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    sign = phase * (1 if total > 0 else -1)
    return RootRational(sign, pref * total * total)


def _check_jm(j: int, m: int):
    if j < 0:
        raise InvalidQuantumNumbers(f"negative angular momentum {j}/2")
    if abs(m) > j:
        raise InvalidQuantumNumbers(f"|m|={abs(m)}/2 exceeds j={j}/2")
    if (j - m) % 2:
        raise InvalidQuantumNumbers(f"j={j}/2 and m={m}/2 differ by a non-integer")


def wigner3j(j1, j2, j3, m1, m2, m3) -> RootRational:
    """Exact Wigner 3j symbol (j1 j2 j3; m1 m2 m3).

    Arguments may be ints, Fractions, half-integer floats, strings like
    ``"5/2"`` or :class:`HalfInt`.  Returns an exact zero whenever a
    selection rule fails.
    """
    t = _half_ints(j1, j2, j3, m1, m2, m3)
    for j, m in zip(t[:3], t[3:]):
        _check_jm(j, m)
    return _wigner3j_twice(*t)


@lru_cache(maxsize=65536)
def _wigner6j_twice(j1, j2, j3, j4, j5, j6) -> RootRational:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle_twice(*t) for t in triads):
        return RootRational.zero()
    a = [sum(t) // 2 for t in triads]
    b = [(j1 + j2 + j4 + j5) // 2, (j2 + j3 + j5 + j6) // 2, (j3 + j1 + j6 + j4) // 2]
    total = 0
    for t in range(max(a), min(b) + 1):
        den = 1
        for x in a:
            den *= _fact(t - x)
        for y in b:
            den *= _fact(y - t)
        term = Fraction(_fact(t + 1), den)
        total += -term if t % 2 else term
    if total == 0:
        return RootRational.zero()
    pref = Fraction(1)
    for tri in triads:
        pref *= _delta(*tri)
    return RootRational(1 if total > 0 else -1, pref * total * total)


def wigner6j(j1, j2, j3, j4, j5, j6) -> RootRational:
    """Exact Wigner 6j symbol {j1 j2 j3; j4 j5 j6}."""
    t = _half_ints(j1, j2, j3, j4, j5, j6)
    if any(x < 0 for x in t):
        raise InvalidQuantumNumbers("negative angular momentum in 6j symbol")
    return _wigner6j_twice(*t)


def clebsch(j1, m1, j2, m2, j, m) -> RootRational:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m>."""
    t1, tm1, t2, tm2, t, tm = _half_ints(j1, m1, j2, m2, j, m)
    w = wigner3j(j1, j2, j, m1, m2, -HalfInt(tm))
    phase = -1 if ((t1 - t2 + tm) // 2) % 2 else 1
    return w * RootRational(phase, Fraction(t + 1))


# --- E2 amplitudes -------------------------------------------------------------

def _spherical(v: np.ndarray) -> dict[int, complex]:
    x, y, z = v
    return {1: -(x + 1j * y) / math.sqrt(2), 0: complex(z), -1: (x - 1j * y) / math.sqrt(2)}


@dataclass(frozen=True)
class E2Geometry:
    """Probe beam geometry: propagation k, polarization e, quantization axis."""

    propagation: tuple[float, float, float] = (1.0, 0.0, 0.0)
    polarization: tuple[float, float, float] = (0.0, 1.0, 0.0)
    quantization: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        for name in ("propagation", "polarization", "quantization"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
                raise InvalidGeometry(f"{name} must be a unit 3-vector")
            object.__setattr__(self, name, tuple(float(x) for x in v))
        if abs(np.dot(self.propagation, self.polarization)) > 1e-12:
            raise InvalidGeometry("polarization must be perpendicular to propagation")

    def _rotated(self, v) -> np.ndarray:
        # express v in a frame whose z axis is the quantization axis
        z = np.asarray(self.quantization)
        trial = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        x = trial - np.dot(trial, z) * z
        x /= np.linalg.norm(x)
        y = np.cross(z, x)
        return np.array([np.dot(v, x), np.dot(v, y), np.dot(v, z)])

    def tensor_components(self) -> dict[int, complex]:
        """Spherical components T_q of the rank-2 part of e (x) k."""
        e = _spherical(self._rotated(self.polarization))
        k = _spherical(self._rotated(self.propagation))
        out = {}
        for q in range(-2, 3):
            acc = 0j
            for q1 in (-1, 0, 1):
                q2 = q - q1
                if abs(q2) <= 1:
                    acc += float(clebsch(1, q1, 1, q2, 2, q)) * e[q1] * k[q2]
            out[q] = acc if abs(acc) > 1e-15 else 0j
        return out

    def weights(self) -> dict[int, complex]:
        """Coupling weight of each spherical component q = m' - m."""
        return {q: t.conjugate() for q, t in self.tensor_components().items()}


def _fm(state) -> tuple[Fraction, int, int]:
    if state.f is None or state.m is None:
        raise InvalidQuantumNumbers(f"{state} must carry f and m")
    return state.j, state.f, state.m


def _spin_of(state) -> Fraction:
    from .dataset import SPECIES_SPIN

    return SPECIES_SPIN[state.species]


def _angular_factor(ground, excited) -> RootRational:
    j, f, m = _fm(ground)
    jp, fp, mp = _fm(excited)
    spin = _spin_of(ground)
    q = mp - m
    three = wigner3j(fp, 2, f, -mp, q, m)
    six = wigner6j(jp, fp, spin, f, j, 2)
    phase_exp = (fp - mp) + (jp + spin + f + 2)
    phase = -1 if int(phase_exp) % 2 else 1
    return three * six * RootRational(phase, Fraction((2 * f + 1) * (2 * fp + 1)))


def _stretched(ground, excited):
    spin = _spin_of(ground)
    f0 = int(ground.j + spin)
    f1 = int(excited.j + spin)
    return (type(ground)(ground.species, ground.config, ground.j, f0, f0),
            type(excited)(excited.species, excited.config, excited.j, f1, f1))


def e2_component_amplitude(ground, excited) -> RootRational:
    """Exact angular factor of <excited| Q_q |ground> with q = m' - m.

    Normalized so the stretched transition (f=j+I, m=f) -> (f'=j'+I, m'=f')
    equals 1.  Independent of beam geometry.
    """
    dm = excited.m - ground.m if excited.m is not None and ground.m is not None else 0
    if abs(dm) > 2:
        raise ForbiddenTransition(f"|delta m| = {abs(dm)} exceeds 2 for a quadrupole transition")
    g0, e0 = _stretched(ground, excited)
    return _angular_factor(ground, excited) / _angular_factor(g0, e0)


def e2_relative_amplitude(ground, excited, geom: E2Geometry | None = None) -> complex:
    """Relative E2 amplitude for the given beam geometry.

    The stretched transition is normalized to 1 whenever the geometry
    drives it; otherwise the largest tensor weight is used as reference.
    Components the geometry does not drive give exactly 0.
    """
    geom = geom or E2Geometry()
    weights = geom.weights()
    rel = e2_component_amplitude(ground, excited)
    w = weights[excited.m - ground.m]
    if w == 0 or not rel:
        return 0j
    ref = weights[2] if abs(weights[2]) > 1e-12 else max(abs(x) for x in weights.values())
    return w * float(rel) / ref


def stretched_ratio(ground, excited_a, excited_b) -> RootRational:
    """Exact ratio of two component amplitudes from the same ground state."""
    return e2_component_amplitude(ground, excited_a) / e2_component_amplitude(ground, excited_b)
