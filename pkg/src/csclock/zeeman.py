"""Hyperfine + Zeeman structure of a fine-structure level (Breit-Rabi maps).

The Hamiltonian ``A I·J + B Q + g_J μB B J_z`` is built in the uncoupled
``|m_j, m_I>`` basis and diagonalized block by block in total m.  The nuclear
Zeeman term is neglected.  Energies are in Hz, fields in T.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, linear_sum_assignment

from .constants import CONST
from .dataset import AtomicDataset, LevelId, hyperfine_energy
from .errors import DegenerateInput, GridMismatch, MissingHyperfineConstants

MU_B_HZ_PER_T = CONST.bohr_magneton / CONST.planck_h


def lande_gj(level: LevelId, g_s: float = CONST.electron_g) -> float:
    j, l, s = Fraction(level.j), level.l, Fraction(1, 2)
    jj, ll, ss = j * (j + 1), l * (l + 1), s * (s + 1)
    return float((jj + ll - ss) / (2 * jj)) + g_s * float((jj - ll + ss) / (2 * jj))


def lande_gf(gj: float, j, spin, f) -> float:
    j, spin = Fraction(j), Fraction(spin)
    return gj * float((f * (f + 1) + j * (j + 1) - spin * (spin + 1)) / (2 * f * (f + 1)))


def _ladder(q: Fraction, mq: Fraction, step: int) -> float:
    # <q, mq+step| Q_step |q, mq> for step = ±1
    return float(np.sqrt(float(q * (q + 1) - mq * (mq + step))))


@dataclass(frozen=True)
class _Block:
    m: Fraction
    basis: tuple[tuple[Fraction, Fraction], ...]  # (m_j, m_I)
    h_hfs: np.ndarray  # Hz
    jz: np.ndarray  # diagonal of J_z
    labels: tuple[int, ...]  # f for each eigenvalue rank at B = 0


def _halves(x: Fraction):
    return [-x + k for k in range(int(2 * x) + 1)]


@lru_cache(maxsize=64)
def _blocks(j: Fraction, spin: Fraction, a: float, b: float) -> tuple[_Block, ...]:
    blocks = []
    f_values = [int(f) for f in _halves(j + spin) if f >= abs(j - spin)]
    for m in _halves(j + spin):
        basis = tuple((mj, m - mj) for mj in _halves(j) if abs(m - mj) <= spin)
        n = len(basis)
        idj = np.zeros((n, n))
        for col, (mj, mi) in enumerate(basis):
            idj[col, col] = float(mj * mi)
            for row, (mj2, mi2) in enumerate(basis):
                # I+J- and I-J+ halves of I·J
                if mj2 == mj - 1 and mi2 == mi + 1:
                    idj[row, col] = 0.5 * _ladder(j, mj, -1) * _ladder(spin, mi, +1)
                if mj2 == mj + 1 and mi2 == mi - 1:
                    idj[row, col] = 0.5 * _ladder(j, mj, +1) * _ladder(spin, mi, -1)
        h = a * idj
        if b and spin > Fraction(1, 2) and j > Fraction(1, 2):
            norm = float(2 * spin * (2 * spin - 1) * j * (2 * j - 1))
            h = h + b * (3 * idj @ idj + 1.5 * idj - float(spin * (spin + 1) * j * (j + 1)) * np.eye(n)) / norm
        eig = np.linalg.eigvalsh(h)
        # f levels present in this block, sorted by their zero-field energy
        present = [f for f in f_values if f >= abs(m)]
        by_energy = sorted(present, key=lambda f: hyperfine_energy(a, b, j, spin, f))
        expected = sorted(hyperfine_energy(a, b, j, spin, f) for f in present)
        assert np.allclose(eig, expected, atol=1e-6 * max(1.0, abs(a))), "hyperfine block mismatch"
        blocks.append(_Block(m, basis, h, np.array([float(mj) for mj, _ in basis]), tuple(by_energy)))
    return tuple(blocks)


@dataclass(frozen=True, eq=False)
class ZeemanMap:
    """Energies (Hz) of every |f, m> branch on a magnetic-field grid."""

    level: LevelId
    nuclear_spin: Fraction
    a: float
    b: float
    gj: float
    fields: np.ndarray  # T
    energies: dict  # (f, m) -> np.ndarray over fields

    @property
    def labels(self) -> list[tuple[int, int]]:
        return sorted(self.energies)

    def same_as(self, other: "ZeemanMap") -> bool:
        return (self.level == other.level and self.nuclear_spin == other.nuclear_spin
                and (self.a, self.b, self.gj) == (other.a, other.b, other.gj)
                and np.array_equal(self.fields, other.fields))

    def energy(self, f: int, m: int) -> np.ndarray:
        return self.energies[(f, m)]

    def energy_at(self, f: int, m: int, field: float) -> float:
        """Direct diagonalization at a single field (no grid, no tracking)."""
        return branch_energy(self.level.j, self.nuclear_spin, self.a, self.b, self.gj, f, m, field)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["B_T", "branch", "energy_Hz"])
        for i, field in enumerate(self.fields):
            for f, m in self.labels:
                w.writerow([f"{field:.9e}", f"f={f} m={m}", f"{self.energies[(f, m)][i]:.6f}"])
        return buf.getvalue()


def branch_energy(j, spin, a, b, gj, f: int, m: int, field: float) -> float:
    for blk in _blocks(Fraction(j), Fraction(spin), a, b):
        if blk.m == m:
            h = blk.h_hfs + gj * MU_B_HZ_PER_T * field * np.diag(blk.jz)
            return float(np.linalg.eigvalsh(h)[blk.labels.index(f)])
    raise KeyError((f, m))


def _track(blk: _Block, gj: float, fields: np.ndarray) -> np.ndarray:
    """Eigenvalues (len(fields), n) ordered by adiabatic label via overlap tracking."""
    h = blk.h_hfs[None, :, :] + (gj * MU_B_HZ_PER_T * fields)[:, None, None] * np.diag(blk.jz)[None]
    vals, vecs = np.linalg.eigh(h)
    out = np.empty_like(vals)
    order = np.arange(vals.shape[1])
    prev = vecs[0]
    for i in range(len(fields)):
        overlap = np.abs(prev.T @ vecs[i])
        _, cols = linear_sum_assignment(-overlap)
        order = cols
        out[i] = vals[i, order]
        prev = vecs[i][:, order]
    return out


def zeeman_map(d: AtomicDataset, level: LevelId, fields) -> ZeemanMap:
    """Diagonalize the hyperfine + Zeeman Hamiltonian on a field grid.

    Branches are labeled by (f, m) at zero field and followed adiabatically
    by eigenvector overlap, both upward and downward from B = 0.
    """
    hf = d.hyperfine_for(level)
    if hf is None:
        raise MissingHyperfineConstants(f"no hyperfine constants for {level.label}")
    fields = np.asarray(fields, dtype=float)
    j, spin = level.j, d.nuclear_spin
    gj = lande_gj(level)
    blocks = _blocks(j, spin, hf.a, hf.b)
    energies = {}
    pos = np.concatenate([[0.0], fields[fields > 0]])
    neg = np.concatenate([[0.0], fields[fields < 0]])
    pos_order = np.argsort(pos, kind="stable")
    neg_order = np.argsort(-neg, kind="stable")
    for blk in blocks:
        up = _track(blk, gj, pos[pos_order])
        down = _track(blk, gj, neg[neg_order])
        # start both sweeps from the zero-field ordering
        table = {}
        for k, field in enumerate(pos[pos_order]):
            table.setdefault(field, up[k])
        for k, field in enumerate(neg[neg_order]):
            table.setdefault(field, down[k])
        grid = np.array([table[x] for x in fields]) if fields.size else np.empty((0, len(blk.labels)))
        for rank, f in enumerate(blk.labels):
            energies[(f, int(blk.m))] = grid[:, rank]
    return ZeemanMap(level.fine, spin, hf.a, hf.b, gj, fields, energies)


def hyperfine_splitting(d: AtomicDataset, level: LevelId, f_upper: int, f_lower: int) -> float:
    """Zero-field |E(f_upper) − E(f_lower)| in Hz."""
    hf = d.hyperfine_for(level)
    if hf is None:
        raise MissingHyperfineConstants(f"no hyperfine constants for {level.label}")
    return abs(hyperfine_energy(hf.a, hf.b, level.j, d.nuclear_spin, f_upper)
               - hyperfine_energy(hf.a, hf.b, level.j, d.nuclear_spin, f_lower))


@dataclass(frozen=True)
class ClockLineShift:
    ground: tuple[int, int]
    excited: tuple[int, int]
    field: float
    shift: float  # Hz


def stretched_shift(field: float, g_ground: float = 0.25, g_excited: float = 0.5,
                    f_ground: int = 4, f_excited: int = 6) -> tuple[ClockLineShift, ClockLineShift]:
    """Linear Zeeman shifts of the two stretched clock lines (+m and −m)."""
    if field < 0:
        raise ValueError("field magnitude must be non-negative")
    shift = (f_excited * g_excited - f_ground * g_ground) * MU_B_HZ_PER_T * field
    plus = ClockLineShift((f_ground, f_ground), (f_excited, f_excited), field, shift)
    minus = ClockLineShift((f_ground, -f_ground), (f_excited, -f_excited), field, -shift)
    return plus, minus


@dataclass(frozen=True)
class MagicField:
    field: float  # T
    slope_residual: float  # Hz/T, from the spline derivative
    slope_check: float  # Hz/T, central difference on raw eigenvalues
    frequency: float  # transition frequency offset at the root, Hz


# slope tolerance: 1 Hz per 1e-7 T
MAGIC_SLOPE_TOL = 1.0 / 1e-7


def _raw_slope(gmap: ZeemanMap, emap: ZeemanMap, pair, field: float, h: float) -> float:
    (fg, mg), (fe, me) = pair

    def nu(x):
        return emap.energy_at(fe, me, x) - gmap.energy_at(fg, mg, x)

    return (nu(field + h) - nu(field - h)) / (2 * h)


def find_magic_B(gmap: ZeemanMap, emap: ZeemanMap, pair, window=None) -> list[MagicField]:
    """Fields where d(E_e − E_g)/dB = 0 for pair = ((f, m), (f', m')).

    Candidate roots come from a cubic spline of the transition frequency on
    the shared grid; each is then polished on directly diagonalized energies
    and checked with an independent central difference.
    """
    if gmap.fields.shape != emap.fields.shape or not np.array_equal(gmap.fields, emap.fields):
        raise GridMismatch("ground and excited maps use different field grids")
    (fg, mg), (fe, me) = pair
    nu = emap.energy(fe, me) - gmap.energy(fg, mg)
    span = np.ptp(nu) if nu.size else 0.0
    if gmap.same_as(emap) or span <= 1e-9 * max(1.0, float(np.max(np.abs(nu)))):
        raise DegenerateInput("transition frequency does not depend on B; every field is magic")
    fields = gmap.fields
    lo, hi = (fields[0], fields[-1]) if window is None else (max(window[0], fields[0]), min(window[1], fields[-1]))
    spline = CubicSpline(fields, nu)
    deriv = spline.derivative()
    fine = np.linspace(lo, hi, 20 * len(fields) + 1)
    dv = deriv(fine)
    step = fields[1] - fields[0]
    h = max(step * 0.05, 1e-9)
    out = []
    for x0, x1, d0, d1 in zip(fine[:-1], fine[1:], dv[:-1], dv[1:]):
        if d0 == 0 or np.sign(d0) != np.sign(d1):
            root = x0 if d0 == 0 else brentq(deriv, x0, x1, xtol=1e-15)
            a, b = max(root - step, lo), min(root + step, hi)
            try:
                root = brentq(lambda x: _raw_slope(gmap, emap, pair, x, h), a, b, xtol=1e-15)
            except ValueError:
                pass
            check = _raw_slope(gmap, emap, pair, root, 2.5 * h)
            freq = emap.energy_at(fe, me, root) - gmap.energy_at(fg, mg, root)
            out.append(MagicField(float(root), float(deriv(root)), float(check), float(freq)))
    return out
