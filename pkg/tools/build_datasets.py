"""Regenerate the bundled line lists in src/csclock/data/.

Needs the optional ``arc`` package (ARC-Alkali-Rydberg-Calculator), used only
here as a local copy of the NIST level tables and published E1 matrix
elements; entries without a published value fall back to ARC's numerical
model-potential radial integrals.  The package itself never imports ARC.

    python tools/build_datasets.py
"""
from __future__ import annotations

from pathlib import Path

from arc import Caesium, Rubidium87
from scipy.constants import c, e, h

OUT = Path(__file__).resolve().parents[1] / "src" / "csclock" / "data"
LETTERS = "spdfgh"


def label(n, l, j):
    return f"{n}{LETTERS[l]}{int(round(2 * j))}/2"


def partners(atom, n0, l0, j0, nmax, nmin_by_l):
    out = []
    for l in (l0 - 1, l0 + 1):
        if l < 0 or l > 3:
            continue
        for j in (l - 0.5, l + 0.5):
            if j < 0.5 or abs(j - j0) > 1:
                continue
            for n in range(nmin_by_l[l], nmax + 1):
                out.append((n, l, j))
    return out


def rows_for(atom, ref, nmax, nmin_by_l):
    rows = []
    for st in partners(atom, *ref, nmax, nmin_by_l):
        e0 = atom.getEnergy(*ref)
        e1 = atom.getEnergy(*st)
        lower, upper = (ref, st) if e1 > e0 else (st, ref)
        de_ev = abs(e1 - e0)
        lam_nm = h * c / (de_ev * e) * 1e9
        lit, _, info = atom.getLiteratureDME(*ref, *st)
        d = abs(atom.getReducedMatrixElementJ(*ref, *st))
        if lit:
            src = f"levels NIST ASD; d {info[3].strip()} [{info[2].strip()}]"
        else:
            src = "levels NIST ASD; d numerical model potential (ARC 3.10)"
        rows.append((label(*lower), label(*upper), lam_nm, d, src))
    return rows


def write(path, header, sections, rows):
    lines = list(header)
    for name, body in sections:
        lines.append(f"[{name}]")
        lines.extend(body)
        lines.append("")
    lines.append("[transitions]")
    lines.append("# lower, upper, vacuum_wavelength_nm, reduced_dipole_au, source")
    seen = set()
    for lo, up, lam, d, src in rows:
        if (lo, up) in seen:
            continue
        seen.add((lo, up))
        lines.append(f"{lo}, {up}, {lam:.4f}, {d:.4f}, {src}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cs(nmax, name):
    atom = Caesium()
    nmin = {0: 6, 1: 6, 2: 5, 3: 4}
    rows = rows_for(atom, (6, 0, 0.5), nmax, nmin) + rows_for(atom, (5, 2, 2.5), nmax, nmin)
    header = [
        f"# Cs-133 E1 line list for the 6s1/2 and 5d5/2 sums, n <= {nmax}.",
        "# Wavelengths are vacuum values from NIST ASD level energies.",
        "# Reduced matrix elements <a||D||b> in atomic units (e a0), magnitudes only.",
    ]
    sections = [
        ("constants", [
            "species, Cs",
            "nuclear_spin, 7/2",
            "core_polarizability_a03, 15.84, Safronova et al. PRA 94 012505 (2016)",
        ]),
        ("hyperfine", [
            "# level, A_MHz, B_MHz, source",
            "6s1/2, 2298.1579425, 0.0, Steck Cs D line data",
            "6p1/2, 291.9201, 0.0, Steck Cs D line data",
            "6p3/2, 50.28827, -0.4934, Steck Cs D line data",
            "5d5/2, -21.24, 0.2, two-photon spectroscopy literature value",
        ]),
        ("lifetimes", [
            "# level, lifetime_s, source",
            "5d5/2, 1.28e-6, measured radiative lifetime",
        ]),
    ]
    write(OUT / name, header, sections, rows)


def rb(nmax, name):
    atom = Rubidium87()
    nmin = {0: 5, 1: 5, 2: 4, 3: 4}
    rows = rows_for(atom, (5, 0, 0.5), nmax, nmin) + rows_for(atom, (4, 2, 2.5), nmax, nmin)
    header = [
        f"# Rb-87 E1 line list for the 5s1/2 and 4d5/2 sums, n <= {nmax}.",
        "# Wavelengths are vacuum values from NIST ASD level energies.",
    ]
    sections = [
        ("constants", [
            "species, Rb87",
            "nuclear_spin, 3/2",
            "core_polarizability_a03, 9.1, Safronova et al. PRA 69 022509 (2004)",
        ]),
        ("hyperfine", [
            "# level, A_MHz, B_MHz, source",
            "5s1/2, 3417.341305452, 0.0, Steck Rb87 D line data",
            "5p3/2, 84.7185, 12.4965, Steck Rb87 D line data",
            "4d5/2, -16.9, 0.0, Arimondo et al. RMP 49 31 (1977)",
        ]),
        ("lifetimes", [
            "# level, lifetime_s, source",
            "4d5/2, 89e-9, measured radiative lifetime",
        ]),
    ]
    write(OUT / name, header, sections, rows)


if __name__ == "__main__":
    cs(12, "cs_default.dat")
    cs(9, "cs_n9.dat")
    rb(12, "rb87_default.dat")
