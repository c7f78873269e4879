"""Atomic-structure datasets: level labels, E1 line lists, hyperfine constants.

A dataset file is line-oriented UTF-8 text split into ``[section]`` blocks,
one comma-separated record per line, ``#`` starting a comment::

    [constants]
    species, Cs
    nuclear_spin, 7/2
    core_polarizability_a03, 15.84, <source>

    [hyperfine]
    # level, A_MHz, B_MHz, source
    6s1/2, 2298.1579425, 0.0, <source>

    [lifetimes]
    # level, lifetime_s, source
    5d5/2, 1.28e-6, <source>

    [transitions]
    # lower, upper, vacuum_wavelength_nm, reduced_dipole_au, source
    6s1/2, 6p3/2, 852.3473, 6.3337, <source>

The trailing source field may itself contain commas.  A JSON document with
the same content (see :func:`dataset_to_json`) is accepted interchangeably.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .constants import CONST, convert_polarizability
from .errors import (
    ConfigError,
    DuplicateTransition,
    MissingFile,
    MissingLifetime,
    ParseError,
)

SPECIES_SPIN = {"Cs": Fraction(7, 2), "Rb87": Fraction(3, 2)}
# levels whose lifetime every dataset of the species must provide
REQUIRED_LIFETIMES = {"Cs": ("5d5/2",), "Rb87": ("4d5/2",)}
# (level, f_upper, f_lower, splitting Hz, tolerance Hz): hyperfine anchors
REFERENCE_SPLITTINGS = {"Cs": (("5d5/2", 6, 5, 127e6, 3e6),)}

_L_LETTERS = "spdfghik"
_LABEL_RE = re.compile(r"^(\d+)([spdfghik])(\d+)/2$")


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {text!r}") from None


@dataclass(frozen=True, order=True)
class LevelId:
    """A fine-structure level, optionally resolved to a hyperfine |f, m> state."""

    species: str
    config: str
    j: Fraction
    f: int | None = None
    m: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "j", Fraction(self.j))
        if self.j.denominator not in (1, 2) or self.j < 0:
            raise ValueError(f"j must be a non-negative half-integer, got {self.j}")
        if self.m is not None and self.f is None:
            raise ValueError("m given without f")
        if self.f is not None:
            spin = SPECIES_SPIN.get(self.species)
            if spin is not None and not abs(self.j - spin) <= self.f <= self.j + spin:
                raise ValueError(f"f={self.f} incompatible with j={self.j}, I={spin}")
            if self.m is not None and abs(self.m) > self.f:
                raise ValueError(f"|m|={abs(self.m)} exceeds f={self.f}")

    @classmethod
    def parse(cls, label: str, species: str = "Cs", f: int | None = None, m: int | None = None):
        match = _LABEL_RE.match(label.strip())
        if not match:
            raise ValueError(f"bad level label {label!r} (expected e.g. '6s1/2')")
        n, letter, twice_j = match.groups()
        return cls(species, f"{n}{letter}", Fraction(int(twice_j), 2), f, m)

    @property
    def n(self) -> int:
        return int(self.config[:-1])

    @property
    def l(self) -> int:
        return _L_LETTERS.index(self.config[-1])

    @property
    def label(self) -> str:
        suffix = "" if self.j.denominator == 1 else "/2"
        return f"{self.config}{self.j.numerator}{suffix}"

    @property
    def fine(self) -> "LevelId":
        return LevelId(self.species, self.config, self.j)

    def __str__(self):
        if self.f is None:
            return self.label
        if self.m is None:
            return f"{self.label} f={self.f}"
        return f"{self.label} |{self.f},{self.m}>"


@dataclass(frozen=True)
class TransitionRecord:
    lower: LevelId
    upper: LevelId
    wavelength: float  # m, vacuum
    reduced_dipole: float  # |<lower||D||upper>|, atomic units
    source: str = ""

    @property
    def wavelength_nm(self) -> float:
        return self.wavelength * 1e9

    @property
    def frequency(self) -> float:
        return CONST.c / self.wavelength

    @property
    def pair(self) -> tuple[str, str]:
        return (self.lower.label, self.upper.label)


@dataclass(frozen=True)
class HyperfineConstants:
    level: LevelId
    a: float  # Hz
    b: float  # Hz
    source: str = ""


@dataclass(frozen=True)
class AtomicDataset:
    species: str
    nuclear_spin: Fraction
    core_polarizability: float  # SI, C m^2 / V
    hyperfine: tuple[HyperfineConstants, ...] = ()
    transitions: tuple[TransitionRecord, ...] = ()
    lifetimes: tuple[tuple[str, float], ...] = ()  # (level label, s)

    @property
    def core_polarizability_a03(self) -> float:
        return convert_polarizability(self.core_polarizability, "SI", "a03")

    def level(self, label: str, f: int | None = None, m: int | None = None) -> LevelId:
        return LevelId.parse(label, self.species, f, m)

    def lifetime(self, label: str) -> float:
        for name, value in self.lifetimes:
            if name == label:
                return value
        raise MissingLifetime(label)

    def hyperfine_for(self, level: LevelId | str) -> HyperfineConstants | None:
        label = level if isinstance(level, str) else level.label
        for hf in self.hyperfine:
            if hf.level.label == label:
                return hf
        return None

    def transitions_of(self, level: LevelId | str) -> list[TransitionRecord]:
        label = level if isinstance(level, str) else level.label
        return [t for t in self.transitions if label in t.pair]

    def truncated(self, n_max: int) -> "AtomicDataset":
        """Copy keeping only transitions whose levels all have n <= n_max."""
        kept = tuple(t for t in self.transitions if max(t.lower.n, t.upper.n) <= n_max)
        return AtomicDataset(self.species, self.nuclear_spin, self.core_polarizability,
                             self.hyperfine, kept, self.lifetimes)


# --- validation ----------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    kind: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    """Invariant violations (``issues``) plus informational ``notes``.

    The report is empty, and the dataset usable, iff there are no issues.
    """

    issues: tuple[Issue, ...] = ()
    notes: tuple[str, ...] = ()

    def __len__(self):
        return len(self.issues)

    def __bool__(self):
        return bool(self.issues)

    @property
    def ok(self) -> bool:
        return not self.issues

    def kinds(self) -> set[str]:
        return {i.kind for i in self.issues}


def hyperfine_energy(a: float, b: float, j: Fraction, spin: Fraction, f: int) -> float:
    """Zero-field hyperfine energy (Hz) of level f from the A and B constants."""
    j, spin = Fraction(j), Fraction(spin)
    k = f * (f + 1) - spin * (spin + 1) - j * (j + 1)
    energy = a * float(k) / 2
    if b and spin > Fraction(1, 2) and j > Fraction(1, 2):
        num = 1.5 * float(k * (k + 1)) - 2 * float(spin * (spin + 1) * j * (j + 1))
        energy += b * num / float(2 * spin * (2 * spin - 1) * 2 * j * (2 * j - 1))
    return energy


def validate_dataset(d: AtomicDataset) -> ValidationReport:
    issues: list[Issue] = []
    notes: list[str] = []
    if d.species not in SPECIES_SPIN:
        issues.append(Issue("UnknownSpecies", d.species))
    elif d.nuclear_spin != SPECIES_SPIN[d.species]:
        issues.append(Issue("NuclearSpin", f"I={d.nuclear_spin} for {d.species}"))
    if d.core_polarizability < 0:
        issues.append(Issue("NegativeCorePolarizability", str(d.core_polarizability)))
    seen = set()
    for t in d.transitions:
        if t.pair in seen:
            issues.append(Issue("DuplicateTransition", f"{t.pair[0]} -> {t.pair[1]}"))
        seen.add(t.pair)
        if t.lower.label == t.upper.label:
            issues.append(Issue("SelfTransition", t.lower.label))
        if not t.wavelength > 0:
            issues.append(Issue("NonPositiveWavelength", f"{t.pair}"))
        if not t.reduced_dipole >= 0:
            issues.append(Issue("NegativeMatrixElement", f"{t.pair}"))
        if abs(t.lower.l - t.upper.l) != 1 or abs(t.lower.j - t.upper.j) > 1:
            issues.append(Issue("NotE1", f"{t.pair}"))
    # energy ordering must be consistent: no level both above and below another
    for t in d.transitions:
        if (t.upper.label, t.lower.label) in seen:
            issues.append(Issue("InconsistentOrdering", f"{t.pair}"))
    present = {name for name, _ in d.lifetimes}
    for label in REQUIRED_LIFETIMES.get(d.species, ()):
        if label not in present:
            issues.append(Issue("MissingLifetime", label))
    for name, value in d.lifetimes:
        if not value > 0:
            issues.append(Issue("NonPositiveLifetime", name))
    for hf in d.hyperfine:
        if hf.b == 0 and hf.level.j > Fraction(1, 2):
            notes.append(f"warning: {hf.level.label} has no quadrupole constant B; using 0")
    for label, f_hi, f_lo, ref, tol in REFERENCE_SPLITTINGS.get(d.species, ()):
        hf = d.hyperfine_for(label)
        if hf is None:
            continue
        split = abs(hyperfine_energy(hf.a, hf.b, hf.level.j, d.nuclear_spin, f_hi)
                    - hyperfine_energy(hf.a, hf.b, hf.level.j, d.nuclear_spin, f_lo))
        verdict = "consistent with" if abs(split - ref) <= tol else "INCONSISTENT with"
        notes.append(f"{label} f={f_hi}/f={f_lo} splitting {split / 1e6:.2f} MHz "
                     f"{verdict} reference {ref / 1e6:.0f} ± {tol / 1e6:.0f} MHz")
    return ValidationReport(tuple(issues), tuple(notes))


# --- parsing -------------------------------------------------------------------

_SECTIONS = ("constants", "hyperfine", "lifetimes", "transitions")


def _split(line: str, nfields: int, lineno: int) -> list[str]:
    parts = [p.strip() for p in line.split(",", nfields - 1)]
    if len(parts) < nfields - 1:
        raise ParseError(f"expected at least {nfields - 1} fields, got {len(parts)}", lineno)
    while len(parts) < nfields:
        parts.append("")
    return parts


def _number(text: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", lineno) from None


def _level(label: str, species: str, lineno: int) -> LevelId:
    try:
        return LevelId.parse(label, species)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def _parse_text(text: str) -> dict:
    raw: dict[str, list[tuple[int, str]]] = {s: [] for s in _SECTIONS}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name = line.strip("[]").strip().lower()
            if name not in raw:
                raise ParseError(f"unknown section [{name}]", lineno)
            section = name
            continue
        if section is None:
            raise ParseError("record outside of any section", lineno)
        raw[section].append((lineno, line))
    if not any(raw.values()):
        raise ParseError("empty dataset file", 1 if text else None)

    consts = {}
    for lineno, line in raw["constants"]:
        key, value, _src = _split(line, 3, lineno)
        consts[key.lower()] = (value, lineno)
    if "species" not in consts:
        raise ParseError("[constants] must define species", raw["constants"][0][0] if raw["constants"] else 1)
    species = consts["species"][0]
    if species not in SPECIES_SPIN:
        raise ParseError(f"unsupported species {species!r}", consts["species"][1])
    doc = {"species": species, "hyperfine": [], "lifetimes": [], "transitions": []}
    if "nuclear_spin" in consts:
        value, lineno = consts["nuclear_spin"]
        try:
            doc["nuclear_spin"] = str(_frac(value))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if "core_polarizability_a03" in consts:
        value, lineno = consts["core_polarizability_a03"]
        doc["core_polarizability_a03"] = _number(value, lineno)

    for lineno, line in raw["hyperfine"]:
        label, a, b, src = _split(line, 4, lineno)
        _level(label, species, lineno)
        doc["hyperfine"].append({"level": label, "A_MHz": _number(a, lineno),
                                 "B_MHz": _number(b, lineno), "source": src, "_line": lineno})
    for lineno, line in raw["lifetimes"]:
        label, value, src = _split(line, 3, lineno)
        _level(label, species, lineno)
        doc["lifetimes"].append({"level": label, "lifetime_s": _number(value, lineno),
                                 "source": src, "_line": lineno})
    for lineno, line in raw["transitions"]:
        lo, up, lam, dip, src = _split(line, 5, lineno)
        _level(lo, species, lineno)
        _level(up, species, lineno)
        doc["transitions"].append({"lower": lo, "upper": up, "wavelength_nm": _number(lam, lineno),
                                   "reduced_dipole_au": _number(dip, lineno), "source": src,
                                   "_line": lineno})
    return doc


def _build(doc: dict) -> AtomicDataset:
    try:
        species = doc["species"]
        if species not in SPECIES_SPIN:
            raise ConfigError(f"unsupported species {species!r}")
        spin = _frac(str(doc.get("nuclear_spin", SPECIES_SPIN[species])))
        core = convert_polarizability(float(doc.get("core_polarizability_a03", 0.0)), "a03", "SI")
        hyperfine = tuple(
            HyperfineConstants(LevelId.parse(h["level"], species), float(h["A_MHz"]) * 1e6,
                               float(h["B_MHz"]) * 1e6, h.get("source", ""))
            for h in doc.get("hyperfine", ())
        )
        lifetimes = tuple((LevelId.parse(x["level"], species).label, float(x["lifetime_s"]))
                          for x in doc.get("lifetimes", ()))
        transitions = []
        seen = set()
        for t in doc.get("transitions", ()):
            rec = TransitionRecord(LevelId.parse(t["lower"], species), LevelId.parse(t["upper"], species),
                                   float(t["wavelength_nm"]) * 1e-9, float(t["reduced_dipole_au"]),
                                   t.get("source", ""))
            if rec.pair in seen:
                raise DuplicateTransition(rec.pair)
            seen.add(rec.pair)
            transitions.append(rec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed dataset record: {exc}") from None
    dataset = AtomicDataset(species, spin, core, hyperfine, tuple(transitions), lifetimes)
    report = validate_dataset(dataset)
    for issue in report.issues:
        if issue.kind == "MissingLifetime":
            raise MissingLifetime(issue.detail)
        if issue.kind == "DuplicateTransition":
            a, b = issue.detail.split(" -> ")
            raise DuplicateTransition((a, b))
    if report.issues:
        raise ConfigError("invalid dataset: " + "; ".join(f"{i.kind}: {i.detail}" for i in report.issues))
    return dataset


def load_dataset(path: str | Path) -> AtomicDataset:
    """Load and validate a dataset file (text format or JSON mirror)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"dataset file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        if not isinstance(doc, dict):
            raise ParseError("JSON dataset must be an object", 1)
    else:
        doc = _parse_text(text)
    return _build(doc)


def bundled_dataset_path(name: str = "cs_default") -> Path:
    """Path of a dataset shipped with the package (``cs_default``, ``cs_n9``, ``rb87_default``)."""
    ref = resources.files("csclock") / "data" / f"{name}.dat"
    path = Path(str(ref))
    if not path.is_file():
        raise MissingFile(f"no bundled dataset named {name!r}")
    return path


def load_bundled(name: str = "cs_default") -> AtomicDataset:
    return load_dataset(bundled_dataset_path(name))


def resolve_dataset(spec: str | Path) -> AtomicDataset:
    """Load either a bundled dataset by name or a file by path."""
    text = str(spec)
    if "/" not in text and "\\" not in text and not text.endswith((".dat", ".json", ".txt")):
        return load_bundled(text)
    return load_dataset(spec)


def dataset_to_json(d: AtomicDataset) -> str:
    doc = {
        "species": d.species,
        "nuclear_spin": str(d.nuclear_spin),
        "core_polarizability_a03": round(d.core_polarizability_a03, 12),
        "hyperfine": [{"level": h.level.label, "A_MHz": h.a / 1e6, "B_MHz": h.b / 1e6,
                       "source": h.source} for h in d.hyperfine],
        "lifetimes": [{"level": name, "lifetime_s": value} for name, value in d.lifetimes],
        "transitions": [{"lower": t.lower.label, "upper": t.upper.label,
                         "wavelength_nm": round(t.wavelength_nm, 9), "reduced_dipole_au": t.reduced_dipole,
                         "source": t.source} for t in d.transitions],
    }
    return json.dumps(doc, indent=2)
