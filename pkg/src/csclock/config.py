"""Scenario files and run configuration.

A scenario is a YAML document with one mapping per module.  Every key is
checked against the parameter set of the module it configures, so a typo
is a ``ConfigError`` rather than a silently ignored value.

A run configuration points at a scenario and may override any scenario
key::

    scenario: cs-baseline
    dataset: cs_n9            # bundled name or path, optional
    output_dir: out
    formats: [csv, json]
    overrides:
      lattice: {buildup: 60}
      simulation: {duration: 500}
"""
from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import yaml

from .constants import CONST
from .errors import ConfigError, MissingFile
from .lattice import LatticeConfig
from .locksim.config import SimConfig
from .stability import ClockParams
from .systematics import SystematicsInputs

FORMATS = ("csv", "json", "text")


def _names(cls, drop=()) -> set[str]:
    return {f.name for f in fields(cls)} - set(drop)


# derived quantities (clock frequency, lattice wavelength) come from the top level
SECTION_KEYS = {
    "clock": {"ground", "excited", "ground_f", "ground_m", "excited_f", "excited_m", "probe_nm"},
    "stability": _names(ClockParams, ("nu_c",)),
    "polarizability": {"lattice_nm", "magic_window_nm", "magic_step_nm", "exclusion_nm",
                       "scan_nm", "zoom_nm", "probe_scan_nm"},
    "lattice": _names(LatticeConfig, ("probe_nm", "mass_kg")),
    "zeeman": {"level", "field_span_T", "field_points", "pairs", "reference_field_T"},
    "systematics": _names(SystematicsInputs, ("nu_c",)) | {"target", "policy", "dataset_derived"},
    "simulation": _names(SimConfig, ("nu_c",)) | {"seeds", "taus"},
    "comparison": {"reference"},
}
TOP_KEYS = {"name", "species", "dataset", "description"} | set(SECTION_KEYS)
RUN_KEYS = {"scenario", "dataset", "overrides", "output_dir", "formats"}


class _Loader(yaml.SafeLoader):
    pass


# accept 1e3 and 1.0e3 as floats (YAML 1.2 style); PyYAML's 1.1 rules read them as strings
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?(?:[eE][-+]?[0-9]+)$|^[-+]?\.[0-9_]+(?:[eE][-+]?[0-9]+)?$"),
    list("-+0123456789."),
)


def _load_yaml(text: str, origin: str) -> dict:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{origin}: invalid YAML: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{origin}: top level must be a mapping")
    return doc


def _check_keys(doc: dict, allowed: set[str], where: str):
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")


@dataclass(frozen=True)
class Scenario:
    name: str
    species: str
    dataset: str
    sections: dict = field(default_factory=dict)
    description: str = ""

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name) or {})

    def has(self, name: str) -> bool:
        return name in self.sections

    @property
    def probe_nm(self) -> float:
        return float(self.section("clock").get("probe_nm", 685.0))

    @property
    def nu_c(self) -> float:
        return CONST.c / (self.probe_nm * 1e-9)

    def clock_params(self) -> ClockParams:
        return _build(ClockParams, self.section("stability"), "stability", nu_c=self.nu_c)

    def lattice_config(self) -> LatticeConfig:
        kw = self.section("lattice")
        return _build(LatticeConfig, kw, "lattice", probe_nm=self.probe_nm, mass_kg=CONST.mass(self.species))

    def systematics_inputs(self) -> SystematicsInputs:
        kw = {k: v for k, v in self.section("systematics").items()
              if k not in ("target", "policy", "dataset_derived")}
        return _build(SystematicsInputs, kw, "systematics", nu_c=self.nu_c)

    def sim_config(self, seed: int | None = None) -> SimConfig:
        kw = {k: v for k, v in self.section("simulation").items() if k not in ("seeds", "taus")}
        if seed is not None:
            kw["seed"] = seed
        return _build(SimConfig, kw, "simulation", nu_c=self.nu_c)


def _build(cls, kw: dict, where: str, **fixed):
    try:
        return cls(**kw, **fixed)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_scenario(doc: dict, origin: str = "scenario") -> Scenario:
    _check_keys(doc, TOP_KEYS, origin)
    for key in ("name", "species", "dataset"):
        if key not in doc:
            raise ConfigError(f"{origin}: missing required key {key!r}")
    sections = {}
    for name, allowed in SECTION_KEYS.items():
        if name not in doc:
            continue
        body = doc[name] or {}
        if not isinstance(body, dict):
            raise ConfigError(f"{origin}: section {name!r} must be a mapping")
        _check_keys(body, allowed, f"{origin}:{name}")
        sections[name] = body
    sc = Scenario(str(doc["name"]), str(doc["species"]), str(doc["dataset"]), sections,
                  str(doc.get("description", "")))
    validate_scenario(sc)
    return sc


def validate_scenario(sc: Scenario):
    """Build every module's parameter object so bad values fail before any work."""
    if sc.has("stability"):
        sc.clock_params()
    if sc.has("lattice"):
        sc.lattice_config()
    if sc.has("systematics"):
        sc.systematics_inputs()
        from .systematics import TimingTarget
        TimingTarget.parse(str(sc.section("systematics").get("target", "1ns@30d")))
    if sc.has("simulation"):
        sc.sim_config()


def bundled_scenarios() -> list[str]:
    root = resources.files("csclock") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def scenario_text(name_or_path: str) -> tuple[str, str]:
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml"):
        if not path.is_file():
            raise MissingFile(f"scenario file not found: {path}")
        return path.read_text(), str(path)
    res = resources.files("csclock") / "scenarios" / f"{name_or_path}.yaml"
    if not res.is_file():
        raise ConfigError(f"unknown scenario {name_or_path!r}; bundled: {', '.join(bundled_scenarios())}")
    return res.read_text(), f"{name_or_path}.yaml"


def load_scenario(name_or_path: str, overrides: dict | None = None, dataset: str | None = None) -> Scenario:
    text, origin = scenario_text(name_or_path)
    doc = _load_yaml(text, origin)
    doc = apply_overrides(doc, overrides or {})
    if dataset is not None:
        doc["dataset"] = dataset
    return parse_scenario(doc, origin)


def apply_overrides(doc: dict, overrides: dict) -> dict:
    out = copy.deepcopy(doc)
    if not isinstance(overrides, dict):
        raise ConfigError("overrides must be a mapping of section -> mapping")
    for section, values in overrides.items():
        if section not in SECTION_KEYS:
            raise ConfigError(f"unknown override section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"overrides for {section!r} must be a mapping")
        _check_keys(values, SECTION_KEYS[section], f"overrides:{section}")
        out.setdefault(section, {})
        out[section] = {**(out[section] or {}), **values}
    return out


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "cs-baseline"
    dataset: str | None = None
    overrides: dict = field(default_factory=dict)
    output_dir: str | None = None
    formats: tuple[str, ...] = ()

    @classmethod
    def from_mapping(cls, doc: dict, origin: str = "config") -> "RunConfig":
        _check_keys(doc, RUN_KEYS, origin)
        formats = doc.get("formats", [])
        if isinstance(formats, str):
            formats = [formats]
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"{origin}: unsupported format(s) {bad}; choose from {list(FORMATS)}")
        overrides = doc.get("overrides") or {}
        if not isinstance(overrides, dict):
            raise ConfigError(f"{origin}: overrides must be a mapping")
        return cls(str(doc.get("scenario", "cs-baseline")), doc.get("dataset"), overrides,
                   doc.get("output_dir"), tuple(formats))

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise MissingFile(f"config file not found: {path}")
        return cls.from_mapping(_load_yaml(path.read_text(), str(path)), str(path))

    def resolve(self) -> Scenario:
        return load_scenario(self.scenario, self.overrides, self.dataset)
