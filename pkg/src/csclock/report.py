"""Scenario evaluation shared by the CLI subcommands and the full report."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .angular import E2Geometry, e2_component_amplitude, e2_relative_amplitude
from .config import Scenario, load_scenario
from .dataset import AtomicDataset, LevelId, resolve_dataset
from .errors import ConfigError
from .lattice import axial_sidebands, depumping, design
from .polarizability import (dynamic_polarizability, find_magic_wavelengths, scan, state_polarizability,
                             tensor_spread)
from .stability import StabilityBudget, total_budget
from .systematics import (TimingTarget, fractional_target, requirements, rows_to_csv,
                          sensitivity_coefficients)
from .zeeman import find_magic_B, hyperfine_splitting, stretched_shift, zeeman_map


@dataclass
class Section:
    title: str
    rows: list = field(default_factory=list)  # (key, value, unit)

    def add(self, key: str, value, unit: str = ""):
        self.rows.append((key, value, unit))


@dataclass
class Document:
    scenario: str
    title: str = "csclock report"
    sections: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)  # file name -> text

    def section(self, title: str) -> Section:
        s = Section(title)
        self.sections.append(s)
        return s

    def to_text(self, list_artifacts: bool = False) -> str:
        out = [f"{self.title}: {self.scenario}", ""]
        for s in self.sections:
            out.append(f"[{s.title}]")
            for key, value, unit in s.rows:
                out.append(f"  {key:<34} {_fmt(value):>14}  {unit}".rstrip())
            out.append("")
        if list_artifacts and self.artifacts:
            out.append("[data files]")
            out.extend(f"  {name}" for name in sorted(self.artifacts))
            out.append("")
        return "\n".join(out)

    def to_json(self) -> str:
        body = {s.title: {k: {"value": _plain(v), "unit": u} for k, v, u in s.rows} for s in self.sections}
        return json.dumps({"scenario": self.scenario, "sections": body,
                           "artifacts": sorted(self.artifacts)}, indent=2, sort_keys=False)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0 or 1e-3 <= abs(v) < 1e5:
            return f"{v:.6g}"
        return f"{v:.4e}"
    return str(value)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def grid(spec) -> np.ndarray:
    """``[start, stop, step]`` -> inclusive grid rounded to 1e-9."""
    try:
        start, stop, step = (float(x) for x in spec)
    except (TypeError, ValueError):
        raise ConfigError(f"range must be [start, stop, step], got {spec!r}") from None
    if not step > 0 or stop < start:
        raise ConfigError(f"bad range {spec!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 9)


def clock_states(sc: Scenario, d: AtomicDataset) -> tuple[LevelId, LevelId]:
    c = sc.section("clock")
    try:
        g = d.level(c["ground"], int(c["ground_f"]), int(c["ground_m"]))
        e = d.level(c["excited"], int(c["excited_f"]), int(c["excited_m"]))
    except KeyError as exc:
        raise ConfigError(f"clock section lacks {exc}") from None
    return g, e


def scenario_dataset(sc: Scenario) -> AtomicDataset:
    d = resolve_dataset(sc.dataset)
    if d.species != sc.species:
        raise ConfigError(f"dataset species {d.species} does not match scenario species {sc.species}")
    return d


# ---- per-module evaluations -------------------------------------------------

def stability_section(doc: Document, sc: Scenario) -> StabilityBudget:
    b = total_budget(sc.clock_params())
    s = doc.section("stability")
    s.add("linewidth", b.linewidth, "Hz")
    s.add("detected photon rate", b.rate, "1/s")
    s.add("photocurrent", b.photocurrent * 1e9, "nA")
    s.add("SNR", b.snr, "Hz^1/2")
    s.add("sigma_QPN", b.sigma_qpn, "tau^-1/2")
    s.add("sigma_IM_LO", b.sigma_im_lo, "tau^-1/2")
    s.add("sigma_IM_shot", b.sigma_im_shot, "tau^-1/2")
    s.add("sigma_total", b.sigma_total, "tau^-1/2")
    doc.artifacts["stability_budget.json"] = b.to_json() + "\n"
    return b


def comparison_section(doc: Document, sc: Scenario, budget: StabilityBudget):
    ref_name = sc.section("comparison").get("reference")
    if not ref_name:
        return
    ref = total_budget(load_scenario(str(ref_name)).clock_params())
    s = doc.section("comparison")
    s.add(f"sigma_QPN {ref_name}", ref.sigma_qpn, "tau^-1/2")
    s.add(f"sigma_QPN {sc.name}", budget.sigma_qpn, "tau^-1/2")
    s.add("ratio to reference", budget.sigma_qpn / ref.sigma_qpn)


def polarizability_section(doc: Document, sc: Scenario, d: AtomicDataset, artifacts: bool = True) -> dict:
    p = sc.section("polarizability")
    g, e = clock_states(sc, d)
    lam = float(p.get("lattice_nm", 803.0))
    excl = float(p.get("exclusion_nm", 0.01))
    rg = dynamic_polarizability(d, g, lam, excl)
    static = dynamic_polarizability(d, g, "static")
    re_ = dynamic_polarizability(d, e, lam, excl)
    magic = find_magic_wavelengths(d, g, e, tuple(p.get("magic_window_nm", (795.0, 810.0))),
                                   float(p.get("magic_step_nm", 0.01)), excl)
    s = doc.section("polarizability")
    s.add(f"alpha0 {g.label} at {lam:g} nm", rg.alpha0, "A^3")
    s.add(f"alpha0 {g.label} static", static.alpha0, "A^3")
    s.add(f"alpha0 {e.label} at {lam:g} nm", re_.alpha0, "A^3")
    s.add(f"alpha2 {e.label} at {lam:g} nm", re_.alpha2, "A^3")
    for k, m in enumerate(magic):
        s.add(f"magic wavelength {k + 1}", m.wavelength_nm, "nm")
        s.add(f"magic slope {k + 1}", m.slope_per_mhz, "A^3/MHz")
    main = min(magic, key=lambda m: abs(m.wavelength_nm - lam)) if magic else None
    if main is not None:
        s.add("tensor spread at magic", tensor_spread(d, e, main.wavelength_nm))
    probe = sc.probe_nm
    dalpha_probe = float(state_polarizability(d, e, probe, excl)[0] - state_polarizability(d, g, probe, excl)[0])
    s.add(f"delta alpha at {probe:g} nm", dalpha_probe, "A^3")
    if artifacts:
        if "scan_nm" in p:
            doc.artifacts["polarizability_scan.csv"] = scan(d, g, e, grid(p["scan_nm"]), excl).to_csv()
        if "zoom_nm" in p:
            doc.artifacts["stretched_polarizability.csv"] = _state_table(d, g, e, grid(p["zoom_nm"]), excl)
        if "probe_scan_nm" in p:
            doc.artifacts["probe_polarizability.csv"] = scan(d, g, e, grid(p["probe_scan_nm"]), excl).to_csv()
    return {"magic": main, "delta_alpha_probe": dalpha_probe, "alpha0_ground": rg.alpha0}


def _state_table(d: AtomicDataset, g: LevelId, e: LevelId, lam: np.ndarray, excl: float) -> str:
    keep = np.ones(lam.shape, dtype=bool)
    for t in d.transitions:
        if {g.label, e.label} & set(t.pair):
            keep &= np.abs(lam - t.wavelength_nm) >= excl
    lam = lam[keep]
    cols = {"alpha_ground": state_polarizability(d, g, lam, excl)}
    for m in range(0, e.f + 1):
        cols[f"alpha_f{e.f}_m{m}"] = state_polarizability(d, LevelId(d.species, e.config, e.j, e.f, m), lam, excl)
    lines = [",".join(["wavelength_nm", *cols])]
    for i, x in enumerate(lam):
        lines.append(",".join([f"{x:.6f}"] + [f"{cols[c][i]:.6e}" for c in cols]))
    return "\n".join(lines) + "\n"


def lattice_section(doc: Document, sc: Scenario, d: AtomicDataset | None = None, artifacts: bool = True):
    cfg = sc.lattice_config()
    m = design(cfg)
    s = doc.section("lattice")
    s.add("Talbot length", m.talbot_length_um, "um")
    s.add("lattice sites", m.sites)
    s.add("trapped atoms", m.atoms)
    s.add("trap depth", m.depth_uK, "uK")
    s.add("recoil energy", m.recoil_uK, "uK")
    s.add("depth in recoils", m.depth_recoils)
    s.add("axial frequency", m.axial_frequency_mhz, "MHz")
    s.add("Lamb-Dicke parameter", m.lamb_dicke)
    s.add("relative sideband absorption", m.sideband_relative)
    if d is not None and sc.has("stability"):
        p = sc.clock_params()
        _, e = clock_states(sc, d)
        split = hyperfine_splitting(d, e, e.f, e.f - 1)
        ratio, rate = depumping(p.saturation, 2 * math.pi * split, 1 / p.tau_a)
        s.add("depumping ratio", ratio)
        s.add("depumping rate", rate, "1/s")
    if artifacts:
        doc.artifacts["sidebands.csv"] = axial_sidebands(cfg).to_csv()
    return m


def zeeman_section(doc: Document, sc: Scenario, d: AtomicDataset, artifacts: bool = True) -> dict:
    z = sc.section("zeeman")
    g, e = clock_states(sc, d)
    level = d.level(str(z.get("level", e.label)))
    span = float(z.get("field_span_T", 1e-5))
    fields = np.linspace(-span, span, int(z.get("field_points", 2001)))
    gmap = zeeman_map(d, g.fine, fields)
    emap = zeeman_map(d, level, fields)
    s = doc.section("zeeman")
    s.add(f"{level.label} splitting f={e.f} to f={e.f - 1}", hyperfine_splitting(d, level, e.f, e.f - 1) / 1e6, "MHz")
    ref = float(z.get("reference_field_T", 1e-8))
    plus, minus = stretched_shift(ref)
    s.add(f"stretched shift +m at {ref:g} T", plus.shift, "Hz")
    s.add(f"stretched shift -m at {ref:g} T", minus.shift, "Hz")
    roots = {}
    for pair in z.get("pairs", []):
        (fg, mg), (fe, me) = (tuple(int(v) for v in pair[0]), tuple(int(v) for v in pair[1]))
        found = find_magic_B(gmap, emap, ((fg, mg), (fe, me)))
        roots[((fg, mg), (fe, me))] = found
        tag = f"|{fg},{mg}>->|{fe},{me}>"
        if not found:
            s.add(f"magic B {tag}", "none in grid")
        for r in found:
            s.add(f"magic B {tag}", r.field * 1e6, "uT")
            s.add(f"  slope check {tag}", r.slope_check * 1e-7, "Hz per 1e-7 T")
    if artifacts:
        doc.artifacts["zeeman_excited.csv"] = emap.to_csv()
    return roots


def e2_section(doc: Document, sc: Scenario, d: AtomicDataset):
    g, e = clock_states(sc, d)
    geom = E2Geometry()
    s = doc.section("E2 couplings")
    for q in (2, 1, 0, -1, -2):
        m = g.m + q
        if abs(m) > e.f:
            continue
        amp = e2_relative_amplitude(g, LevelId(d.species, e.config, e.j, e.f, m), geom)
        s.add(f"|amplitude| |{g.f},{g.m}>->|{e.f},{m}>", abs(amp))
    if abs(g.m - 2) <= e.f:
        partner = LevelId(d.species, e.config, e.j, e.f, g.m - 2)
        ratio = e2_component_amplitude(g, e) / e2_component_amplitude(g, partner)
        s.add(f"component ratio |{e.f},{e.m}> / |{e.f},{g.m - 2}>", str(ratio))


def systematics_section(doc: Document, sc: Scenario, polar: dict | None = None, artifacts: bool = True):
    body = sc.section("systematics")
    target = TimingTarget.parse(str(body.get("target", "1ns@30d")))
    policy = str(body.get("policy", "full"))
    inputs = sc.systematics_inputs()
    rows = requirements(sensitivity_coefficients(inputs), target, policy)
    s = doc.section("systematics")
    s.add("timing target", f"{target.dt:g} s over {target.tau:g} s")
    s.add("fractional target", fractional_target(target))
    for r in rows:
        s.add(f"beta {r.name}", r.beta, f"Hz/{r.unit}")
        s.add(f"requirement {r.name}", r.requirement_display)
    if artifacts:
        doc.artifacts["systematics.csv"] = rows_to_csv(rows)
    if polar and body.get("dataset_derived"):
        derived = replace(inputs, probe_delta_alpha_A3=polar["delta_alpha_probe"],
                                 lattice_alpha0_A3=polar["alpha0_ground"],
                                 lattice_slope_A3_per_mhz=abs(polar["magic"].slope_per_mhz)
                                 if polar.get("magic") else inputs.lattice_slope_A3_per_mhz)
        drows = requirements(sensitivity_coefficients(derived), target, policy)
        s2 = doc.section("systematics (computed polarizabilities)")
        for r in drows:
            s2.add(f"requirement {r.name}", r.requirement_display)
        if artifacts:
            doc.artifacts["systematics_computed.csv"] = rows_to_csv(drows)
    return rows


def build_report(sc: Scenario) -> Document:
    """Evaluate every module configured in a scenario (the simulator is excluded)."""
    doc = Document(sc.name)
    d = scenario_dataset(sc)
    budget = stability_section(doc, sc) if sc.has("stability") else None
    if budget is not None:
        comparison_section(doc, sc, budget)
    polar = polarizability_section(doc, sc, d) if sc.has("polarizability") else None
    if sc.has("lattice"):
        lattice_section(doc, sc, d)
    if sc.has("zeeman"):
        zeeman_section(doc, sc, d)
        e2_section(doc, sc, d)
    if sc.has("systematics"):
        systematics_section(doc, sc, polar)
    return doc

