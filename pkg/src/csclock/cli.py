"""Command-line entry point: ``csclock <command> [subcommand] [options]``.

Exit codes: 0 success, 2 usage error, 3 configuration error, 4 computation
error.  Failures print a one-line JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, Scenario, bundled_scenarios
from .errors import ComputeError, ConfigError, CsClockError
from .locksim import allan_deviation, run_campaign, simulate
from .polarizability import find_magic_wavelengths, scan
from .report import (Document, build_report, clock_states, grid, lattice_section, scenario_dataset,
                     stability_section, systematics_section)
from .systematics import TimingTarget
from .zeeman import zeeman_map

EXIT_USAGE, EXIT_CONFIG, EXIT_COMPUTE = 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--scenario", help="bundled scenario name or path to a scenario YAML file")
    p.add_argument("--config", help="run configuration YAML (scenario, dataset, overrides, output_dir, formats)")
    p.add_argument("--dataset", help="bundled dataset name or path (.dat or .json)")
    p.add_argument("--output-dir", help="write artifacts here instead of printing to stdout")
    p.add_argument("--format", choices=("csv", "json", "text"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csclock", description="Design calculations for a Cs quadrupole lattice clock.")
    parser.add_argument("--version", action="version", version=f"csclock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pol = sub.add_parser("polarizability", help="dynamic polarizabilities").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = pol.add_parser("scan", help="alpha0/alpha2 and delta alpha over a wavelength range")
    _common(p)
    p.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "STEP"), help="nm")

    mag = sub.add_parser("magic", help="magic wavelengths").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = mag.add_parser("find", help="zeros of the differential polarizability")
    _common(p)
    p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"), help="nm")
    p.add_argument("--step", type=float, help="scan step in nm")

    zee = sub.add_parser("zeeman", help="hyperfine Zeeman structure").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = zee.add_parser("map", help="branch energies on a field grid")
    _common(p)
    p.add_argument("--level", help="fine-structure level, e.g. 5d5/2")
    p.add_argument("--span", type=float, help="field half-range in T")
    p.add_argument("--points", type=int, help="number of grid points")

    lat = sub.add_parser("lattice", help="lattice geometry and trap").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = lat.add_parser("design", help="Talbot length, atom number, depth and sidebands")
    _common(p)

    sta = sub.add_parser("stability", help="analytic stability").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = sta.add_parser("budget", help="shot-noise and intermodulation budget")
    _common(p)

    sysp = sub.add_parser("systematics", help="systematic-shift control requirements").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = sysp.add_parser("table", help="sensitivity coefficients and allowed excursions")
    _common(p)
    p.add_argument("--target", help="timing goal such as 1ns@30d")
    p.add_argument("--policy", choices=("full", "equal"))

    p = sub.add_parser("simulate", help="Monte Carlo lock simulation and Allan deviation")
    _common(p)
    p.add_argument("--seed", type=int, help="seed of a single run, or master seed with --seeds")
    p.add_argument("--seeds", type=int, help="number of campaign seeds")
    p.add_argument("--duration", type=float, help="s")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--decimate", type=int, default=100, help="trace decimation for the CSV export")

    p = sub.add_parser("report", help="evaluate every module of a scenario")
    _common(p)

    sub.add_parser("scenarios", help="list bundled scenarios")
    return parser


def _resolve(args) -> tuple[RunConfig, Scenario]:
    run = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {}
    if args.scenario:
        changes["scenario"] = args.scenario
    if args.dataset:
        changes["dataset"] = args.dataset
    if args.output_dir:
        changes["output_dir"] = args.output_dir
    if args.format:
        changes["formats"] = (args.format,)
    run = replace(run, **changes)
    return run, run.resolve()


def _emit(run: RunConfig, files: dict[str, str], primary: str):
    """Write ``files`` under the output directory, or print the primary one."""
    if run.output_dir:
        out = Path(run.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(files):
            (out / name).write_text(files[name])
    else:
        sys.stdout.write(files[primary])


def _pick(run: RunConfig, default: str = "csv") -> str:
    return run.formats[0] if run.formats else default


def _need(sc: Scenario, section: str):
    if not sc.has(section):
        raise ConfigError(f"scenario {sc.name!r} has no {section!r} section")


def cmd_polarizability_scan(args, run, sc):
    _need(sc, "polarizability")
    d = scenario_dataset(sc)
    g, e = clock_states(sc, d)
    p = sc.section("polarizability")
    rng = args.range or p.get("scan_nm") or (600.0, 900.0, 0.25)
    result = scan(d, g, e, grid(rng), float(p.get("exclusion_nm", 0.01)))
    if _pick(run) == "json":
        body = {c: [float(x) for x in getattr(result, c)] for c in result.COLUMNS}
        _emit(run, {"polarizability_scan.json": json.dumps(body, indent=2) + "\n"}, "polarizability_scan.json")
    else:
        _emit(run, {"polarizability_scan.csv": result.to_csv()}, "polarizability_scan.csv")


def cmd_magic_find(args, run, sc):
    _need(sc, "polarizability")
    d = scenario_dataset(sc)
    g, e = clock_states(sc, d)
    p = sc.section("polarizability")
    window = tuple(args.window or p.get("magic_window_nm", (795.0, 810.0)))
    step = args.step or float(p.get("magic_step_nm", 0.01))
    points = find_magic_wavelengths(d, g, e, window, step, float(p.get("exclusion_nm", 0.01)))
    if _pick(run) == "json":
        body = [{"wavelength_nm": m.wavelength_nm, "slope_A3_per_MHz": m.slope_per_mhz,
                 "bracket_nm": list(m.bracket), "residual_A3": m.residual} for m in points]
        _emit(run, {"magic.json": json.dumps(body, indent=2) + "\n"}, "magic.json")
    else:
        lines = ["wavelength_nm,slope_A3_per_MHz,residual_A3"]
        lines += [f"{m.wavelength_nm:.6f},{m.slope_per_mhz:.6e},{m.residual:.3e}" for m in points]
        _emit(run, {"magic.csv": "\n".join(lines) + "\n"}, "magic.csv")


def cmd_zeeman_map(args, run, sc):
    d = scenario_dataset(sc)
    z = sc.section("zeeman")
    level = d.level(args.level or str(z.get("level", "5d5/2")))
    span = args.span or float(z.get("field_span_T", 1e-5))
    points = args.points or int(z.get("field_points", 2001))
    if points < 2 or not span > 0:
        raise ConfigError("field grid needs span > 0 and at least two points")
    zmap = zeeman_map(d, level, np.linspace(-span, span, points))
    name = f"zeeman_{level.config}{level.j.numerator}_2.csv"
    _emit(run, {name: zmap.to_csv()}, name)


def _document(sc: Scenario, command: str) -> Document:
    return Document(sc.name, f"csclock {command}")


def _emit_document(run: RunConfig, doc: Document, stem: str):
    fmt = _pick(run, "text")
    if fmt == "json":
        files, primary = {f"{stem}.json": doc.to_json() + "\n"}, f"{stem}.json"
    elif fmt == "csv":
        lines = ["section,key,value,unit"]
        for s in doc.sections:
            for k, v, u in s.rows:
                lines.append(",".join(_csv_cell(x) for x in (s.title, k, _value(v), u)))
        files, primary = {f"{stem}.csv": "\n".join(lines) + "\n"}, f"{stem}.csv"
    else:
        files, primary = {f"{stem}.txt": doc.to_text(bool(run.output_dir))}, f"{stem}.txt"
    if run.output_dir:
        files.update(doc.artifacts)
    _emit(run, files, primary)


def _value(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _csv_cell(text: str) -> str:
    return f'"{text}"' if any(c in text for c in ',"') else text


def cmd_lattice_design(args, run, sc):
    _need(sc, "lattice")
    doc = _document(sc, "lattice design")
    lattice_section(doc, sc, scenario_dataset(sc))
    _emit_document(run, doc, "lattice")


def cmd_stability_budget(args, run, sc):
    _need(sc, "stability")
    doc = _document(sc, "stability budget")
    budget = stability_section(doc, sc)
    if _pick(run, "text") == "json":
        _emit(run, {"stability_budget.json": budget.to_json() + "\n"}, "stability_budget.json")
    else:
        _emit_document(run, doc, "stability")


def cmd_systematics_table(args, run, sc):
    _need(sc, "systematics")
    body = dict(sc.section("systematics"))
    if args.target:
        TimingTarget.parse(args.target)
        body["target"] = args.target
    if args.policy:
        body["policy"] = args.policy
    body["dataset_derived"] = False
    sc = replace(sc, sections={**sc.sections, "systematics": body})
    doc = _document(sc, "systematics table")
    systematics_section(doc, sc)
    fmt = _pick(run)
    if fmt == "csv":
        _emit(run, {"systematics.csv": doc.artifacts["systematics.csv"]}, "systematics.csv")
    else:
        _emit_document(run, doc, "systematics")


def cmd_simulate(args, run, sc):
    _need(sc, "simulation")
    body = sc.section("simulation")
    cfg = sc.sim_config(args.seed)
    if args.duration:
        cfg = replace(cfg, duration=args.duration)
    taus = [float(t) for t in body.get("taus", [1, 10, 100])]
    taus = [t for t in taus if 2 * t < cfg.duration]
    if not taus:
        raise ConfigError("no tau fits in the simulated duration")
    n = args.seeds if args.seeds is not None else 1
    if n < 1:
        raise ConfigError("--seeds must be at least 1")
    files = {}
    if n == 1:
        trace = simulate(cfg)
        series = allan_deviation(trace, taus)
        files["trace.csv"] = trace.to_csv(max(1, args.decimate))
    else:
        series = run_campaign(cfg, n, taus, master_seed=cfg.seed, workers=max(1, args.workers)).aggregate
    files["adev.csv"] = series.to_csv()
    expected = ["tau_s,adev_shot_noise"] + [f"{t:.6g},{cfg.expected_sigma / np.sqrt(t):.6e}" for t in series.tau]
    files["adev_expected.csv"] = "\n".join(expected) + "\n"
    _emit(run, files, "adev.csv")


def cmd_report(args, run, sc):
    doc = build_report(sc)
    _emit_document(run, doc, "report")


COMMANDS = {
    ("polarizability", "scan"): cmd_polarizability_scan,
    ("magic", "find"): cmd_magic_find,
    ("zeeman", "map"): cmd_zeeman_map,
    ("lattice", "design"): cmd_lattice_design,
    ("stability", "budget"): cmd_stability_budget,
    ("systematics", "table"): cmd_systematics_table,
    ("simulate", None): cmd_simulate,
    ("report", None): cmd_report,
}


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit": code}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    if args.command == "scenarios":
        sys.stdout.write("\n".join(bundled_scenarios()) + "\n")
        return 0
    handler = COMMANDS[(args.command, getattr(args, "action", None))]
    try:
        run, sc = _resolve(args)
        handler(args, run, sc)
    except ConfigError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_CONFIG)
    except (ComputeError, CsClockError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_COMPUTE)
    return 0


if __name__ == "__main__":
    sys.exit(main())
