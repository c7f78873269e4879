import csv
import io
import json
import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants as sc

from csclock.errors import ConfigError, MissingModelInput, ZeroSensitivity
from csclock.systematics import (ROW_ORDER, SystematicsInputs, TimingTarget, budget, fractional_target,
                                 requirements, rows_to_csv, rows_to_json, sensitivity_coefficients,
                                 timing_error)

NU_C = sc.c / 685e-9
QUOTED = SystematicsInputs(
    nu_c=NU_C, probe_delta_alpha_A3=-57.5, probe_saturation_intensity=5700.0,
    lattice_slope_A3_per_mhz=1.4e-4, lattice_alpha0_A3=-374.0, temperature_K=1e-6,
    dc_beta=-4.7, bbr_ground_300k=-3.589, bbr_excited_300k=5.315, bbr_temperature=300.0,
)
TARGET = TimingTarget(1e-9, 30 * 86400)


@pytest.mark.parametrize("text,dt,tau", [
    ("1ns@30d", 1e-9, 2592000.0),
    ("2.5e-9s@1e6s", 2.5e-9, 1e6),
    ("10ps@1h", 1e-11, 3600.0),
    ("1us@5min", 1e-6, 300.0),
])
def test_target_parse(text, dt, tau):
    t = TimingTarget.parse(text)
    assert t.dt == pytest.approx(dt) and t.tau == pytest.approx(tau)


@pytest.mark.parametrize("text", ["1ns", "ns@30d", "1ns@30x", "1ns@0d", "-1ns@1d"])
def test_target_parse_rejects(text):
    with pytest.raises(ConfigError):
        TimingTarget.parse(text)


def test_fractional_target():
    assert fractional_target(TARGET) == pytest.approx(3.858e-16, rel=1e-3)


def test_sensitivity_oracles():
    rows = {r.name: r for r in sensitivity_coefficients(QUOTED)}
    assert tuple(rows) == ROW_ORDER
    alpha_si = 4 * math.pi * sc.epsilon_0 * 57.5e-30
    probe = alpha_si * 5700.0 / (2 * sc.epsilon_0 * sc.c * sc.h) / 100
    assert rows["probe_power"].beta == pytest.approx(probe, rel=1e-8)
    assert rows["lattice_frequency"].beta == pytest.approx(1.4e-4 / 374 * sc.k * 1e-6 / sc.h, rel=1e-8)
    assert rows["magnetic_gradient"].beta == pytest.approx(
        sc.physical_constants["Bohr magneton in Hz/T"][0] * 1e-7, rel=1e-8)
    assert rows["dc_field"].beta == -4.7
    assert rows["blackbody"].beta == pytest.approx(4 * (5.315 + 3.589) / 300, rel=1e-12)


def test_requirement_table():
    rows = {r.name: r for r in requirements(sensitivity_coefficients(QUOTED), TARGET)}
    assert rows["probe_power"].requirement == pytest.approx(1.629, rel=2e-3)
    assert rows["lattice_frequency"].requirement == pytest.approx(21.65, rel=2e-3)
    assert rows["magnetic_gradient"].requirement * 1e5 == pytest.approx(12.06, rel=2e-3)
    assert rows["magnetic_gradient"].requirement_display.endswith("pT")
    assert rows["dc_field"].requirement == pytest.approx(0.03593, rel=2e-3)
    assert rows["blackbody"].requirement == pytest.approx(1.422, rel=2e-3)


def test_requirement_formula():
    for r in requirements(sensitivity_coefficients(QUOTED), TARGET):
        assert r.requirement == pytest.approx(r.nu_c * TARGET.dt / (abs(r.beta) * TARGET.tau), rel=1e-12)
        assert abs(r.fractional) * r.requirement == pytest.approx(fractional_target(TARGET), rel=1e-12)


def test_equal_policy_splits_target():
    full = requirements(sensitivity_coefficients(QUOTED), TARGET, "full")
    equal = requirements(sensitivity_coefficients(QUOTED), TARGET, "equal")
    for a, b in zip(full, equal):
        assert b.requirement == pytest.approx(a.requirement / 5)
    with pytest.raises(ConfigError):
        requirements(full, TARGET, "greedy")


def test_full_budget_at_requirements_hits_row_count():
    rows = requirements(sensitivity_coefficients(QUOTED), TARGET)
    deltas = {r.name: math.copysign(r.requirement, r.beta) for r in rows}
    res = budget(rows, deltas)
    assert timing_error(res.shift, NU_C, TARGET.tau) == pytest.approx(5e-9, rel=1e-12)
    assert res.worst_case == pytest.approx(res.shift)
    assert res.quadrature == pytest.approx(res.shift / math.sqrt(5), rel=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=5, max_size=5), st.floats(-100, 100))
def test_budget_linear(values, k):
    rows = sensitivity_coefficients(QUOTED)
    d1 = dict(zip(ROW_ORDER, values))
    d2 = {n: k * v for n, v in d1.items()}
    a, b = budget(rows, d1), budget(rows, d2)
    assert b.shift == pytest.approx(k * a.shift, rel=1e-9, abs=1e-12)
    assert a.shift == pytest.approx(sum(r.beta * d1[r.name] for r in rows), rel=1e-12, abs=1e-15)
    assert a.quadrature <= a.worst_case + 1e-15


def test_budget_missing_delta():
    with pytest.raises(MissingModelInput):
        budget(sensitivity_coefficients(QUOTED), {"probe_power": 1.0})


def test_zero_sensitivity():
    rows = sensitivity_coefficients(replace(QUOTED, dc_beta=0.0))
    with pytest.raises(ZeroSensitivity):
        requirements(rows, TARGET)


@pytest.mark.parametrize("name", ["nu_c", "probe_delta_alpha_A3", "lattice_slope_A3_per_mhz", "dc_beta",
                                  "bbr_excited_300k"])
def test_missing_inputs(name):
    with pytest.raises(MissingModelInput):
        sensitivity_coefficients(replace(QUOTED, **{name: None}))


def test_csv_and_json():
    rows = requirements(sensitivity_coefficients(QUOTED), TARGET)
    parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    assert [p["name"] for p in parsed] == list(ROW_ORDER)
    assert float(parsed[4]["requirement"]) == pytest.approx(1.422, rel=2e-3)
    doc = json.loads(rows_to_json(rows))
    assert doc[0]["requirement_display"].endswith("%")
