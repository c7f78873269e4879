import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants as sc

from csclock.errors import ConfigError, SubwavelengthPeriod, ZeroArea, ZeroBuildup
from csclock.lattice import (LatticeConfig, axial_frequency, axial_sidebands, depumping, design,
                             lamb_dicke, lattice_geometry, recoil_energy, relative_absorption,
                             talbot_length, trap_depth)

CS_MASS = 132.905451961 * sc.atomic_mass


@given(st.floats(0.3, 2.0), st.floats(1.0001, 200.0))
def test_talbot_closed_forms_agree(lam, ratio):
    d = lam * ratio
    r = lam / d
    # λ / (1 - √(1 - r²)) rationalized: (d²/λ)(1 + √(1 - r²))
    assert talbot_length(lam, d) == pytest.approx(d * d / lam * (1 + math.sqrt(1 - r * r)), rel=1e-9)


def test_talbot_paraxial_limit():
    lam = 0.8
    for ratio in (20, 100, 1000):
        d = lam * ratio
        assert talbot_length(lam, d) == pytest.approx(2 * d * d / lam, rel=1 / ratio ** 2)


def test_talbot_at_wavelength():
    assert talbot_length(0.8, 0.8) == pytest.approx(0.8)


def test_talbot_baseline_value():
    assert talbot_length(0.803, 0.9) == pytest.approx(1.46425, rel=1e-5)


@given(st.floats(0.3, 1.0), st.floats(0.1, 0.9999))
def test_subwavelength_period_rejected(lam, frac):
    with pytest.raises(SubwavelengthPeriod):
        talbot_length(lam, lam * frac)


def test_geometry_counts():
    cfg = LatticeConfig()
    sites, atoms = lattice_geometry(cfg)
    lt = talbot_length(0.803, 0.9)
    assert sites == pytest.approx(250 ** 3 / (0.81 * lt), rel=1e-12)
    assert atoms == pytest.approx(0.5 * sites)
    assert sites == pytest.approx(1.317e7, rel=2e-3)


@given(st.floats(10.0, 1000.0), st.floats(0.0, 1.0))
def test_geometry_scaling(region, fill):
    s1, a1 = lattice_geometry(LatticeConfig(region_um=region, fill=fill))
    s2, _ = lattice_geometry(LatticeConfig(region_um=2 * region, fill=fill))
    assert s2 == pytest.approx(8 * s1, rel=1e-12)
    assert a1 == pytest.approx(fill * s1, rel=1e-12, abs=1e-12)


def test_trap_depth_oracle():
    alpha_si = 4 * math.pi * sc.epsilon_0 * 374.0e-30
    intensity = 2.0 / (250e-6) ** 2
    u = alpha_si * intensity / (2 * sc.epsilon_0 * sc.c)
    depth, recoils = trap_depth(-374.0, 2.0, (250e-6) ** 2)
    assert depth == pytest.approx(u / sc.k * 1e6, rel=1e-9)
    e_rec = sc.h ** 2 / (2 * CS_MASS * (0.803e-6) ** 2)
    assert recoils == pytest.approx(u / e_rec, rel=1e-8)
    assert depth == pytest.approx(18.17, rel=2e-3)


@given(st.floats(1e-3, 10.0), st.floats(1e-10, 1e-6))
def test_trap_depth_linear_in_intensity(power, area):
    d1, _ = trap_depth(-300.0, power, area)
    d2, _ = trap_depth(-300.0, 2 * power, area)
    d3, _ = trap_depth(-300.0, power, 2 * area)
    assert d2 == pytest.approx(2 * d1, rel=1e-12)
    assert d3 == pytest.approx(d1 / 2, rel=1e-12)


def test_trap_depth_errors():
    with pytest.raises(ZeroArea):
        trap_depth(-374.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        trap_depth(100.0, 1.0, 1e-8)
    assert trap_depth(100.0, 1.0, 1e-8, bright=True)[0] > 0


def test_recoil_energy_oracle():
    assert recoil_energy(0.803e-6, CS_MASS) == pytest.approx(sc.h ** 2 / (2 * CS_MASS * 0.803e-12 ** 2 * 1e12), rel=1e-9)


def test_axial_frequency_from_curvature():
    # numerical curvature of U0 cos²(kz) at the antinode
    intensity = 1e9
    lam = 0.803e-6
    u0 = 4 * math.pi * sc.epsilon_0 * 374e-30 * intensity / (2 * sc.epsilon_0 * sc.c)
    k = 2 * math.pi / lam
    h = 1e-10
    pot = lambda z: -u0 * math.cos(k * z) ** 2
    curv = (pot(h) - 2 * pot(0) + pot(-h)) / h ** 2
    nu = math.sqrt(curv / CS_MASS) / (2 * math.pi)
    assert axial_frequency(-374.0, intensity, lam, CS_MASS) == pytest.approx(nu, rel=1e-5)


@given(st.floats(1e3, 1e7))
def test_lamb_dicke_recoil_ratio(nu):
    lam = 685e-9
    e_rec = sc.h ** 2 / (2 * CS_MASS * lam ** 2)
    assert lamb_dicke(nu, lam, CS_MASS) == pytest.approx(math.sqrt(e_rec / (sc.h * nu)), rel=1e-9)


def test_lamb_dicke_zero_frequency():
    assert lamb_dicke(0.0, 685e-9, CS_MASS) == math.inf


def test_axial_sidebands_baseline():
    sb = axial_sidebands(LatticeConfig())
    assert sb.axial_hz == pytest.approx(0.881e6, rel=2e-3)
    assert sb.lamb_dicke == pytest.approx(0.0603, rel=5e-3)
    assert sb.sideband_relative == pytest.approx(float(relative_absorption(sb.axial_hz, 1.75e5)))
    i0 = np.argmin(np.abs(sb.detuning_hz))
    assert sb.absorption[i0] == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(sb.absorption, sb.absorption[::-1])


def test_axial_sidebands_scaling_with_buildup():
    a = axial_sidebands(LatticeConfig(buildup=50.0), samples=3)
    b = axial_sidebands(LatticeConfig(buildup=200.0), samples=3)
    assert b.axial_hz == pytest.approx(2 * a.axial_hz, rel=1e-12)
    assert b.lamb_dicke == pytest.approx(a.lamb_dicke / math.sqrt(2), rel=1e-12)


def test_axial_sidebands_csv():
    text = axial_sidebands(LatticeConfig(), samples=11).to_csv()
    assert text.splitlines()[0] == "detuning_Hz,relative_absorption"
    assert len(text.splitlines()) == 12


@pytest.mark.parametrize("kw", [{"buildup": 0.0}, {"axial_power_w": 0.0}])
def test_zero_buildup(kw):
    with pytest.raises(ZeroBuildup):
        axial_sidebands(LatticeConfig(**kw))


@pytest.mark.parametrize("kw", [{"fill": 1.5}, {"power_w": -1.0}, {"region_um": 0.0}, {"linewidth_hz": 0.0}])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        LatticeConfig(**kw)


def test_lorentzian_half_width():
    assert relative_absorption(0.5, 1.0) == pytest.approx(0.5)
    assert relative_absorption(0.0, 1.0) == 1.0


def test_design_bundles_metrics():
    m = design(LatticeConfig())
    assert m.talbot_length_um == pytest.approx(talbot_length(0.803, 0.9))
    assert m.depth_recoils == pytest.approx(m.depth_uK / m.recoil_uK, rel=1e-12)
    assert m.axial_frequency_mhz == pytest.approx(0.881, rel=2e-3)


def test_depumping_limits():
    gamma = 1 / 1.28e-6
    delta = 2 * math.pi * 127.337e6
    ratio, rate = depumping(1.0, delta, gamma)
    assert ratio == pytest.approx(1.19e-7, rel=2e-3)
    assert rate == pytest.approx(ratio * gamma)
    big, _ = depumping(1e12, delta, gamma)
    assert big == pytest.approx(gamma ** 2 / (8 * delta ** 2), rel=1e-6)
    assert depumping(1.0, delta, gamma, branching=0.5)[1] == pytest.approx(rate / 2)


@given(st.floats(1e-3, 1e3), st.floats(1e3, 1e10), st.floats(1e3, 1e8))
def test_depumping_monotonic(s, delta, gamma):
    r = depumping(s, delta, gamma)[0]
    assert depumping(2 * s, delta, gamma)[0] >= r
    assert depumping(s, 2 * delta, gamma)[0] <= r
    assert 0 < r <= min(s / 4, gamma ** 2 / (8 * delta ** 2)) * (1 + 1e-12)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, -1.0)])
def test_depumping_rejects(args):
    with pytest.raises(ValueError):
        depumping(*args)


def test_axial_waist_scales_frequency():
    base = axial_sidebands(LatticeConfig(), samples=3)
    same = axial_sidebands(LatticeConfig(axial_waist_um=250.0), samples=3)
    half = axial_sidebands(LatticeConfig(axial_waist_um=125.0), samples=3)
    assert same.axial_hz == base.axial_hz
    assert half.axial_hz == pytest.approx(2 * base.axial_hz, rel=1e-12)
    with pytest.raises(ConfigError):
        LatticeConfig(axial_waist_um=0.0)
