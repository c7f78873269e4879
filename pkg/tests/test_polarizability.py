import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Rational, sqrt
from sympy.physics.wigner import wigner_6j

from csclock.dataset import LevelId, load_bundled
from csclock.errors import EmptyDataset, EmptyWindow, InvalidF, InvalidM, NegativeTemperature, TooCloseToResonance
from csclock.polarizability import (bbr_shift, differential_polarizability, dynamic_polarizability,
                                    find_magic_wavelengths, hyperfine_polarizability, polarizability_arrays,
                                    resonances, scan, state_polarizability, tensor_recoupling_factor,
                                    tensor_spread)


@pytest.fixture(scope="module")
def magic(cs, clock_states):
    return find_magic_wavelengths(cs, *clock_states, window=(795.0, 810.0), step=0.01)


def test_ground_803(cs):
    rec = dynamic_polarizability(cs, cs.level("6s1/2"), 803.0)
    assert rec.alpha0 == pytest.approx(-374.0, rel=0.03)
    assert rec.alpha2 == 0.0
    assert rec.core_included and rec.wavelength_nm == 803.0


def test_ground_static(cs):
    for tag in (None, "static"):
        rec = dynamic_polarizability(cs, cs.level("6s1/2"), tag)
        assert rec.alpha0 == pytest.approx(59.4, rel=0.03)
        assert rec.wavelength_nm is None and rec.is_static


def test_core_only_on_ground(cs):
    lv = cs.level("5d5/2")
    with_core, _ = polarizability_arrays(cs, lv, [803.0], include_core=True)
    without, _ = polarizability_arrays(cs, lv, [803.0], include_core=False)
    assert with_core[0] == without[0]
    assert not dynamic_polarizability(cs, lv, 803.0).core_included
    g = cs.level("6s1/2")
    a, _ = polarizability_arrays(cs, g, [803.0], include_core=True)
    b, _ = polarizability_arrays(cs, g, [803.0], include_core=False)
    assert a[0] - b[0] == pytest.approx(15.84 * 0.148185, rel=1e-4)


@pytest.mark.parametrize("label", ["6s1/2", "6p1/2"])
def test_j_half_has_no_tensor(cs, label):
    if not cs.transitions_of(label):
        pytest.skip("level absent from dataset")
    assert dynamic_polarizability(cs, cs.level(label), 1064.0).alpha2 == 0.0


def test_record_reproducible(cs):
    lv = cs.level("5d5/2")
    assert dynamic_polarizability(cs, lv, 803.0) == dynamic_polarizability(cs, lv, 803.0)


def test_single_oscillator_oracle():
    # one transition: α0 = (2/3(2j+1)) d² ω0 / (ω0² − ω²), closed form in atomic units
    d = load_bundled("cs_default")
    from dataclasses import replace
    d2 = next(t for t in d.transitions if t.pair == ("6s1/2", "6p3/2"))
    one = replace(d, transitions=(d2,), core_polarizability=0.0)
    hartree_hz = 6.579683920502e15
    w0 = 299792458.0 / d2.wavelength / hartree_hz
    w = 299792458.0 / 1064e-9 / hartree_hz
    expected = 2 / 3 / 2 * d2.reduced_dipole ** 2 * w0 / (w0 ** 2 - w ** 2) * 0.529177210903 ** 3
    got = dynamic_polarizability(one, one.level("6s1/2"), 1064.0).alpha0
    assert got == pytest.approx(expected, rel=1e-8)


def test_too_close_to_resonance(cs):
    with pytest.raises(TooCloseToResonance):
        dynamic_polarizability(cs, cs.level("6s1/2"), 852.3473 + 0.005)
    # a narrower exclusion zone admits the point
    dynamic_polarizability(cs, cs.level("6s1/2"), 852.3473 + 0.005, exclusion_nm=0.001)


def test_empty_dataset(cs):
    from dataclasses import replace
    with pytest.raises(EmptyDataset):
        dynamic_polarizability(replace(cs, transitions=()), cs.level("6s1/2"), 803.0)


def test_tensor_spread(cs, magic):
    assert len(magic) == 1
    spread = tensor_spread(cs, cs.level("5d5/2", 6, 6), magic[0].wavelength_nm)
    assert spread == pytest.approx(0.39, rel=0.10)


def recoupling_oracle(j, spin, f):
    j, spin, f = (Rational(Fraction(x).numerator, Fraction(x).denominator) for x in (j, spin, f))
    six = wigner_6j(f, j, spin, j, f, 2)
    pref = sqrt(f * (2 * f - 1) * (2 * f + 1) * (2 * j + 3) * (2 * j + 1) * (j + 1)
                / ((2 * f + 3) * (f + 1) * j * (2 * j - 1)))
    return float((-1) ** (spin + j + f) * pref * six)


@pytest.mark.parametrize("j,spin,f", [
    (Fraction(5, 2), Fraction(7, 2), 6), (Fraction(5, 2), Fraction(7, 2), 5),
    (Fraction(5, 2), Fraction(7, 2), 1), (Fraction(3, 2), Fraction(7, 2), 5),
    (Fraction(5, 2), Fraction(3, 2), 4), (Fraction(3, 2), Fraction(3, 2), 2),
])
def test_recoupling_factor_against_6j(j, spin, f):
    assert float(tensor_recoupling_factor(j, spin, f)) == pytest.approx(recoupling_oracle(j, spin, f), abs=1e-12)


def test_recoupling_stretched_is_one():
    # for f = j + I the stretched state is a product state: α2^(f) = α2^(j)
    assert tensor_recoupling_factor(Fraction(5, 2), Fraction(7, 2), 6) == 1


@given(st.integers(1, 6), st.data())
def test_alpha_even_in_m(f, data):
    cs = load_bundled("cs_default")
    rec = dynamic_polarizability(cs, cs.level("5d5/2"), 803.0)
    m = data.draw(st.integers(-f, f))
    assert hyperfine_polarizability(rec, Fraction(7, 2), f, m).alpha == \
        hyperfine_polarizability(rec, Fraction(7, 2), f, -m).alpha


def test_tensor_part_traceless(cs):
    rec = dynamic_polarizability(cs, cs.level("5d5/2"), 803.0)
    for f in range(1, 7):
        mean = np.mean([hyperfine_polarizability(rec, Fraction(7, 2), f, m).alpha for m in range(-f, f + 1)])
        assert mean == pytest.approx(rec.alpha0, rel=1e-12)


def test_hyperfine_bad_quantum_numbers(cs):
    rec = dynamic_polarizability(cs, cs.level("5d5/2"), 803.0)
    with pytest.raises(InvalidF):
        hyperfine_polarizability(rec, Fraction(7, 2), 7, 0)
    with pytest.raises(InvalidM):
        hyperfine_polarizability(rec, Fraction(7, 2), 6, 7)


def test_state_polarizability_matches_record(cs):
    rec = dynamic_polarizability(cs, cs.level("5d5/2"), 803.0)
    hp = hyperfine_polarizability(rec, Fraction(7, 2), 6, 3)
    assert state_polarizability(cs, cs.level("5d5/2", 6, 3), 803.0)[0] == pytest.approx(hp.alpha, rel=1e-12)


def test_magic_wavelength(magic):
    assert magic[0].wavelength_nm == pytest.approx(803.3, abs=0.5)


def test_magic_point_invariants(cs, clock_states, magic):
    p = magic[0]
    assert abs(differential_polarizability(cs, *clock_states, p.wavelength_nm, 0.0)[0]) < 1e-6
    assert abs(p.residual) < 1e-6
    assert math.isfinite(p.slope_per_mhz)
    assert p.bracket[0] <= p.wavelength_nm <= p.bracket[1]


def test_magic_slope(magic):
    assert abs(magic[0].slope_per_mhz) == pytest.approx(1.4e-4, rel=0.30)


def test_magic_for_negative_m_pair(cs, magic):
    g, e = cs.level("6s1/2", 4, -4), cs.level("5d5/2", 6, -6)
    other = find_magic_wavelengths(cs, g, e, (795.0, 810.0), 0.01)
    assert other[0].wavelength_nm == pytest.approx(magic[0].wavelength_nm, abs=1e-9)


@pytest.mark.parametrize("step", [0.005, 0.02, 0.05])
def test_magic_grid_independent(cs, clock_states, magic, step):
    roots = find_magic_wavelengths(cs, *clock_states, (795.0, 810.0), step)
    assert len(roots) == len(magic)
    assert roots[0].wavelength_nm == pytest.approx(magic[0].wavelength_nm, abs=1e-4)


def test_magic_window_with_constant_sign(cs, clock_states):
    delta = differential_polarizability(cs, *clock_states, np.linspace(820, 830, 101))
    assert np.all(np.sign(delta) == np.sign(delta[0]))
    assert find_magic_wavelengths(cs, *clock_states, (820.0, 830.0), 0.05) == []


def test_magic_empty_window(cs, clock_states):
    with pytest.raises(EmptyWindow):
        find_magic_wavelengths(cs, *clock_states, (810.0, 800.0))


def test_poles_are_not_roots(cs, clock_states):
    # the 5d5/2 -> 5f resonances near 808 nm flip the sign of Δα without a root
    lines = [t.wavelength_nm for t in resonances(cs, *clock_states) if 795 < t.wavelength_nm < 810]
    assert lines
    roots = find_magic_wavelengths(cs, *clock_states, (795.0, 810.0), 0.01)
    for r in roots:
        assert min(abs(r.wavelength_nm - x) for x in lines) > 0.01


def test_resonance_antisymmetry(cs, clock_states):
    g, e = clock_states
    checked = 0
    for t in resonances(cs, *clock_states):
        lam = t.wavelength_nm
        if not 600 < lam < 900:
            continue
        partner = t.upper if t.lower.label == e.label else t.lower if t.upper.label == e.label else None
        if partner is not None and partner.j < e.j:
            continue  # the stretched state has no residue at j' = j - 1 lines
        checked += 1
        below, above = differential_polarizability(cs, *clock_states, [lam - 1e-6, lam + 1e-6], 0.0)
        assert np.sign(below) == -np.sign(above), t.pair
    assert checked >= 3


def test_convergence_with_truncation(cs):
    small = load_bundled("cs_n9")
    a = dynamic_polarizability(cs, cs.level("6s1/2"), 803.0).alpha0
    b = dynamic_polarizability(small, small.level("6s1/2"), 803.0).alpha0
    assert abs(a - b) / abs(a) < 0.01
    assert max(t.upper.n for t in small.transitions) <= 9 < max(t.upper.n for t in cs.transitions)


def test_red_tail_approaches_static(cs):
    g = cs.level("6s1/2")
    lams = np.array([2e3, 5e3, 1e4, 1e5, 1e6])
    a0, _ = polarizability_arrays(cs, g, lams)
    static = dynamic_polarizability(cs, g, "static").alpha0
    assert np.all(np.diff(a0) < 0)
    assert np.all(a0 > static)
    assert a0[-1] == pytest.approx(static, rel=1e-6)


def test_scan_columns_and_exclusion(cs, clock_states):
    lam = np.round(np.arange(805.0, 810.0, 0.001), 6)
    res = scan(cs, *clock_states, lam)
    lines = [t.wavelength_nm for t in resonances(cs, *clock_states)]
    assert res.wavelength_nm.size < lam.size
    assert all(np.min(np.abs(res.wavelength_nm - x)) >= 0.01 for x in lines if 805 < x < 810)
    head = res.to_csv().splitlines()[0]
    assert head == "wavelength_nm,alpha0_ground,alpha0_excited,alpha2_excited,delta_alpha"


def test_bbr(cs):
    shift, sens = bbr_shift(-3.589, 5.315, 300.0)
    assert shift == pytest.approx(8.904, abs=1e-9)
    assert sens == pytest.approx(4 * 8.904 / 300, rel=1e-12)
    assert sens == pytest.approx(0.12, abs=0.005)
    assert bbr_shift(-3.589, 5.315, 0.0) == (0.0, 0.0)
    with pytest.raises(NegativeTemperature):
        bbr_shift(-3.589, 5.315, -1.0)


@given(st.floats(0.0, 600.0))
def test_bbr_derivative_matches_finite_difference(t):
    h = 1e-3
    lo, _ = bbr_shift(-3.589, 5.315, max(t - h, 0.0))
    hi, _ = bbr_shift(-3.589, 5.315, t + h)
    _, sens = bbr_shift(-3.589, 5.315, t)
    assert sens == pytest.approx((hi - lo) / (t + h - max(t - h, 0.0)), rel=1e-4, abs=1e-9)


def test_level_parse_equivalence(cs):
    assert cs.level("5d5/2", 6, 6) == LevelId.parse("5d5/2", "Cs", 6, 6)
