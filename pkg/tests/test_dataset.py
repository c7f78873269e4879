from dataclasses import replace
from fractions import Fraction

import pytest

from csclock.dataset import (AtomicDataset, LevelId, dataset_to_json, hyperfine_energy, load_bundled,
                             load_dataset, validate_dataset)
from csclock.errors import (ConfigError, DuplicateTransition, MissingFile, MissingLifetime,
                            ParseError)

D2_ONLY = """\
[constants]
species, Cs
nuclear_spin, 7/2
core_polarizability_a03, 15.84, test

[hyperfine]
5d5/2, -21.24, 0.2, test

[lifetimes]
5d5/2, 1.28e-6, test

[transitions]
6s1/2, 6p3/2, 852.3473, 6.3337, test, with a comma
"""


def write(tmp_path, text, name="d.dat"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_datasets_are_valid(cs, rb):
    for d in (cs, rb):
        report = validate_dataset(d)
        assert report.ok, report.issues
        assert len(report) == 0


def test_species_and_spin(cs, rb):
    assert (cs.species, cs.nuclear_spin) == ("Cs", Fraction(7, 2))
    assert (rb.species, rb.nuclear_spin) == ("Rb87", Fraction(3, 2))


def test_required_lifetimes(cs, rb):
    assert cs.lifetime("5d5/2") == pytest.approx(1.28e-6)
    assert rb.lifetime("4d5/2") == pytest.approx(89e-9)


def test_internal_units_are_si(cs):
    d2 = next(t for t in cs.transitions if t.pair == ("6s1/2", "6p3/2"))
    assert d2.wavelength == pytest.approx(852.3473e-9)
    assert d2.wavelength_nm == pytest.approx(852.3473)
    # core polarizability stored in C m²/V, reported back in a0³
    assert cs.core_polarizability_a03 == pytest.approx(15.84, rel=1e-12)
    assert 1e-41 < cs.core_polarizability < 1e-39
    hf = cs.hyperfine_for("6s1/2")
    assert hf.a == pytest.approx(2298.1579425e6)


def test_d2_only_file(tmp_path):
    d = load_dataset(write(tmp_path, D2_ONLY))
    assert len(d.transitions) == 1
    t = d.transitions[0]
    assert (t.lower.label, t.upper.label) == ("6s1/2", "6p3/2")
    assert t.source == "test, with a comma"
    assert validate_dataset(d).ok


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        load_dataset(write(tmp_path, ""))


def test_missing_file(tmp_path):
    with pytest.raises(MissingFile):
        load_dataset(tmp_path / "nope.dat")
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "nope.dat")


def test_duplicate_transition(tmp_path):
    text = D2_ONLY + "6s1/2, 6p3/2, 852.35, 6.33, again\n"
    with pytest.raises(DuplicateTransition) as err:
        load_dataset(write(tmp_path, text))
    assert err.value.pair == ("6s1/2", "6p3/2")


def test_missing_lifetime(tmp_path):
    text = D2_ONLY.replace("5d5/2, 1.28e-6, test\n", "")
    with pytest.raises(MissingLifetime) as err:
        load_dataset(write(tmp_path, text))
    assert err.value.level == "5d5/2"


def test_parse_error_reports_line(tmp_path):
    text = D2_ONLY.replace("852.3473", "eight-five-two")
    with pytest.raises(ParseError) as err:
        load_dataset(write(tmp_path, text))
    assert err.value.line == D2_ONLY.splitlines().index(
        "6s1/2, 6p3/2, 852.3473, 6.3337, test, with a comma") + 1


@pytest.mark.parametrize("bad", [
    "[nonsense]\n",
    "6s1/2, 6p3/2, 852.3, 6.3, x\n",  # record before any section
])
def test_structural_errors(tmp_path, bad):
    with pytest.raises(ConfigError):
        load_dataset(write(tmp_path, bad + D2_ONLY))


def test_load_twice_identical(tmp_path):
    p = write(tmp_path, D2_ONLY)
    assert load_dataset(p) == load_dataset(p)
    assert load_bundled() == load_bundled()


def test_json_mirror_round_trip(cs, tmp_path):
    p = write(tmp_path, dataset_to_json(cs), "cs.json")
    assert load_dataset(p) == cs


def test_validation_flags(cs):
    no_life = replace(cs, lifetimes=())
    assert "MissingLifetime" in validate_dataset(no_life).kinds()
    dup = replace(cs, transitions=cs.transitions + cs.transitions[:1])
    assert "DuplicateTransition" in validate_dataset(dup).kinds()
    neg = replace(cs, core_polarizability=-1.0)
    assert "NegativeCorePolarizability" in validate_dataset(neg).kinds()
    bad = replace(cs.transitions[0], upper=cs.level("7s1/2"))
    assert "NotE1" in validate_dataset(replace(cs, transitions=(bad,))).kinds()


def test_validation_idempotent(cs):
    assert validate_dataset(cs) == validate_dataset(cs)


def test_hyperfine_anchor_note(cs):
    notes = validate_dataset(cs).notes
    assert any("5d5/2" in n and "consistent with" in n and "127" in n for n in notes)


def test_rb_missing_quadrupole_note(rb):
    notes = validate_dataset(rb).notes
    assert any("no quadrupole" in n for n in notes)


def test_levelid_invariants():
    lv = LevelId.parse("5d5/2", "Cs", 6, -6)
    assert (lv.n, lv.l, lv.j, lv.label) == (5, 2, Fraction(5, 2), "5d5/2")
    assert str(lv) == "5d5/2 |6,-6>"
    with pytest.raises(ValueError):
        LevelId.parse("5d5/2", "Cs", 7)  # f must lie in |j - I|..j + I
    with pytest.raises(ValueError):
        LevelId.parse("6s1/2", "Cs", 4, 5)
    with pytest.raises(ValueError):
        LevelId.parse("6x1/2")
    with pytest.raises(ValueError):
        LevelId("Cs", "6s", Fraction(1, 2), None, 1)


def test_hyperfine_energy_interval_rule():
    # pure dipole: E(f) - E(f-1) = A f
    a = 1.0e6
    for f in range(2, 7):
        gap = hyperfine_energy(a, 0.0, Fraction(5, 2), Fraction(7, 2), f) - \
            hyperfine_energy(a, 0.0, Fraction(5, 2), Fraction(7, 2), f - 1)
        assert gap == pytest.approx(a * f)


def test_hyperfine_energy_weighted_trace():
    # Σ_f (2f+1) E(f) = 0 for both the dipole and quadrupole terms
    j, spin = Fraction(5, 2), Fraction(7, 2)
    total = sum((2 * f + 1) * hyperfine_energy(3e6, 5e5, j, spin, f) for f in range(1, 7))
    assert total == pytest.approx(0.0, abs=1e-3)


def test_truncated(cs):
    small = cs.truncated(9)
    assert isinstance(small, AtomicDataset)
    assert all(t.lower.n <= 9 and t.upper.n <= 9 for t in small.transitions)
    assert len(small.transitions) < len(cs.transitions)
