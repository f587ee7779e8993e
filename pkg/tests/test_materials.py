import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.constants import c, e, hbar

from casimir_neq.materials import (GOLD_DRUDE, Drude, DrudeParams, IdealMirror, OpticalDataError,
                                   OpticalTable, Plasma, Tabulated, Vacuum, gold,
                                   ingest_optical_table, penetration_depth,
                                   permittivity_imag_axis, permittivity_real_axis, silicon)

import oracles

WP, GAMMA = 1.352e16, 5.32e13


def all_models():
    return [Vacuum(), Drude(GOLD_DRUDE), Plasma(), gold("tabulated"), silicon()]


# -- real axis ---------------------------------------------------------------

def test_drude_direct_formula():
    w = 5e14
    eps = permittivity_real_axis(Drude(DrudeParams(WP, GAMMA)), w)
    expected = 1 - WP**2 / (w * (w + 1j * GAMMA))
    assert eps == pytest.approx(expected, rel=1e-14)
    assert eps.real < 0


def test_vacuum_is_one():
    assert permittivity_real_axis(Vacuum(), 3.7e13) == 1 + 0j
    assert permittivity_imag_axis(Vacuum(), 3.7e13) == 1.0


def test_plasma_zero_at_plasma_frequency():
    p = Plasma(DrudeParams(WP))
    assert permittivity_real_axis(p, WP) == 0


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        permittivity_real_axis(Drude(), bad)
    with pytest.raises(ValueError):
        permittivity_imag_axis(Drude(), bad)


def test_drude_params_validation():
    with pytest.raises(ValueError):
        DrudeParams(0.0, 1.0)
    with pytest.raises(ValueError):
        DrudeParams(1.0, -1.0)
    with pytest.raises(ValueError):
        Drude(DrudeParams(1.0, 0.0))
    with pytest.raises(ValueError):
        Plasma(DrudeParams(1.0, 1.0))


def test_gold_defaults():
    assert GOLD_DRUDE.plasma_frequency == pytest.approx(8.9 * e / hbar, rel=1e-12)
    assert GOLD_DRUDE.relaxation_rate == pytest.approx(0.035 * e / hbar, rel=1e-12)
    assert gold("plasma").params.relaxation_rate == 0
    assert gold("tabulated") == gold("tabulated")
    with pytest.raises(ValueError):
        gold("lorentz")


@pytest.mark.parametrize("model", all_models(), ids=lambda m: type(m).__name__)
def test_passivity(model):
    w = np.logspace(9, 19, 4001)
    assert np.all(np.imag(permittivity_real_axis(model, w)) >= 0)


def test_tabulated_branches_continuous():
    tab = gold("tabulated")
    t = tab.table
    for w0 in (t.omega[0], t.omega[-1]):
        lo, hi = tab.epsilon(np.array([w0 * (1 - 1e-9), w0 * (1 + 1e-9)]))
        assert lo == pytest.approx(hi, rel=1e-6)


# -- imaginary axis ----------------------------------------------------------

def test_drude_imag_axis_closed_form():
    xi = np.logspace(11, 17, 7)
    assert np.allclose(permittivity_imag_axis(Drude(DrudeParams(WP, GAMMA)), xi),
                       1 + WP**2 / (xi * (xi + GAMMA)), rtol=1e-14)


@pytest.mark.parametrize("model", [Vacuum(), Drude(), Plasma()], ids=lambda m: type(m).__name__)
def test_transparent_at_high_frequency(model):
    v = permittivity_imag_axis(model, 1e3 * GOLD_DRUDE.plasma_frequency)
    assert 1.0 <= v < 1.000002


@pytest.mark.parametrize("model", all_models()[3:], ids=["Au", "Si"])
def test_tabulated_high_frequency_sum_rule(model):
    # bound electrons add oscillator strength, so eps - 1 exceeds (wp/xi)^2
    # but still falls off as xi**-2
    xi = 1e3 * GOLD_DRUDE.plasma_frequency
    v1, v2 = permittivity_imag_axis(model, xi), permittivity_imag_axis(model, 2 * xi)
    assert 1.0 < v1 < 1.00001
    assert (v1 - 1) / (v2 - 1) == pytest.approx(4.0, rel=1e-2)


@pytest.mark.parametrize("model", all_models()[1:], ids=lambda m: type(m).__name__)
def test_imag_axis_real_and_decreasing(model):
    xi = np.logspace(10, 18, 200)
    v = permittivity_imag_axis(model, xi)
    assert v.dtype == float
    assert np.all(v >= 1.0)
    assert np.all(np.diff(v) < 0)


def test_tabulated_gold_matches_kk_oracle():
    xi = 2.46e14
    ref = oracles.kk_imag_axis(gold("tabulated"), xi)
    assert permittivity_imag_axis(gold("tabulated"), xi) == pytest.approx(ref, rel=1e-3)


def test_kk_of_drude_table_recovers_closed_form():
    w = np.logspace(11, 18, 700)
    eps = GOLD_DRUDE.epsilon(w)
    tab = Tabulated(OpticalTable(w, eps.real, eps.imag, GOLD_DRUDE))
    xi = np.logspace(12, 16, 17)
    assert np.allclose(permittivity_imag_axis(tab, xi), GOLD_DRUDE.epsilon_imag(xi), rtol=1e-2)


def test_plasma_is_drude_limit():
    xi = np.array([1e12, 1e14, 1e16])
    plasma = permittivity_imag_axis(Plasma(), xi)
    gaps = [np.abs(permittivity_imag_axis(Drude(DrudeParams(GOLD_DRUDE.plasma_frequency, g)), xi)
                   - plasma) for g in (1e14, 1e12, 1e10, 1e8)]
    assert all(np.all(b < a) for a, b in zip(gaps, gaps[1:]))
    assert np.all(gaps[-1] / plasma < 1e-3)


# -- ingestion ---------------------------------------------------------------

def test_ingest_vacuum_rows():
    text = "units: eV\nformat: nk\n1.0 1 0\n2.0 1 0\n"
    t = ingest_optical_table(text, GOLD_DRUDE)
    assert np.array_equal(t.eps_real, [1.0, 1.0])
    assert np.array_equal(t.eps_imag, [0.0, 0.0])


def test_ingest_ev_conversion():
    t = ingest_optical_table(io.StringIO("units: eV\nformat: eps\n8.9 -1 1\n9.5 -1 1\n"),
                             GOLD_DRUDE)
    assert t.omega[0] == pytest.approx(1.352e16, rel=1e-3)
    assert t.omega[0] == pytest.approx(8.9 * e / hbar, rel=1e-12)


def test_ingest_sorts_and_merges():
    text = "units: rad_s\nformat: eps\n3e14 2 1\n1e14 4 3\n2e14 3 2\n1e14 6 5\n"
    t = ingest_optical_table(text, GOLD_DRUDE)
    assert list(t.omega) == [1e14, 2e14, 3e14]
    assert t.eps_real[0] == 5.0 and t.eps_imag[0] == 4.0


def test_ingest_nk_to_eps():
    t = ingest_optical_table("units: rad_s\nformat: nk\n1e14 2 0.5\n2e14 3 0\n", GOLD_DRUDE)
    assert t.eps_real[0] == pytest.approx(3.75) and t.eps_imag[0] == pytest.approx(2.0)


@pytest.mark.parametrize("text, match", [
    ("format: nk\n1 1 0\n2 1 0\n", "units"),
    ("units: eV\nformat: nk\n1 1 0\n2 1 -0.1\n", "line 4"),
    ("units: eV\nformat: eps\n1 1 0\n2 1 -0.1\n", "line 4"),
    ("units: eV\nformat: eps\n1 1 0\n", "2 rows"),
    ("units: eV\nformat: eps\n1 1\n2 1 0\n", "line 3"),
    ("units: Hz\nformat: eps\n1 1 0\n2 1 0\n", "units"),
])
def test_ingest_rejections(text, match):
    with pytest.raises(OpticalDataError, match=match):
        ingest_optical_table(text, GOLD_DRUDE)


def test_shipped_tables_have_provenance():
    assert "synthetic" in gold("tabulated").table.provenance
    assert "synthetic" in silicon().table.provenance


def test_data_dir_override(tmp_path, monkeypatch):
    (tmp_path / "si_synthetic.txt").write_text("units: rad_s\nformat: eps\n1e12 11 1\n1e16 1 0.1\n")
    monkeypatch.setenv("CASIMIR_NEQ_DATA_DIR", str(tmp_path))
    assert len(silicon().table) == 2


# -- penetration depth -------------------------------------------------------

def test_penetration_depth_anchors():
    au = Drude(GOLD_DRUDE)
    assert 15e-9 <= penetration_depth(au, 5e14) <= 30e-9
    assert 130e-9 <= penetration_depth(au, 2e12) <= 200e-9


def test_penetration_depth_formula():
    w = 1e14
    eps = GOLD_DRUDE.epsilon(w)
    assert penetration_depth(Drude(), w) == pytest.approx(c / (w * np.sqrt(eps).imag), rel=1e-14)


def test_penetration_depth_transparent_is_infinite():
    assert penetration_depth(Vacuum(), 1e14) == math.inf
    assert penetration_depth(Plasma(), 2 * GOLD_DRUDE.plasma_frequency) == math.inf


@given(st.floats(1e10, 1e17))
def test_drude_depth_positive_finite(w):
    d = penetration_depth(Drude(), w)
    assert 0 < d < math.inf
