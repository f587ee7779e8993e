import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.constants import hbar, k as kB

from casimir_neq.lifshitz import EquilibriumConfig, free_energy_per_area
from casimir_neq.materials import GOLD_DRUDE, Drude, DrudeParams, Plasma, gold, silicon
from casimir_neq.noneq import (CHANNELS, NeqBreakdown, NeqQuadratureSpec, ThermalPair,
                               bose_occupation, needs_regularization, neq_antisymmetric_potential,
                               neq_spectral_density, neq_total_potential)
from casimir_neq.optics import HalfSpace, Overlayer, ideal_mirror
from casimir_neq.quadrature import QuadratureError

A = 300e-9
HOT = ThermalPair(350.0, 300.0)


def si_plate():
    return Overlayer(gold(), 100e-9, silicon())


def sphere():
    return HalfSpace(gold())


# -- occupation --------------------------------------------------------------

def test_bose_exactly_one_at_ln2():
    T = 300.0
    assert bose_occupation(math.log(2) * kB * T / hbar, T) == 1.0


def test_bose_small_argument():
    T = 300.0
    x = 1e-8
    n = bose_occupation(x * kB * T / hbar, T)
    # the leading asymptote kB T / (hbar w) is approached with relative
    # offset x/2; the two-term expansion is matched to rounding
    assert n * x == pytest.approx(1.0, rel=1e-8)
    assert n == pytest.approx(1 / x - 0.5 + x / 12, rel=1e-12)


def test_bose_difference_vanishes_at_equal_temperatures():
    w = np.logspace(8, 16, 50)
    assert np.all(bose_occupation(w, 310.0) - bose_occupation(w, 310.0) == 0)


def test_bose_large_argument_underflows_cleanly():
    assert bose_occupation(1e20, 1.0) == 0.0


# -- types -------------------------------------------------------------------

def test_thermal_pair():
    with pytest.raises(ValueError):
        ThermalPair(0.0, 300.0)
    assert ThermalPair(1.0, 2.0).swapped() == ThermalPair(2.0, 1.0)


@pytest.mark.parametrize("field", ["relative_tolerance", "omega_window_factor",
                                   "dissipation_floor", "max_subdivisions"])
def test_spec_validation(field):
    with pytest.raises(ValueError):
        NeqQuadratureSpec(**{field: 0})


@given(st.lists(st.floats(-1e-10, 1e-10), min_size=4, max_size=4))
def test_breakdown_total_is_channel_sum(vals):
    b = NeqBreakdown.from_array(vals)
    assert b.total == ((vals[0] + vals[1]) + vals[2]) + vals[3]
    assert list(b.channels()) == vals


# -- antisymmetric potential -------------------------------------------------

def test_equal_temperatures_all_zero():
    b = neq_antisymmetric_potential(si_plate(), sphere(), A, ThermalPair(320.0, 320.0))
    assert list(b.channels()) == [0.0] * 4 and b.total == 0.0


@pytest.mark.parametrize("refl", [sphere(), si_plate(), HalfSpace(Plasma()), ideal_mirror()],
                         ids=["Au", "Au_on_Si", "plasma", "ideal"])
def test_identical_reflectors_null(refl):
    b = neq_antisymmetric_potential(refl, refl, A, HOT)
    assert b.total == 0.0


def test_swap_flips_sign_exactly():
    b1 = neq_antisymmetric_potential(si_plate(), sphere(), A, HOT)
    b2 = neq_antisymmetric_potential(si_plate(), sphere(), A, HOT.swapped())
    assert b2.total == -b1.total
    assert np.array_equal(b2.channels(), -b1.channels())


def test_fig2_configuration_dominated_by_evanescent_te():
    b = neq_antisymmetric_potential(si_plate(), sphere(), A, HOT)
    assert b.total > 0
    assert b.evanescent_TE / b.total > 0.5
    assert b.error_estimate < 1e-4 * abs(b.total)
    low = neq_spectral_density(si_plate(), sphere(), A, HOT, 2e12)
    high = neq_spectral_density(si_plate(), sphere(), A, HOT, 2e14)
    assert low.evanescent_TE > 10 * abs(high.evanescent_TE)


def test_tolerance_refinement_is_stable():
    coarse = neq_antisymmetric_potential(si_plate(), sphere(), A, HOT, NeqQuadratureSpec(1e-4))
    fine = neq_antisymmetric_potential(si_plate(), sphere(), A, HOT, NeqQuadratureSpec(1e-7))
    assert coarse.total == pytest.approx(fine.total, rel=1e-4)


def test_budget_exhaustion_raises():
    with pytest.raises(QuadratureError) as info:
        neq_antisymmetric_potential(si_plate(), sphere(), A, HOT,
                                    NeqQuadratureSpec(1e-12, max_subdivisions=12))
    assert info.value.partial is not None


def test_separation_validated():
    with pytest.raises(ValueError):
        neq_antisymmetric_potential(si_plate(), sphere(), 0.0, HOT)


# -- lossless bodies ---------------------------------------------------------

def test_regularization_only_without_dissipation():
    assert needs_regularization(HalfSpace(Plasma()), ideal_mirror())
    assert not needs_regularization(HalfSpace(Plasma()), si_plate())
    assert not needs_regularization(Overlayer(Plasma(), 1e-7, silicon()), HalfSpace(Plasma()))


def test_plasma_against_dissipative_plate_is_eta_free():
    plate = Overlayer(Plasma(), 100e-9, silicon())
    b1 = neq_antisymmetric_potential(plate, HalfSpace(Plasma()), A, HOT)
    b2 = neq_antisymmetric_potential(plate, HalfSpace(Plasma()), A, HOT,
                                     NeqQuadratureSpec(dissipation_floor=5e-5))
    assert not b1.regularized
    assert b1.total == b2.total
    assert b1.total < 0 and not math.isnan(b1.total)


def test_halving_eta_between_lossless_bodies():
    wp = GOLD_DRUDE.plasma_frequency
    r1, r2 = HalfSpace(Plasma(DrudeParams(wp))), HalfSpace(Plasma(DrudeParams(0.6 * wp)))
    spec = NeqQuadratureSpec()
    b1 = neq_antisymmetric_potential(r1, r2, A, HOT, spec)
    b2 = neq_antisymmetric_potential(r1, r2, A, HOT, NeqQuadratureSpec(dissipation_floor=5e-5))
    assert b1.regularized
    scale = abs(free_energy_per_area(EquilibriumConfig(r1, r2, A, 350.0))
                - free_energy_per_area(EquilibriumConfig(r1, r2, A, 300.0)))
    assert abs(b1.total - b2.total) < spec.relative_tolerance * scale
    assert all(math.isfinite(v) for v in b1.channels())


# -- total potential and spectra ---------------------------------------------

def test_total_potential_equilibrium_reduction():
    T = ThermalPair(310.0, 310.0)
    f = free_energy_per_area(EquilibriumConfig(si_plate(), sphere(), A, 310.0))
    assert neq_total_potential(si_plate(), sphere(), A, T) == f


def test_total_potential_average_property():
    u12 = neq_total_potential(si_plate(), sphere(), A, HOT)
    u21 = neq_total_potential(si_plate(), sphere(), A, HOT.swapped())
    f = [free_energy_per_area(EquilibriumConfig(si_plate(), sphere(), A, T)) for T in (350, 300)]
    assert 0.5 * (u12 + u21) == pytest.approx(0.5 * (f[0] + f[1]), rel=1e-14)


def test_total_potential_gold_pair_is_equilibrium_average():
    f = [free_energy_per_area(EquilibriumConfig(sphere(), sphere(), A, T)) for T in (350, 300)]
    assert neq_total_potential(sphere(), sphere(), A, HOT) == pytest.approx(
        0.5 * (f[0] + f[1]), rel=1e-12)


def test_spectral_density_zero_at_equal_temperatures():
    d = neq_spectral_density(si_plate(), sphere(), A, ThermalPair(300.0, 300.0), 1e13)
    assert d.total == 0.0


def test_spectral_density_bose_suppressed():
    w = np.logspace(11, 14.5, 15)
    peak = max(abs(neq_spectral_density(si_plate(), sphere(), A, HOT, x).total) for x in w)
    far = neq_spectral_density(si_plate(), sphere(), A, HOT, 100 * kB * 350.0 / hbar)
    assert abs(far.total) < 1e-12 * peak


def test_spectral_density_integrates_to_potential():
    # coarse log-trapezoid over the spectral density reproduces the integral
    w = np.logspace(7, 15.4, 500)
    dens = np.array([neq_spectral_density(si_plate(), sphere(), A, HOT, x).total for x in w])
    val = np.trapezoid(dens * w, np.log(w)) if hasattr(np, "trapezoid") else np.trapz(dens * w, np.log(w))
    ref = neq_antisymmetric_potential(si_plate(), sphere(), A, HOT).total
    assert val == pytest.approx(ref, rel=2e-3)


# -- randomized antisymmetry ------------------------------------------------

materials = st.sampled_from(["drude", "plasma", "si", "weak"])


def _material(name):
    return {"drude": gold(), "plasma": Plasma(), "si": silicon(),
            "weak": Drude(DrudeParams(1e15, 1e14))}[name]


@st.composite
def reflectors(draw):
    layer, sub = draw(materials), draw(materials)
    if draw(st.booleans()):
        return HalfSpace(_material(layer))
    return Overlayer(_material(layer), draw(st.floats(5e-9, 500e-9)), _material(sub))


@settings(max_examples=8)
@given(reflectors(), reflectors(), st.floats(100e-9, 2e-6), st.floats(50.0, 600.0),
       st.floats(50.0, 600.0))
def test_antisymmetry_property(r1, r2, a, T1, T2):
    b1 = neq_antisymmetric_potential(r1, r2, a, ThermalPair(T1, T2))
    b2 = neq_antisymmetric_potential(r1, r2, a, ThermalPair(T2, T1))
    assert b1.total + b2.total == 0.0


def test_lossless_body_against_weakly_absorbing_film():
    plate, other = HalfSpace(Plasma()), Overlayer(silicon(), 202e-9, Plasma())
    T = ThermalPair(202.4, 143.5)
    b = neq_antisymmetric_potential(plate, other, 139e-9, T)
    assert not b.regularized and math.isfinite(b.total)
    assert neq_antisymmetric_potential(plate, other, 139e-9, T.swapped()).total == -b.total
