"""Sphere-plate observables of the differential setup.

A sphere faces a plate whose two sectors (Au and Si) are covered by a common
overlayer. Forces follow from plane-parallel potentials through the
proximity force approximation, ``F = 2 pi R U``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import C, HBAR, K_B
from .lifshitz import EquilibriumConfig, MatsubaraSpec, lifshitz_sum
from .materials import DielectricModel, gold, penetration_depth, silicon
from .noneq import NeqQuadratureSpec, ThermalPair, neq_antisymmetric_potential
from .optics import HalfSpace, Overlayer


class PFAWarning(UserWarning):
    """Sphere radius not much larger than the separation."""


def _gold():
    return gold()


@dataclass(frozen=True)
class ApparatusConfig:
    separation: float
    temps: ThermalPair
    sphere_radius: float = 150e-6
    overlayer_thickness: float = 100e-9
    sphere_material: DielectricModel = field(default_factory=_gold)
    overlayer_material: DielectricModel = field(default_factory=_gold)
    sector_Au_material: DielectricModel = field(default_factory=_gold)
    sector_Si_material: DielectricModel = field(default_factory=silicon)

    def __post_init__(self):
        for name in ("separation", "sphere_radius", "overlayer_thickness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.pfa_valid:
            warnings.warn(f"R = {self.sphere_radius:.3g} m is less than 100 a; PFA is "
                          "unreliable", PFAWarning, stacklevel=3)

    @property
    def pfa_valid(self):
        return self.sphere_radius >= 100 * self.separation

    def sphere(self):
        return HalfSpace(self.sphere_material)

    def _plate(self, sector):
        if sector == self.overlayer_material:
            return HalfSpace(self.overlayer_material)
        return Overlayer(self.overlayer_material, self.overlayer_thickness, sector)

    def plate_Au(self):
        return self._plate(self.sector_Au_material)

    def plate_Si(self):
        return self._plate(self.sector_Si_material)


@dataclass(frozen=True)
class DeltaFResult:
    """Forces in newtons. ``residual = |delta_F - 2 pi R Ubar_Si|``.

    ``diagnostics`` holds the largest Matsubara index summed, the total
    quadrature panel count and the summed error estimate of the
    antisymmetric potentials (J/m^2).
    """

    delta_F: float
    F_over_Au: float
    F_over_Si: float
    equilibrium_part: float
    antisymmetric_part: float
    residual: float
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class FilterWindow:
    """Overlayer window ``delta_0 < w < delta_T`` (lengths in metres)."""

    thickness: float
    delta_0: float
    delta_T: float

    @property
    def lower_margin(self):
        return self.thickness / self.delta_0

    @property
    def upper_margin(self):
        return self.delta_T / self.thickness

    @property
    def lower_ok(self):
        return self.delta_0 < self.thickness

    @property
    def upper_ok(self):
        return self.thickness < self.delta_T

    @property
    def satisfied(self):
        return self.lower_ok and self.upper_ok


def pfa_force(R, potential):
    """Sphere-plate force ``2 pi R U`` (N); negative means attraction."""
    if not R > 0:
        raise ValueError("sphere radius must be > 0")
    return 2 * math.pi * R * potential


def thermal_wavelength(T):
    """hbar c / (kB T) in metres."""
    if not T > 0:
        raise ValueError("temperature must be > 0")
    return HBAR * C / (K_B * T)


def _split_exactly(total, part):
    """Return ``rest`` with ``rest + part == total`` in floating point.

    The naive ``total - part`` can miss by an ulp; step it until the sum
    reproduces ``total``.
    """
    rest = total - part
    for _ in range(64):
        s = rest + part
        if s == total:
            return rest
        rest = np.nextafter(rest, math.inf if s < total else -math.inf)
    return total - part


def _mean_free_energy(plate, sphere, a, temps, spec):
    r1 = lifshitz_sum(EquilibriumConfig(plate, sphere, a, temps.T1), spec)
    if temps.T1 == temps.T2:
        return r1.value, [r1]
    r2 = lifshitz_sum(EquilibriumConfig(plate, sphere, a, temps.T2), spec)
    return 0.5 * (r1.value + r2.value), [r1, r2]


def delta_F(cfg, matsubara=MatsubaraSpec(), neq=NeqQuadratureSpec()):
    """Force difference between the sphere above the Si and the Au sector.

    The plate (body 1) is at ``temps.T1``, the sphere (body 2) at
    ``temps.T2``.
    """
    a, R = cfg.separation, cfg.sphere_radius
    sphere = cfg.sphere()
    eq, ubar = {}, {}
    diag = {"matsubara_terms": 0, "panels": 0, "neq_error": 0.0}
    for key, plate in (("Au", cfg.plate_Au()), ("Si", cfg.plate_Si())):
        eq[key], sums = _mean_free_energy(plate, sphere, a, cfg.temps, matsubara)
        br = neq_antisymmetric_potential(plate, sphere, a, cfg.temps, neq)
        ubar[key] = br.total
        diag["matsubara_terms"] = max([diag["matsubara_terms"]] + [r.terms for r in sums])
        diag["panels"] += sum(r.panels for r in sums) + br.panels
        diag["neq_error"] += br.error_estimate
    f_au = pfa_force(R, eq["Au"] + ubar["Au"])
    f_si = pfa_force(R, eq["Si"] + ubar["Si"])
    diff = f_si - f_au
    anti = pfa_force(R, ubar["Si"] - ubar["Au"])
    equil = float(_split_exactly(diff, anti))
    return DeltaFResult(delta_F=diff, F_over_Au=f_au, F_over_Si=f_si, equilibrium_part=equil,
                        antisymmetric_part=anti, residual=abs(diff - pfa_force(R, ubar["Si"])),
                        diagnostics=diag)


def filter_window_check(cfg):
    """Penetration depths bracketing the overlayer thickness.

    ``delta_0`` is taken at ``c/(2a)``, ``delta_T`` at ``0.05 kB max(T)/hbar``.
    """
    m = cfg.overlayer_material
    d0 = penetration_depth(m, C / (2 * cfg.separation))
    dT = penetration_depth(m, 0.05 * K_B * max(cfg.temps.T1, cfg.temps.T2) / HBAR)
    return FilterWindow(cfg.overlayer_thickness, float(d0), float(dT))
