"""Non-equilibrium Casimir potential between two planar reflectors.

The antisymmetric part of the potential is

    U_neq(T1, T2) = hbar/(4 pi^2) int dw [n(w,T1) - n(w,T2)] int dk k
                    sum_j Im log(1 - exp(2 i a kz) R1 R2) * W_j

with the weight ``W = (|R2|^2 - |R1|^2) / (1 - |R1 R2|^2)`` for propagating
waves (k < w/c) and ``W = Im(R1 R2*) / Im(R1 R2)`` for evanescent ones. R1
belongs to the body at T1 (the plate), R2 to the body at T2 (the sphere).

The inner integral is split at the light line. Propagating waves use
``s = c kz / w`` on [0, 1]; evanescent waves use ``t = 2 a sqrt(k^2 - w^2/c^2)``
on [0, 18 ln 10]. The outer integral runs over ``ln w``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C, HBAR, K_B
from .lifshitz import U_SPAN, MatsubaraSpec, EquilibriumConfig, free_energy_per_area
from .optics import StackEvaluator, is_lossless
from .quadrature import QuadratureError, integrate_batch

_S_EDGES = np.linspace(0.0, 1.0, 14)  # same panel count as the t edges
_T_COARSE = np.array([2.0, 6.0, 15.0, U_SPAN])
_T_FINE = 8  # geometric panels between the light-line scale and t = 0.5
#: weight of the unweighted |Im log| integral in the convergence tests
SCALE_FLOOR = 1e-9
CHANNELS = ("propagating_TE", "propagating_TM", "evanescent_TE", "evanescent_TM")


@dataclass(frozen=True)
class ThermalPair:
    T1: float  # plate
    T2: float  # sphere

    def __post_init__(self):
        if not (self.T1 > 0 and self.T2 > 0):
            raise ValueError("temperatures must be > 0")

    def swapped(self):
        return ThermalPair(self.T2, self.T1)


@dataclass(frozen=True)
class NeqQuadratureSpec:
    """Quadrature controls for the (w, kperp) double integral.

    ``dissipation_floor`` is relative: lossless models are evaluated at the
    complex frequency ``w (1 + i dissipation_floor)``.
    """

    relative_tolerance: float = 1e-5
    omega_window_factor: float = 50.0
    dissipation_floor: float = 1e-4
    max_subdivisions: int = 400

    def __post_init__(self):
        for name in ("relative_tolerance", "omega_window_factor", "dissipation_floor",
                     "max_subdivisions"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class NeqBreakdown:
    """Channel decomposition (J/m^2; J s/m^2 for spectral densities)."""

    propagating_TE: float
    propagating_TM: float
    evanescent_TE: float
    evanescent_TM: float
    total: float = field(init=False)
    panels: int = 0
    error_estimate: float = 0.0
    regularized: bool = False

    def __post_init__(self):
        self.total = ((self.propagating_TE + self.propagating_TM)
                      + self.evanescent_TE) + self.evanescent_TM

    @classmethod
    def from_array(cls, values, **kw):
        return cls(*(float(v) for v in values), **kw)

    def channels(self):
        return np.array([getattr(self, c) for c in CHANNELS])


def bose_occupation(omega, T):
    """Bose-Einstein occupation 1 / (exp(hbar w / kB T) - 1)."""
    x = HBAR * np.asarray(omega, dtype=float) / (K_B * T)
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(x)
    return n if np.ndim(omega) else float(n)


def _atanc(s):
    small = np.abs(s) < 1e-8
    return np.where(small, 1.0 - s * s / 3.0, np.arctan(s) / np.where(small, 1.0, s))


def _evanescent_term(r1, r2, damp):
    """Im log(1 - damp z) * Im(r1 r2*) / Im(z) for z = r1 r2, without 0/0.

    Where 1 - damp Re z > 0 the ratio Im log(1 - damp z) / Im z equals
    -(damp/d) atan(y/d)/(y/d) with d = 1 - damp Re z and y = damp Im z.
    """
    z = r1 * r2
    # written out so that r1 == r2 gives exactly zero
    num = r1.imag * r2.real - r1.real * r2.imag
    d = 1.0 - damp * z.real
    y = damp * z.imag
    pos = d > 0
    ratio_pos = -(damp / np.where(pos, d, 1.0)) * _atanc(y / np.where(pos, d, 1.0))
    zi = np.where(z.imag == 0, 1.0, z.imag)
    ratio_neg = np.where(z.imag == 0, 0.0, np.arctan2(-y, d) / zi)
    return num * np.where(pos, ratio_pos, ratio_neg)


def _propagating_term(r1, loss1, r2, loss2, phase):
    """Im log(1 - phase r1 r2) * (|r2|^2 - |r1|^2) / (1 - |r1 r2|^2).

    ``loss = 1 - |r|^2`` is passed in so that nearly lossless reflectors do
    not lose their digits to cancellation.
    """
    num = loss1 - loss2
    den = loss1 + loss2 - loss1 * loss2
    zero1, zero2 = loss1 == 0, loss2 == 0
    ok = (num != 0) & (den > 0) & ~zero1 & ~zero2
    weight = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
    # an exactly lossless side against any dissipation gives -+1, whatever the
    # size (or rounding sign) of the other loss
    weight = np.where(zero1 & ~zero2, -1.0, np.where(zero2 & ~zero1, 1.0, weight))
    return np.angle(1.0 - phase * (r1 * r2)) * weight


def _evanescent_edges(a, omegas):
    """Initial t panels: structure sits at t ~ 2 a w / c and above."""
    t_lo = np.clip(0.1 * 2 * a * omegas / C, 1e-12, 1e-3)
    fine = np.exp(np.linspace(np.log(t_lo), np.log(0.5), _T_FINE + 1).T)
    zero = np.zeros((len(omegas), 1))
    return np.hstack([zero, fine, np.broadcast_to(_T_COARSE, (len(omegas), len(_T_COARSE)))])


def _inner_integrals(refl1, refl2, a, omegas, eta, rtol, max_panels):
    """kperp integrals per frequency: array (B, 5), CHANNELS order then scale.

    The last column is ``SCALE_FLOOR`` times the integral of the unweighted
    ``|Im log|``. It enters the convergence test only, so that pairs whose
    weights nearly cancel (almost identical reflectors) converge to an
    absolute accuracy instead of chasing rounding noise.
    """
    nb = len(omegas)
    ev1 = StackEvaluator(refl1, omegas, False, eta)
    ev2 = StackEvaluator(refl2, omegas, False, eta)
    k0 = omegas / C

    def integrand(x, owner):
        out = np.empty((len(x), 3))
        prop = owner < nb
        if np.any(prop):
            o = owner[prop]
            s = x[prop]
            kv = k0[o]
            k = kv * np.sqrt(np.maximum(1.0 - s * s, 0.0))
            (te1, tm1), (lte1, ltm1) = ev1.amplitudes_and_losses(o, k)
            (te2, tm2), (lte2, ltm2) = ev2.amplitudes_and_losses(o, k)
            phase = np.exp(2j * a * kv * s)
            jac = kv * kv * s
            out[prop, 0] = jac * _propagating_term(te1, lte1, te2, lte2, phase)
            out[prop, 1] = jac * _propagating_term(tm1, ltm1, tm2, ltm2, phase)
            out[prop, 2] = SCALE_FLOOR * jac * (np.abs(np.angle(1.0 - phase * (te1 * te2)))
                                                + np.abs(np.angle(1.0 - phase * (tm1 * tm2))))
        ev = ~prop
        if np.any(ev):
            o = owner[ev] - nb
            t = x[ev]
            kappa = t / (2 * a)
            k = np.sqrt(k0[o] ** 2 + kappa**2)
            te1, tm1 = ev1.amplitudes(o, k)
            te2, tm2 = ev2.amplitudes(o, k)
            damp = np.exp(-t)
            jac = t / (4 * a * a)
            out[ev, 0] = jac * _evanescent_term(te1, te2, damp)
            out[ev, 1] = jac * _evanescent_term(tm1, tm2, damp)
            out[ev, 2] = SCALE_FLOOR * jac * (np.abs(np.angle(1.0 - damp * (te1 * te2)))
                                              + np.abs(np.angle(1.0 - damp * (tm1 * tm2))))
        return out

    edges = np.vstack([np.broadcast_to(_S_EDGES, (nb, len(_S_EDGES))),
                       _evanescent_edges(a, omegas)])
    # no minimum width: near a guided mode of a lossless gap the integrand
    # steps by pi at a single t, and bisection has to pin that point down
    res = integrate_batch(integrand, edges, rtol=rtol, max_panels=max_panels)
    if not res.converged.all():
        bad = int(np.argmin(res.converged))
        branch = "propagating" if bad < nb else "evanescent"
        raise QuadratureError(
            f"{branch} kperp integral failed at w={omegas[bad % nb]:.4g} rad/s",
            partial=res.value, worst_panel=tuple(res.worst_panel[bad]))
    v = res.value
    return (np.hstack([v[:nb, :2], v[nb:, :2], v[:nb, 2:] + v[nb:, 2:]]),
            int(res.panels.sum()))


def _prefactor(omega, temps):
    return HBAR / (4 * math.pi**2) * (bose_occupation(omega, temps.T1)
                                      - bose_occupation(omega, temps.T2))


def _window(temps, spec):
    lo = 1e-6 * K_B * min(temps.T1, temps.T2) / HBAR
    hi = spec.omega_window_factor * K_B * max(temps.T1, temps.T2) / HBAR
    return lo, hi


def _integrate(refl1, refl2, a, temps, spec, eta):
    inner_rtol = 0.1 * spec.relative_tolerance
    lo, hi = _window(temps, spec)
    ylo, yhi = math.log(lo), math.log(hi)
    npan = max(1, math.ceil((yhi - ylo) / math.log(10.0)))
    counter = {"panels": 0}

    def outer(y, _owner):
        w = np.exp(y)
        pref = _prefactor(w, temps)
        live = pref != 0
        vals = np.zeros((len(y), 5))
        if np.any(live):
            inner, npanels = _inner_integrals(refl1, refl2, a, w[live], eta, inner_rtol,
                                              spec.max_subdivisions)
            counter["panels"] += npanels
            vals[live] = inner * (pref[live] * w[live])[:, None]
        return vals

    res = integrate_batch(outer, np.linspace(ylo, yhi, npan + 1)[None, :],
                          rtol=spec.relative_tolerance, max_panels=spec.max_subdivisions)
    if not res.converged[0]:
        raise QuadratureError("frequency integral exhausted its subdivision budget",
                              partial=res.value[0, :4],
                              worst_panel=tuple(np.exp(res.worst_panel[0])))
    return res.value[0, :4], float(res.error[0, :4].sum()), counter["panels"] + int(res.panels[0])


def needs_regularization(refl1, refl2):
    """True when both weights are 0/0, i.e. neither reflector dissipates.

    If one side dissipates, the vanishing-dissipation limit of the weights is
    reached by evaluating the lossless side exactly, so no floor is applied.
    """
    return is_lossless(refl1) and is_lossless(refl2)


def neq_antisymmetric_potential(refl1, refl2, a, temps, spec=NeqQuadratureSpec()):
    """Antisymmetric non-equilibrium potential per unit area, by channel.

    When neither reflector dissipates, the permittivities are evaluated at
    ``w (1 + i eta)`` for ``eta`` and ``eta/2`` (``eta = dissipation_floor``)
    and extrapolated to ``eta -> 0`` with one Richardson step.
    """
    if not a > 0:
        raise ValueError("separation must be > 0")
    if temps.T1 == temps.T2:
        return NeqBreakdown(0.0, 0.0, 0.0, 0.0)
    if needs_regularization(refl1, refl2):
        eta = spec.dissipation_floor
        v1, e1, p1 = _integrate(refl1, refl2, a, temps, spec, eta)
        v2, e2, p2 = _integrate(refl1, refl2, a, temps, spec, 0.5 * eta)
        return NeqBreakdown.from_array(2.0 * v2 - v1, panels=p1 + p2,
                                       error_estimate=2 * e2 + e1, regularized=True)
    v, e, p = _integrate(refl1, refl2, a, temps, spec, 0.0)
    return NeqBreakdown.from_array(v, panels=p, error_estimate=e)


def neq_spectral_density(refl1, refl2, a, temps, omega, spec=NeqQuadratureSpec()):
    """Frequency integrand of the antisymmetric potential at ``omega``, by channel."""
    if not omega > 0:
        raise ValueError("omega must be > 0")
    pref = _prefactor(np.array([omega]), temps)[0]
    if pref == 0:
        return NeqBreakdown(0.0, 0.0, 0.0, 0.0)
    rtol = 0.1 * spec.relative_tolerance

    def at(eta):
        inner, _ = _inner_integrals(refl1, refl2, a, np.array([float(omega)]), eta, rtol,
                                    spec.max_subdivisions)
        return pref * inner[0, :4]

    if needs_regularization(refl1, refl2):
        eta = spec.dissipation_floor
        return NeqBreakdown.from_array(2.0 * at(0.5 * eta) - at(eta), regularized=True)
    return NeqBreakdown.from_array(at(0.0))


def neq_total_potential(refl1, refl2, a, temps, matsubara=MatsubaraSpec(),
                        neq=NeqQuadratureSpec()):
    """Full out-of-equilibrium potential: mean of the equilibrium free energies
    at T1 and T2 plus the antisymmetric term."""
    f1 = free_energy_per_area(EquilibriumConfig(refl1, refl2, a, temps.T1), matsubara)
    if temps.T1 == temps.T2:
        f2 = f1
    else:
        f2 = free_energy_per_area(EquilibriumConfig(refl1, refl2, a, temps.T2), matsubara)
    return 0.5 * (f1 + f2) + neq_antisymmetric_potential(refl1, refl2, a, temps, neq).total
