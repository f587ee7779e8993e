"""Equilibrium Lifshitz free energy and pressure between two planar reflectors.

    F(T) = (kB T / 2 pi) sum'_l int dk k sum_j log[1 - exp(-2 a q_l) R1_j R2_j]

evaluated at the Matsubara frequencies ``xi_l = 2 pi l kB T / hbar``, the
``l = 0`` term carrying half weight. The kperp integral is done in the
variable ``u = 2 a q_l``, for which ``k dk = u du / (4 a^2)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import C, HBAR, K_B
from .optics import POLARIZATIONS, StackEvaluator, static_reflection
from .quadrature import QuadratureError, integrate_batch

#: exp(-U_SPAN) = 1e-18: integration window in u above its lower limit.
U_SPAN = 18 * math.log(10.0)
_U_EDGES = np.array([0.0, 0.5, 2.0, 6.0, 15.0, U_SPAN])


class MatsubaraConvergenceError(RuntimeError):
    def __init__(self, message, partial, terms):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


@dataclass(frozen=True)
class EquilibriumConfig:
    reflector1: object
    reflector2: object
    separation: float
    temperature: float

    def __post_init__(self):
        if not self.separation > 0:
            raise ValueError("separation must be > 0")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")


@dataclass(frozen=True)
class MatsubaraSpec:
    """Truncation of the Matsubara sum.

    ``max_terms=None`` selects ``max(200, (ln(1/rtol) + 10) c / (2 a xi_1))``:
    terms fall off like ``u**2 exp(-u)`` with ``u = 2 a xi_l / c``, so the
    budget reaches ``u`` a little beyond ``ln(1/rtol)``.
    """

    relative_tolerance: float = 1e-9
    max_terms: int = None

    def __post_init__(self):
        if not 0 < self.relative_tolerance < 1:
            raise ValueError("relative_tolerance must be in (0, 1)")
        if self.max_terms is not None and self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")

    def terms_for(self, separation, temperature):
        if self.max_terms is not None:
            return self.max_terms
        xi1 = matsubara_frequency(temperature, 1)
        reach = math.log(1 / self.relative_tolerance) + 10
        return max(200, math.ceil(reach * C / (2 * separation * xi1)))


@dataclass
class LifshitzResult:
    value: float
    zero_term: tuple      # (TE, TM) contributions of l = 0, half weight included
    terms: int            # highest Matsubara index summed
    last_term: float
    panels: int           # kperp quadrature panels used


def matsubara_frequency(T, l):
    """xi_l = 2 pi l kB T / hbar in rad/s."""
    if not T > 0:
        raise ValueError("temperature must be > 0")
    if np.any(np.asarray(l) < 0):
        raise ValueError("Matsubara index must be >= 0")
    return 2 * math.pi * np.asarray(l) * K_B * T / HBAR if np.ndim(l) else \
        2 * math.pi * l * K_B * T / HBAR


def _kernel(x, u, a, derivative):
    """Integrand in u for the product x = exp(-u) R1 R2."""
    if derivative:
        # d/da log(1 - exp(-2aq) RR) = 2q x / (1 - x), and 2q = u / a
        return -(u / (4 * a * a)) * (u / a) * x / (1.0 - x)
    return (u / (4 * a * a)) * np.log1p(-x)


def _channels(cfg, derivative, rtol, xis):
    """kperp integrals (TE, TM) for the Matsubara frequencies ``xis`` > 0."""
    a = cfg.separation
    ev1 = StackEvaluator(cfg.reflector1, xis, True)
    ev2 = StackEvaluator(cfg.reflector2, xis, True)
    u_lo = 2 * a * xis / C

    def integrand(u, owner):
        xi = xis[owner]
        k = np.sqrt(np.maximum((u / (2 * a)) ** 2 - (xi / C) ** 2, 0.0))
        te1, tm1 = ev1.amplitudes(owner, k)
        te2, tm2 = ev2.amplitudes(owner, k)
        damp = np.exp(-u)
        return np.stack([_kernel(damp * (te1 * te2), u, a, derivative),
                         _kernel(damp * (tm1 * tm2), u, a, derivative)], axis=1)

    res = integrate_batch(integrand, u_lo[:, None] + _U_EDGES[None, :], rtol=rtol,
                          max_panels=400)
    if not res.converged.all():
        bad = int(np.argmin(res.converged))
        raise QuadratureError(f"kperp integral failed at xi={xis[bad]:.4g} rad/s",
                              partial=res.value, worst_panel=tuple(res.worst_panel[bad]))
    return res.value, int(res.panels.sum())


def zero_frequency_channels(cfg, derivative=False, rtol=1e-11):
    """(TE, TM) parts of the l = 0 term, with the half weight applied."""
    a = cfg.separation
    pref = 0.5 * K_B * cfg.temperature / (2 * math.pi)
    out = []
    for pol in POLARIZATIONS:
        def integrand(u, _owner, pol=pol):
            k = u / (2 * a)
            x = np.exp(-u) * (static_reflection(cfg.reflector1, pol, k)
                              * static_reflection(cfg.reflector2, pol, k))
            return _kernel(x, u, a, derivative)

        res = integrate_batch(integrand, _U_EDGES[None, :], rtol=rtol, max_panels=400)
        if not res.converged[0]:
            raise QuadratureError("l = 0 kperp integral did not converge",
                                  partial=res.value[0, 0], worst_panel=tuple(res.worst_panel[0]))
        out.append(pref * float(res.value[0, 0]))
    return tuple(out)


def zero_frequency_term(cfg):
    """Half-weight l = 0 contribution to the free energy (J/m^2)."""
    te, tm = zero_frequency_channels(cfg)
    return te + tm


def lifshitz_sum(cfg, spec=MatsubaraSpec(), derivative=False):
    """Matsubara sum for the free energy, or for the pressure with ``derivative``."""
    rtol = spec.relative_tolerance
    krtol = max(0.1 * rtol, 1e-13)
    max_terms = spec.terms_for(cfg.separation, cfg.temperature)
    pref = K_B * cfg.temperature / (2 * math.pi)
    zero = zero_frequency_channels(cfg, derivative, rtol=krtol)
    acc = zero[0] + zero[1]

    u1 = 2 * cfg.separation * matsubara_frequency(cfg.temperature, 1) / C
    block = int(min(max_terms, max(32, math.ceil(math.log(1 / rtol) / u1))))
    start, panels, last = 1, 0, math.inf
    while start <= max_terms:
        ls = np.arange(start, min(start + block, max_terms + 1))
        vals, npan = _channels(cfg, derivative, krtol, matsubara_frequency(cfg.temperature, ls))
        panels += npan
        terms = pref * (vals[:, 0] + vals[:, 1])
        for l, term in zip(ls, terms):
            acc += float(term)
            last = abs(float(term))
            if last <= rtol * abs(acc):
                return LifshitzResult(acc, zero, int(l), last, panels)
        start = ls[-1] + 1
        block *= 2
    raise MatsubaraConvergenceError(
        f"Matsubara sum not converged after {max_terms} terms", partial=acc, terms=max_terms)


def free_energy_per_area(cfg, spec=MatsubaraSpec()):
    """Equilibrium Casimir free energy per unit area (J/m^2); negative = attraction."""
    return lifshitz_sum(cfg, spec).value


def pressure_per_area(cfg, spec=MatsubaraSpec()):
    """Pressure -dF/da (N/m^2) from the analytically differentiated integrand."""
    return lifshitz_sum(cfg, spec, derivative=True).value
