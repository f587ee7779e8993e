"""Normal wavevectors, Fresnel coefficients and overlayer reflection.

Conventions: ``kz = sqrt(eps w^2/c^2 - kperp^2)`` with ``Im kz >= 0``. On the
imaginary axis ``w = i xi`` and ``kz = i q`` with the real, positive
``q = sqrt(eps xi^2/c^2 + kperp^2)``; all amplitudes are then real.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .constants import C
from .materials import DielectricModel, IdealMirror, Vacuum


class Polarization(enum.Enum):
    TE = "TE"
    TM = "TM"


POLARIZATIONS = (Polarization.TE, Polarization.TM)
VACUUM = Vacuum()


@dataclass(frozen=True)
class HalfSpace:
    material: DielectricModel


@dataclass(frozen=True)
class Overlayer:
    """A film of ``layer`` (thickness in metres) on a ``substrate`` half-space."""

    layer: DielectricModel
    thickness: float
    substrate: DielectricModel

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError(f"overlayer thickness must be > 0, got {self.thickness}")


def ideal_mirror():
    return HalfSpace(IdealMirror())


def materials_of(reflector):
    if isinstance(reflector, HalfSpace):
        return (reflector.material,)
    return (reflector.layer, reflector.substrate)


def is_ideal(reflector):
    if isinstance(reflector, HalfSpace):
        return isinstance(reflector.material, IdealMirror)
    return isinstance(reflector.layer, IdealMirror)


def is_lossless(reflector):
    """True when no constituent dissipates at thermal frequencies."""
    return all(m.lossless for m in materials_of(reflector))


@dataclass(frozen=True)
class TransverseKinematics:
    """Frequency and in-plane wavevector.

    ``frequency`` is the real frequency w when ``imaginary_axis`` is False and
    xi (for w = i xi) otherwise; both in rad/s. ``kperp`` in 1/m.
    """

    frequency: object
    kperp: object
    imaginary_axis: bool = False

    def __post_init__(self):
        if np.any(np.asarray(self.frequency) == 0):
            raise ValueError("frequency must be nonzero")
        if np.any(np.asarray(self.kperp) < 0):
            raise ValueError("kperp must be >= 0")

    @classmethod
    def real(cls, omega, kperp):
        return cls(omega, kperp, False)

    @classmethod
    def imaginary(cls, xi, kperp):
        return cls(xi, kperp, True)

    @property
    def omega(self):
        f = np.asarray(self.frequency)
        return 1j * f if self.imaginary_axis else f


# ---------------------------------------------------------------------------
# array kernels

def kz_real(eps, omega, kperp):
    """Branch with Im >= 0 (and Re >= 0 for a real positive radicand)."""
    rad = np.asarray(eps * (omega / C) ** 2 - kperp**2, dtype=complex)
    kz = np.sqrt(rad)
    return np.where(kz.imag < 0, -kz, kz)


def q_imag(eps, xi, kperp):
    return np.sqrt(eps * (xi / C) ** 2 + kperp**2)


def fresnel_kernel(pol, eps_a, kz_a, eps_b, kz_b):
    if pol is Polarization.TE:
        num, den = kz_a - kz_b, kz_a + kz_b
    else:
        num, den = eps_b * kz_a - eps_a * kz_b, eps_b * kz_a + eps_a * kz_b
    return num, den


def _cross(pol, eps_a, kz_a, eps_b, kz_b):
    if pol is Polarization.TE:
        return kz_a * np.conj(kz_b)
    return eps_b * kz_a * np.conj(eps_a * kz_b)


def fresnel_loss_kernel(pol, eps_a, kz_a, eps_b, kz_b):
    """``|den|^2 - |num|^2`` of `fresnel_kernel`, free of cancellation."""
    return 4.0 * _cross(pol, eps_a, kz_a, eps_b, kz_b).real


def fresnel_imag_kernel(pol, eps_a, kz_a, eps_b, kz_b):
    """``Im(num conj(den))`` of `fresnel_kernel`.

    Stays accurate when ``r`` is close to -1 or +1, where ``Im(num / den)``
    keeps only the digits left over from the order-one real part.
    """
    return 2.0 * _cross(pol, eps_a, kz_a, eps_b, kz_b).imag


def overlayer_kernel(r01, r12, factor):
    return (r01 + factor * r12) / (1.0 + factor * r01 * r12)


def overlayer_loss_kernel(r01, loss01, r12, loss12, factor, factor_loss):
    """``1 - |R|^2`` of the overlayer amplitude from the interface losses.

    With A = r01 and B = factor r12:
    |1 + AB|^2 - |A + B|^2 = (1 - |A|^2)(1 - |B|^2) - 4 Im A Im B.
    ``factor_loss = 1 - |factor|^2`` comes from ``expm1`` of the exponent.
    """
    f2 = np.abs(factor) ** 2
    b = factor * r12
    loss_b = factor_loss + f2 * loss12
    return ((loss01 * loss_b - 4.0 * r01.imag * b.imag)
            / np.abs(1.0 + r01 * b) ** 2)


def _divide(num, den, diagnostics=None):
    zero = den == 0
    if np.any(zero):
        # only reachable at isolated kinematic points of lossless media
        if diagnostics is not None:
            diagnostics["fresnel_zero_denominator"] = (
                diagnostics.get("fresnel_zero_denominator", 0) + int(np.count_nonzero(zero)))
        den = np.where(zero, np.finfo(float).tiny, den)
    return num / den


class StackEvaluator:
    """Reflection amplitudes of one reflector at a fixed set of frequencies.

    Permittivities are evaluated once per frequency; `amplitudes` then takes
    flat arrays of (frequency index, kperp) pairs. ``eta`` adds a relative
    imaginary part to the frequency at which the *permittivities* are
    evaluated (real axis only); kinematics stay at the real frequency.
    """

    def __init__(self, reflector, frequencies, imaginary_axis, eta=0.0, diagnostics=None):
        if isinstance(reflector, Overlayer) and reflector.layer == reflector.substrate:
            reflector = HalfSpace(reflector.layer)
        self.reflector = reflector
        self.freq = np.asarray(frequencies, dtype=float)
        self.imag = imaginary_axis
        self.diagnostics = diagnostics
        self.ideal = is_ideal(reflector)
        self._eps = {}
        if not self.ideal:
            for m in materials_of(reflector):
                if id(m) in self._eps or isinstance(m, IdealMirror):
                    continue
                if imaginary_axis:
                    self._eps[id(m)] = m.epsilon_imag(self.freq)
                else:
                    w = self.freq * (1 + 1j * eta) if eta else self.freq
                    self._eps[id(m)] = m.epsilon(w)

    def _wavevector(self, model, idx, kperp):
        if isinstance(model, Vacuum):
            eps = 1.0
        else:
            eps = self._eps[id(model)][idx]
        f = self.freq[idx]
        kz = q_imag(eps, f, kperp) if self.imag else kz_real(eps, f, kperp)
        return eps, kz

    def _cached(self, model, idx, kperp, cache):
        if id(model) not in cache:
            cache[id(model)] = self._wavevector(model, idx, kperp)
        return cache[id(model)]

    def _interface(self, pol, a, b, idx, kperp, cache, loss):
        n = len(idx)
        if isinstance(b, IdealMirror):
            return np.full(n, -1.0 if pol is Polarization.TE else 1.0), np.zeros(n)
        if a is b or a == b:
            return np.zeros(n), np.ones(n)
        ea, ka = self._cached(a, idx, kperp, cache)
        eb, kb = self._cached(b, idx, kperp, cache)
        num, den = fresnel_kernel(pol, ea, ka, eb, kb)
        r = _divide(num, den, self.diagnostics)
        if not self.imag:
            # the small imaginary part of a near-unit amplitude sets the
            # phase of multilayer products; take it from the cross term
            r = r.real + 1j * _divide(fresnel_imag_kernel(pol, ea, ka, eb, kb),
                                      np.abs(den) ** 2)
        if not loss:
            return r, None
        return r, fresnel_loss_kernel(pol, ea, ka, eb, kb) / np.abs(den) ** 2

    def _evaluate(self, idx, kperp, loss):
        idx = np.asarray(idx)
        kperp = np.asarray(kperp, dtype=float)
        dtype = float if self.imag else complex
        n = len(idx)
        if self.ideal:
            amps = (-np.ones(n, dtype=dtype), np.ones(n, dtype=dtype))
            return amps, (np.zeros(n), np.zeros(n))
        r = self.reflector
        cache = {}
        amps, losses = [], []
        for pol in POLARIZATIONS:
            if isinstance(r, HalfSpace):
                amp, ls = self._interface(pol, VACUUM, r.material, idx, kperp, cache, loss)
            else:
                r01, l01 = self._interface(pol, VACUUM, r.layer, idx, kperp, cache, loss)
                r12, l12 = self._interface(pol, r.layer, r.substrate, idx, kperp, cache, loss)
                _, kl = self._cached(r.layer, idx, kperp, cache)
                if self.imag:
                    factor = np.exp(-2.0 * r.thickness * kl)
                else:
                    factor = np.exp(2j * r.thickness * kl)
                amp = overlayer_kernel(r01, r12, factor)
                ls = None
                if loss:
                    decay = -4.0 * r.thickness * (kl if self.imag else kl.imag)
                    ls = overlayer_loss_kernel(r01, l01, r12, l12, factor, -np.expm1(decay))
            amps.append(np.asarray(amp, dtype=dtype))
            losses.append(ls)
        return tuple(amps), tuple(losses)

    def amplitudes(self, idx, kperp):
        """Return ``(R_TE, R_TM)`` arrays for the points ``(freq[idx], kperp)``."""
        return self._evaluate(idx, kperp, False)[0]

    def amplitudes_and_losses(self, idx, kperp):
        """``((R_TE, R_TM), (1 - |R_TE|^2, 1 - |R_TM|^2))``.

        The losses are assembled from interface terms rather than by
        subtraction, so they stay accurate when ``|R|`` is close to 1.
        """
        return self._evaluate(idx, kperp, True)


def _point_arrays(kin):
    f = np.atleast_1d(np.asarray(kin.frequency, dtype=float))
    k = np.atleast_1d(np.asarray(kin.kperp, dtype=float))
    f, k = np.broadcast_arrays(f, k)
    return f.ravel(), k.ravel(), np.broadcast_shapes(np.shape(kin.frequency), np.shape(kin.kperp))


def _reshape(values, shape):
    return values.reshape(shape) if shape else values[0].item()


# ---------------------------------------------------------------------------
# public operations

def normal_wavevector(material, kin):
    """k_z in the medium: complex with Im >= 0 on the real axis, ``i q`` on the imaginary axis."""
    f, k, shape = _point_arrays(kin)
    if kin.imaginary_axis:
        kz = 1j * q_imag(material.epsilon_imag(f), f, k)
    else:
        kz = kz_real(material.epsilon(f), f, k)
    return _reshape(kz, shape)


def fresnel(pol, a, b, kin, diagnostics=None):
    """Single-interface amplitude r^(ab) for light incident from medium ``a``."""
    f, k, shape = _point_arrays(kin)
    if isinstance(b, IdealMirror):
        val = np.full(len(f), -1.0 if pol is Polarization.TE else 1.0)
    elif a == b:
        val = np.zeros(len(f))
    elif kin.imaginary_axis:
        ea, eb = a.epsilon_imag(f), b.epsilon_imag(f)
        num, den = fresnel_kernel(pol, ea, q_imag(ea, f, k), eb, q_imag(eb, f, k))
        val = _divide(num, den, diagnostics)
    else:
        ea, eb = a.epsilon(f), b.epsilon(f)
        num, den = fresnel_kernel(pol, ea, kz_real(ea, f, k), eb, kz_real(eb, f, k))
        val = _divide(num, den, diagnostics)
    if not kin.imaginary_axis:
        val = np.asarray(val, dtype=complex)
    return _reshape(np.asarray(val), shape)


def reflection_amplitude(reflector, pol, kin, diagnostics=None):
    """Reflection amplitude of a reflector seen from the vacuum gap."""
    f, k, shape = _point_arrays(kin)
    ev = StackEvaluator(reflector, f, kin.imaginary_axis, diagnostics=diagnostics)
    te, tm = ev.amplitudes(np.arange(len(f)), k)
    return _reshape(te if pol is Polarization.TE else tm, shape)


def static_reflection(reflector, pol, kperp):
    """Amplitude in the limit xi -> 0 on the imaginary axis (real, per kperp).

    Uses the analytic small-xi behaviour of each model (see
    `materials.StaticLimit`): Drude metals give r_TE -> 0 and r_TM -> 1,
    plasma metals keep a finite r_TE.
    """
    kperp = np.asarray(kperp, dtype=float)
    if is_ideal(reflector):
        return np.full(kperp.shape, -1.0 if pol is Polarization.TE else 1.0)

    def q(model):
        lim = model.static_limit()
        if lim.order == 2:
            return np.sqrt(kperp**2 + lim.coefficient / C**2)
        return kperp

    def interface(a, b):
        if isinstance(b, IdealMirror):
            return np.full(kperp.shape, -1.0 if pol is Polarization.TE else 1.0)
        qa, qb = q(a), q(b)
        if pol is Polarization.TE:
            return _static_ratio(qa - qb, qa + qb)
        la, lb = a.static_limit(), b.static_limit()
        if la.order == lb.order:
            rho = lb.coefficient / la.coefficient
            return _static_ratio(rho * qa - qb, rho * qa + qb)
        return np.full(kperp.shape, 1.0 if lb.order > la.order else -1.0)

    if isinstance(reflector, HalfSpace):
        return interface(VACUUM, reflector.material)
    r01 = interface(VACUUM, reflector.layer)
    r12 = interface(reflector.layer, reflector.substrate)
    return overlayer_kernel(r01, r12, np.exp(-2.0 * reflector.thickness * q(reflector.layer)))


def _static_ratio(num, den):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den == 0, 0.0, num / np.where(den == 0, 1.0, den))
