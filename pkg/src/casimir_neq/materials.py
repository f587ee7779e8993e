"""Dielectric response of the materials in the setup.

Each model gives the complex permittivity on the real frequency axis and the
real permittivity on the imaginary axis, ``eps(i xi)``. Frequencies are
angular frequencies in rad/s throughout.

Tabulated data are continued to the imaginary axis with the Kramers-Kronig
relation

    eps(i xi) = 1 + (2/pi) int_0^inf dw w Im eps(w) / (w^2 + xi^2)

where the Drude extrapolation below the table and an ``w**-3`` tail above it
are integrated in closed form.
"""

import io
import functools
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import C, EV_TO_RAD_S
from .quadrature import integrate_batch

DATA_DIR_ENV = "CASIMIR_NEQ_DATA_DIR"


class OpticalDataError(ValueError):
    """Malformed optical data file."""


@dataclass(frozen=True)
class DrudeParams:
    """Free-electron parameters; ``relaxation_rate == 0`` is the plasma model."""

    plasma_frequency: float
    relaxation_rate: float = 0.0

    def __post_init__(self):
        if not self.plasma_frequency > 0:
            raise ValueError(f"plasma_frequency must be > 0, got {self.plasma_frequency}")
        if not self.relaxation_rate >= 0:
            raise ValueError(f"relaxation_rate must be >= 0, got {self.relaxation_rate}")

    @classmethod
    def from_ev(cls, plasma_ev, relaxation_ev=0.0):
        return cls(plasma_ev * EV_TO_RAD_S, relaxation_ev * EV_TO_RAD_S)

    def without_relaxation(self):
        return DrudeParams(self.plasma_frequency, 0.0)

    def epsilon(self, omega):
        omega = np.asarray(omega)
        return 1.0 - self.plasma_frequency**2 / (omega * (omega + 1j * self.relaxation_rate))

    def epsilon_imag(self, xi):
        xi = np.asarray(xi, dtype=float)
        return 1.0 + self.plasma_frequency**2 / (xi * (xi + self.relaxation_rate))


#: Au parameters used for the low-frequency extrapolation (8.9 eV, 0.035 eV).
GOLD_DRUDE = DrudeParams.from_ev(8.9, 0.035)

#: Free carriers of high-resistivity Si (about 10 kOhm cm, mobility-limited rate).
SILICON_CARRIERS = DrudeParams(7.36e10, 4.8e12)


@dataclass(frozen=True)
class StaticLimit:
    """Behaviour of eps(i xi) as xi -> 0: ``eps ~ coefficient / xi**order``.

    ``order`` 0 is a dielectric with static permittivity ``coefficient``;
    1 is a Drude conductor; 2 is a plasma (``coefficient = wp**2``).
    ``order = inf`` marks the ideal mirror.
    """

    order: float
    coefficient: float


def _check_positive(name, value):
    value = np.asarray(value)
    if np.any(~(np.real(value) > 0)):
        raise ValueError(f"{name} must be > 0")


class DielectricModel:
    """Base class; concrete models are immutable."""

    lossless = False

    def epsilon(self, omega):
        """eps on the real axis. ``omega`` may carry a small positive imaginary part."""
        raise NotImplementedError

    def epsilon_imag(self, xi):
        raise NotImplementedError

    def static_limit(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Vacuum(DielectricModel):
    def epsilon(self, omega):
        return np.ones_like(np.asarray(omega), dtype=complex)

    def epsilon_imag(self, xi):
        return np.ones_like(np.asarray(xi), dtype=float)

    def static_limit(self):
        return StaticLimit(0, 1.0)


@dataclass(frozen=True)
class Drude(DielectricModel):
    params: DrudeParams = GOLD_DRUDE

    def __post_init__(self):
        if self.params.relaxation_rate == 0:
            raise ValueError("Drude model needs relaxation_rate > 0; use Plasma")

    def epsilon(self, omega):
        return self.params.epsilon(omega)

    def epsilon_imag(self, xi):
        return self.params.epsilon_imag(xi)

    def static_limit(self):
        p = self.params
        return StaticLimit(1, p.plasma_frequency**2 / p.relaxation_rate)


@dataclass(frozen=True)
class Plasma(DielectricModel):
    params: DrudeParams = field(default_factory=GOLD_DRUDE.without_relaxation)

    lossless = True

    def __post_init__(self):
        if self.params.relaxation_rate != 0:
            raise ValueError("Plasma model requires relaxation_rate == 0")

    def epsilon(self, omega):
        return self.params.epsilon(omega)

    def epsilon_imag(self, xi):
        return self.params.epsilon_imag(xi)

    def static_limit(self):
        return StaticLimit(2, self.params.plasma_frequency**2)


@dataclass(frozen=True)
class IdealMirror(DielectricModel):
    """Perfect conductor: |eps| -> infinity, r_TE = -1, r_TM = +1."""

    lossless = True

    def epsilon(self, omega):
        return np.full(np.shape(omega), complex(math.inf, 0.0))

    def epsilon_imag(self, xi):
        return np.full(np.shape(xi), math.inf)

    def static_limit(self):
        return StaticLimit(math.inf, 1.0)


@dataclass(frozen=True, eq=False)
class OpticalTable:
    """Tabulated permittivity on the real axis (rad/s, ascending)."""

    omega: np.ndarray
    eps_real: np.ndarray
    eps_imag: np.ndarray
    low_freq_model: DrudeParams
    provenance: str = ""

    def __post_init__(self):
        for name in ("omega", "eps_real", "eps_imag"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        w = self.omega
        if w.ndim != 1 or len(w) < 2:
            raise OpticalDataError("an optical table needs at least 2 rows")
        if not (len(self.eps_real) == len(self.eps_imag) == len(w)):
            raise OpticalDataError("column lengths differ")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(self.eps_real)) \
                or not np.all(np.isfinite(self.eps_imag)):
            raise OpticalDataError("non-finite entries in optical table")
        if w[0] <= 0 or np.any(np.diff(w) <= 0):
            raise OpticalDataError("frequencies must be positive and strictly increasing")
        bad = np.nonzero(self.eps_imag < 0)[0]
        if len(bad):
            raise OpticalDataError(f"negative Im eps (row {bad[0] + 1}) violates passivity")

    def __len__(self):
        return len(self.omega)


@dataclass(frozen=True, eq=False)
class Tabulated(DielectricModel):
    """Tabulated data with Drude continuation below and eps -> 1 above.

    Below the first row the permittivity is the Drude form of
    ``table.low_freq_model`` plus a constant real offset (core polarisation)
    that makes Re eps continuous at the first row. Above the last row
    ``Im eps ~ w**-3`` and ``Re eps - 1 ~ w**-2``.
    """

    table: OpticalTable

    def __post_init__(self):
        t = self.table
        object.__setattr__(self, "_logw", np.log(t.omega))
        pos = t.eps_imag > 0
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "_logim", np.where(pos, np.log(np.where(pos, t.eps_imag, 1.0)),
                                                        -np.inf))
        d0 = complex(t.low_freq_model.epsilon(t.omega[0]))
        object.__setattr__(self, "_offset", t.eps_real[0] - d0.real)

    @property
    def lossless(self):
        return self.table.low_freq_model.relaxation_rate == 0

    def _interp(self, w):
        t = self.table
        lw = np.log(w)
        i = np.clip(np.searchsorted(self._logw, lw) - 1, 0, len(t.omega) - 2)
        x0, x1 = self._logw[i], self._logw[i + 1]
        s = (lw - x0) / (x1 - x0)
        re = t.eps_real[i] + s * (t.eps_real[i + 1] - t.eps_real[i])
        l0, l1 = self._logim[i], self._logim[i + 1]
        both = np.isfinite(l0) & np.isfinite(l1)
        with np.errstate(invalid="ignore"):
            im_log = np.exp(l0 + s * (l1 - l0))
        im_lin = t.eps_imag[i] + s * (t.eps_imag[i + 1] - t.eps_imag[i])
        return re, np.where(both, im_log, im_lin)

    def epsilon(self, omega):
        t = self.table
        omega = np.asarray(omega)
        wr = np.real(omega).astype(float)
        out = np.empty(np.shape(omega), dtype=complex)
        lo = wr < t.omega[0]
        hi = wr > t.omega[-1]
        mid = ~(lo | hi)
        if np.any(mid):
            re, im = self._interp(wr[mid])
            out[mid] = re + 1j * im
        if np.any(lo):
            out[lo] = t.low_freq_model.epsilon(omega[lo]) + self._offset
        if np.any(hi):
            r = t.omega[-1] / wr[hi]
            out[hi] = 1.0 + (t.eps_real[-1] - 1.0) * r**2 + 1j * t.eps_imag[-1] * r**3
        return out

    def _kk_table_part(self, xi):
        """(2/pi) int over the table range, adaptive in log frequency."""
        lw = self._logw

        def integrand(y, owner):
            w = np.exp(y)
            _, im = self._interp(w)
            return w * w * im / (w * w + xi[owner] ** 2)

        edges = np.broadcast_to(lw, (len(xi), len(lw)))
        res = integrate_batch(integrand, edges, rtol=1e-10, max_panels=4 * len(lw))
        return (2.0 / np.pi) * res.value[:, 0]

    def epsilon_imag(self, xi):
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi).ravel()
        t = self.table
        p = t.low_freq_model
        w0, wn = t.omega[0], t.omega[-1]
        val = 1.0 + _drude_kk_below(p, w0, flat) + self._kk_table_part(flat) \
            + _cubic_tail_kk(t.eps_imag[-1], wn, flat)
        return val.reshape(np.shape(xi)) if np.ndim(xi) else float(val[0])

    def static_limit(self):
        p = self.table.low_freq_model
        if p.relaxation_rate == 0:
            return StaticLimit(2, p.plasma_frequency**2)
        return StaticLimit(1, p.plasma_frequency**2 / p.relaxation_rate)


def _drude_kk_below(p, w0, xi):
    """(2/pi) int_0^w0 dw w Im eps_Drude(w) / (w^2 + xi^2)."""
    wp2, g = p.plasma_frequency**2, p.relaxation_rate
    if g == 0:
        # Im eps has a delta function at w = 0 of weight (pi/2) wp^2
        return wp2 / xi**2

    def f(s):
        return np.arctan(w0 / s) / s

    near = np.abs(xi - g) < 1e-6 * xi
    safe = np.where(near, 2 * xi + 1.0, xi)
    generic = (f(g) - f(safe)) / (safe**2 - g**2)
    m = 0.5 * (xi + g)
    dfds = -w0 / (m * (m * m + w0 * w0)) - np.arctan(w0 / m) / m**2
    limit = -dfds / (2 * m)
    return (2.0 / np.pi) * wp2 * g * np.where(near, limit, generic)


def _cubic_tail_kk(im_last, w_last, xi):
    """(2/pi) int_{wN}^inf dw w [im_last (wN/w)^3] / (w^2 + xi^2)."""
    # int_W^inf dw / (w^2 (w^2 + xi^2)) = (1 - atan(s)/s) / (xi^2 W),  s = xi/W
    s = xi / w_last
    small = s < 1e-3
    ss = np.where(small, 1.0, s)
    integral = np.where(small, (1 / 3 - s**2 / 5 + s**4 / 7) / w_last**3,
                        (1.0 - np.arctan(ss) / ss) / (ss * ss * w_last**3))
    return (2.0 / np.pi) * im_last * w_last**3 * integral


# ---------------------------------------------------------------------------
# public operations

def permittivity_real_axis(model, omega):
    """Complex eps(omega) for omega > 0 (rad/s)."""
    _check_positive("omega", omega)
    eps = model.epsilon(omega)
    return eps if np.ndim(omega) else complex(eps)


def permittivity_imag_axis(model, xi):
    """Real eps(i xi) for xi > 0 (rad/s)."""
    _check_positive("xi", xi)
    eps = model.epsilon_imag(xi)
    return eps if np.ndim(xi) else float(eps)


def penetration_depth(model, omega):
    """Field-amplitude decay length c / (omega Im sqrt(eps)) in metres.

    Transparent (lossless, eps > 0) media give ``inf``.
    """
    _check_positive("omega", omega)
    eps = np.asarray(model.epsilon(omega), dtype=complex)
    eps = eps.real + 1j * np.abs(eps.imag)  # Im eps >= 0; also drops a -0.0
    n_im = np.sqrt(eps).imag
    with np.errstate(divide="ignore"):
        depth = np.where(n_im > 0, C / (omega * np.where(n_im > 0, n_im, 1.0)), np.inf)
    return depth if np.ndim(omega) else float(depth)


def ingest_optical_table(source, low_freq_model, format=None):
    """Parse an optical data file into an `OpticalTable`.

    ``source`` is a path, a string with the file contents, or a text stream.
    The file must declare ``units: eV|rad_s``; ``format: nk|eps`` may be given
    in the file or as the ``format`` argument.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and os.path.exists(source)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    header = {}
    rows = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line and not line[0].isdigit() and line[0] not in "+-.":
            key, _, val = line.partition(":")
            key = key.strip().lower()
            if key not in ("units", "format", "provenance"):
                raise OpticalDataError(f"line {lineno}: unknown header '{key}'")
            header[key] = val.strip()
            continue
        parts = line.split()
        if len(parts) != 3:
            raise OpticalDataError(f"line {lineno}: expected 3 columns, got {len(parts)}")
        try:
            triple = [float(p) for p in parts]
        except ValueError as exc:
            raise OpticalDataError(f"line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in triple):
            raise OpticalDataError(f"line {lineno}: non-finite value")
        rows.append((lineno, *triple))

    units = header.get("units")
    if units is None:
        raise OpticalDataError("missing 'units:' header (eV or rad_s)")
    if units not in ("eV", "rad_s"):
        raise OpticalDataError(f"unknown units '{units}'")
    fmt = header.get("format", format)
    if format is not None and fmt != format:
        raise OpticalDataError(f"file declares format '{fmt}', caller asked for '{format}'")
    if fmt not in ("nk", "eps"):
        raise OpticalDataError("missing or unknown 'format:' (nk or eps)")
    if len(rows) < 2:
        raise OpticalDataError("an optical table needs at least 2 rows")

    data = np.array([r[1:] for r in rows], dtype=float)
    linenos = [r[0] for r in rows]
    if fmt == "nk":
        bad = np.nonzero((data[:, 2] < 0) | (data[:, 1] < 0))[0]
        if len(bad):
            raise OpticalDataError(f"line {linenos[bad[0]]}: negative n or k")
        nk = data[:, 1] + 1j * data[:, 2]
        eps = nk * nk
        data[:, 1], data[:, 2] = eps.real, eps.imag
    bad = np.nonzero(data[:, 2] < 0)[0]
    if len(bad):
        raise OpticalDataError(f"line {linenos[bad[0]]}: negative Im eps")
    freq = data[:, 0] * (EV_TO_RAD_S if units == "eV" else 1.0)
    if np.any(freq <= 0):
        raise OpticalDataError("frequencies must be positive")

    uniq, inverse = np.unique(freq, return_inverse=True)
    counts = np.bincount(inverse)
    re = np.bincount(inverse, weights=data[:, 1]) / counts
    im = np.bincount(inverse, weights=data[:, 2]) / counts
    return OpticalTable(uniq, re, im, low_freq_model, header.get("provenance", ""))


def data_dir():
    override = os.environ.get(DATA_DIR_ENV)
    return Path(override) if override else Path(__file__).parent / "data"


def gold_table(path=None):
    return ingest_optical_table(Path(path) if path else data_dir() / "au_synthetic.txt",
                                GOLD_DRUDE)


def silicon_table(path=None):
    return ingest_optical_table(Path(path) if path else data_dir() / "si_synthetic.txt",
                                SILICON_CARRIERS)


@functools.lru_cache(maxsize=16)
def _tabulated(path, low_freq_model):
    # one instance per file, so equal choices compare equal
    return Tabulated(ingest_optical_table(Path(path), low_freq_model))


def gold(choice="drude", table_path=None):
    """Au for a model choice: ``drude``, ``plasma`` or ``tabulated``."""
    if choice == "drude":
        return Drude(GOLD_DRUDE)
    if choice == "plasma":
        return Plasma(GOLD_DRUDE.without_relaxation())
    if choice == "tabulated":
        path = Path(table_path) if table_path else data_dir() / "au_synthetic.txt"
        return _tabulated(str(path.resolve()), GOLD_DRUDE)
    raise ValueError(f"unknown gold model '{choice}'")


def silicon(table_path=None):
    path = Path(table_path) if table_path else data_dir() / "si_synthetic.txt"
    return _tabulated(str(path.resolve()), SILICON_CARRIERS)
