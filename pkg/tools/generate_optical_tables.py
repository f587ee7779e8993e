"""Regenerate the synthetic optical tables shipped in src/casimir_neq/data.

The tables are sampled from closed-form oscillator models (parameters below)
so that they are reproducible; they stand in for measured handbook data.
"""

from pathlib import Path

import numpy as np

from casimir_neq.constants import EV_TO_RAD_S
from casimir_neq.materials import GOLD_DRUDE, SILICON_CARRIERS

OUT = Path(__file__).resolve().parents[1] / "src" / "casimir_neq" / "data"

# (resonance eV, strength delta-eps, width eV)
AU_INTERBAND = [(2.9, 1.3, 0.9), (4.0, 2.0, 1.4), (6.5, 2.5, 2.5), (12.0, 1.5, 4.0)]
# (resonance rad/s, strength, width rad/s)
SI_OSCILLATORS = [(6.6e15, 10.835, 2.0e15), (3.0e16, 0.035, 9.0e15)]


def lorentz(w, w0, strength, width):
    return strength * w0**2 / (w0**2 - w**2 - 1j * width * w)


def gold_eps(w):
    eps = GOLD_DRUDE.epsilon(w)
    for e0, s, g in AU_INTERBAND:
        eps = eps + lorentz(w, e0 * EV_TO_RAD_S, s, g * EV_TO_RAD_S)
    return eps


def silicon_eps(w):
    eps = SILICON_CARRIERS.epsilon(w)
    for w0, s, g in SI_OSCILLATORS:
        eps = eps + lorentz(w, w0, s, g)
    return eps


def write(path, header, freq, eps):
    lines = header + [f"{f:.9e} {e.real:.9e} {e.imag:.9e}" for f, e in zip(freq, eps)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    w_au = np.logspace(13, 17, 321)
    write(OUT / "au_synthetic.txt", [
        "# Synthetic Au permittivity: Drude (wp = 8.9 eV, gamma = 0.035 eV) plus",
        "# Lorentz interband terms " + ", ".join(f"({a} eV, {b}, {c} eV)" for a, b, c in AU_INTERBAND),
        "# generated by tools/generate_optical_tables.py",
        "provenance: synthetic Drude-Lorentz Au model (not measured data)",
        "units: eV",
        "format: eps",
    ], w_au / EV_TO_RAD_S, gold_eps(w_au))

    w_si = np.logspace(11, 17, 601)
    write(OUT / "si_synthetic.txt", [
        "# Synthetic high-resistivity Si: free carriers (wp = 7.36e10 rad/s, gamma = 4.8e12 rad/s)",
        "# plus Lorentz terms " + ", ".join(f"({a:g} rad/s, {b}, {c:g} rad/s)" for a, b, c in SI_OSCILLATORS),
        "# static eps = 11.87; generated by tools/generate_optical_tables.py",
        "provenance: synthetic Lorentz-oscillator Si model (not measured data)",
        "units: rad_s",
        "format: eps",
    ], w_si, silicon_eps(w_si))


if __name__ == "__main__":
    main()
