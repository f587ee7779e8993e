"""Flat ``key = value`` run configuration.

One setting per line; ``#`` at the start of a line or after whitespace
starts a comment. ``key: value`` is accepted as well. A parameter is either fixed (``a_nm = 300``) or swept::

    sweep.a_nm = 200:1000:17      # start:stop:count, endpoints included
    sweep.T1_K = 300, 325, 350    # explicit list

Sweeps are nested in the order they are declared (first = outermost).
``figure = fig2`` (or ``fig3``) loads a preset; explicit keys override it.
"""

import dataclasses
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .lifshitz import MatsubaraSpec
from .noneq import NeqQuadratureSpec

MODES = ("delta_f", "equilibrium", "neq_potential", "spectral", "diagnostics")
MODELS = ("drude", "plasma", "tabulated")
PAIRS = ("si_sector", "au_sector", "ideal_mirrors")
FORMATS = ("csv", "json")
MAX_SWEPT = 3

# sweepable physical parameters, in canonical output order
PARAMETERS = ("a_nm", "T1_K", "T2_K", "w_nm", "R_um", "omega_rad_s", "model")
_DEFAULTS = {"T2_K": 300.0, "w_nm": 100.0, "R_um": 150.0, "model": "drude"}

PRESETS = {
    "fig2": {"mode": "delta_f", "model": "drude", "R_um": "150", "w_nm": "100",
             "T2_K": "300", "sweep.T1_K": "300, 325, 350", "sweep.a_nm": "200:1000:17"},
    "fig3": {"mode": "delta_f", "model": "plasma", "R_um": "150", "w_nm": "100",
             "T2_K": "300", "sweep.T1_K": "300, 325, 350", "sweep.a_nm": "200:1000:17"},
}

_MATSUBARA_KEYS = ("relative_tolerance", "max_terms")
_NEQ_KEYS = ("relative_tolerance", "omega_window_factor", "dissipation_floor", "max_subdivisions")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: tuple                 # fixed parameters, ((name, value), ...)
    sweep: tuple                  # ((name, (v0, v1, ...)), ...) in nesting order
    pair: str = "si_sector"
    au_table: str = ""
    si_table: str = ""
    matsubara: MatsubaraSpec = field(default_factory=MatsubaraSpec)
    neq: NeqQuadratureSpec = field(default_factory=NeqQuadratureSpec)
    output: str = "-"
    format: str = "csv"

    def fixed(self):
        return dict(self.params)

    def points(self):
        """Grid points as dicts over `PARAMETERS`, in lexicographic sweep order."""
        base = self.fixed()
        names = [n for n, _ in self.sweep]
        grids = [vals for _, vals in self.sweep]
        out = []
        for idx in np.ndindex(*[len(g) for g in grids]) if grids else [()]:
            p = dict(base)
            for n, g, i in zip(names, grids, idx):
                p[n] = g[i]
            out.append({k: p[k] for k in PARAMETERS if k in p})
        return out

    def with_output(self, output=None, format=None):
        kw = {}
        if output is not None:
            kw["output"] = output
        if format is not None:
            _choice("format", format, FORMATS)
            kw["format"] = format
        return dataclasses.replace(self, **kw)

    def to_text(self):
        """Resolved configuration.

        The output destination is left out, so identical runs write identical
        bytes wherever they go; ``parse_run_config(cfg.to_text())`` equals
        ``cfg`` up to ``output``.
        """
        lines = [f"mode = {self.mode}"]
        fixed = self.fixed()
        for name in PARAMETERS:
            if name in fixed:
                lines.append(f"{name} = {_fmt(fixed[name])}")
        for name, vals in self.sweep:
            lines.append(f"sweep.{name} = {', '.join(_fmt(v) for v in vals)}")
        lines.append(f"pair = {self.pair}")
        lines.append(f"au_table = {self.au_table}")
        lines.append(f"si_table = {self.si_table}")
        m = self.matsubara
        lines.append(f"matsubara.relative_tolerance = {m.relative_tolerance!r}")
        lines.append(f"matsubara.max_terms = {'auto' if m.max_terms is None else m.max_terms}")
        for k in _NEQ_KEYS:
            lines.append(f"neq.{k} = {getattr(self.neq, k)!r}")
        lines.append(f"format = {self.format}")
        return "\n".join(lines) + "\n"


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def _choice(key, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{key}: '{value}' is not one of {', '.join(allowed)}")
    return value


def _positive(key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: '{text}' is not a number") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"{key}: value must be finite and > 0, got {text}")
    return v


def _param_value(name, text):
    if name == "model":
        return _choice(name, text, MODELS)
    return _positive(name, text)


def _sweep_values(name, text):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or name == "model":
            raise ConfigError(f"sweep.{name}: expected start:stop:count, got '{text}'")
        start, stop = _positive(name, parts[0]), _positive(name, parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise ConfigError(f"sweep.{name}: count '{parts[2]}' is not an integer") from None
        if count < 1:
            raise ConfigError(f"sweep.{name}: count must be >= 1")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"sweep.{name}: empty value list")
    return tuple(_param_value(name, s) for s in items)


def _split_line(line, lineno):
    if "=" in line:
        key, _, value = line.partition("=")
    elif ":" in line:
        key, _, value = line.partition(":")
    else:
        raise ConfigError(f"line {lineno}: expected 'key = value', got '{line}'")
    return key.strip(), value.strip()


def _read_pairs(text):
    pairs = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = re.split(r"\s#", raw, maxsplit=1)[0].strip()
        if not line or line.startswith("#"):
            continue
        key, value = _split_line(line, lineno)
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key '{key}' (first on line {seen[key]})")
        seen[key] = lineno
        pairs.append((key, value, lineno))
    return pairs


def parse_run_config(source, preset=None):
    """Parse and validate configuration text into a `RunConfig`.

    ``preset`` names a figure preset applied before the text; it takes
    precedence over a ``figure`` key in the text.
    """
    pairs = _read_pairs(source)
    figure = preset
    for key, value, lineno in pairs:
        if key == "figure" and preset is None:
            figure = value
    entries = {}
    if figure is not None:
        _choice("figure", figure, tuple(PRESETS))
        entries.update({k: (v, f"preset {figure}") for k, v in PRESETS[figure].items()})
    for key, value, lineno in pairs:
        if key == "figure":
            continue
        # a fixed value replaces a preset sweep of the same parameter and vice versa
        other = f"sweep.{key}" if key in PARAMETERS else key[6:] if key.startswith("sweep.") else None
        if other in entries and entries[other][1].startswith("preset"):
            del entries[other]
        entries[key] = (value, f"line {lineno}")
    return _build(entries)


def _build(entries):
    kw = {}
    params = {}
    sweep = []
    mats, neqs = {}, {}
    for key, (value, where) in entries.items():
        try:
            if key == "mode":
                kw["mode"] = _choice(key, value, MODES)
            elif key == "pair":
                kw["pair"] = _choice(key, value, PAIRS)
            elif key in ("au_table", "si_table", "output"):
                kw[key] = value
            elif key == "format":
                kw["format"] = _choice(key, value, FORMATS)
            elif key in PARAMETERS:
                params[key] = _param_value(key, value)
            elif key.startswith("sweep."):
                name = key[6:]
                if name not in PARAMETERS:
                    raise ConfigError(f"unknown sweep parameter '{name}'")
                sweep.append((name, _sweep_values(name, value)))
            elif key.startswith("matsubara.") and key[10:] in _MATSUBARA_KEYS:
                mats[key[10:]] = value
            elif key.startswith("neq.") and key[4:] in _NEQ_KEYS:
                neqs[key[4:]] = value
            else:
                raise ConfigError(f"unknown key '{key}'")
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    swept = [n for n, _ in sweep]
    mode = kw.get("mode")
    required = ["a_nm", "T1_K"] + (["omega_rad_s"] if mode == "spectral" else [])
    missing = (["mode"] if mode is None else []) + [
        n for n in required if n not in params and n not in swept]
    if missing:
        raise ConfigError(_missing(missing))
    if len(swept) > MAX_SWEPT:
        raise ConfigError(f"at most {MAX_SWEPT} swept parameters, got {len(swept)}")
    for n in swept:
        if n in params:
            raise ConfigError(f"'{n}' is both fixed and swept")
    for n, v in _DEFAULTS.items():
        if n not in params and n not in swept:
            params[n] = v
    if kw["mode"] != "spectral" and ("omega_rad_s" in params or "omega_rad_s" in swept):
        raise ConfigError("omega_rad_s is only used in spectral mode")

    kw["matsubara"] = _matsubara(mats)
    kw["neq"] = _neq(neqs)
    order = {n: i for i, n in enumerate(PARAMETERS)}
    kw["params"] = tuple(sorted(params.items(), key=lambda kv: order[kv[0]]))
    kw["sweep"] = tuple(sweep)
    return RunConfig(**kw)


def _missing(names):
    return "missing required field(s): " + ", ".join(names)


def _matsubara(raw):
    try:
        rtol = float(raw.get("relative_tolerance", MatsubaraSpec.relative_tolerance))
        mt = raw.get("max_terms", "auto")
        max_terms = None if mt in ("auto", None) else int(mt)
        return MatsubaraSpec(rtol, max_terms)
    except ValueError as exc:
        raise ConfigError(f"matsubara: {exc}") from None


def _neq(raw):
    try:
        kw = {k: float(v) for k, v in raw.items()}
        if "max_subdivisions" in kw:
            kw["max_subdivisions"] = int(raw["max_subdivisions"])
        return NeqQuadratureSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"neq: {exc}") from None


def strip_preamble(text):
    """Recover the configuration text from an output file's ``# `` preamble."""
    lines = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        lines.append(line[2:] if line.startswith("# ") else line[1:])
    return "\n".join(lines) + "\n"
