"""Grid evaluation and CSV/JSON emission for a `RunConfig`."""

import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .apparatus import ApparatusConfig, delta_F, filter_window_check, thermal_wavelength
from .constants import CONSTANTS_VERSION
from .lifshitz import EquilibriumConfig, lifshitz_sum, matsubara_frequency
from .materials import gold, silicon
from .noneq import (CHANNELS, ThermalPair, neq_antisymmetric_potential, neq_spectral_density,
                    neq_total_potential)
from .optics import ideal_mirror

FEMTO = 1e15

_INPUTS = {
    "delta_f": ("a_nm", "T1_K", "T2_K", "w_nm", "R_um", "model_label"),
    "equilibrium": ("a_nm", "T1_K", "w_nm", "model_label", "pair_label"),
    "neq_potential": ("a_nm", "T1_K", "T2_K", "w_nm", "model_label", "pair_label"),
    "spectral": ("a_nm", "T1_K", "T2_K", "w_nm", "omega_rad_s", "model_label", "pair_label"),
    "diagnostics": ("a_nm", "T1_K", "T2_K", "w_nm", "R_um", "model_label"),
}
_OUTPUTS = {
    "delta_f": ("delta_F_fN", "F_over_Au_fN", "F_over_Si_fN", "equilibrium_part_fN",
                "antisymmetric_part_fN", "residual_fN", "matsubara_terms_count",
                "panels_count", "neq_error_estimate_J_m2", "pfa_valid_flag"),
    "equilibrium": ("free_energy_J_m2", "pressure_N_m2", "zero_term_TE_J_m2",
                    "zero_term_TM_J_m2", "matsubara_terms_count", "panels_count"),
    "neq_potential": tuple(f"{c}_J_m2" for c in CHANNELS)
    + ("antisymmetric_part_J_m2", "total_potential_J_m2", "panels_count",
       "neq_error_estimate_J_m2", "regularized_flag"),
    "spectral": tuple(f"{c}_J_s_m2" for c in CHANNELS) + ("total_J_s_m2",),
    "diagnostics": ("delta_0_nm", "delta_T_nm", "window_lower_margin_ratio",
                    "window_upper_margin_ratio", "window_satisfied_flag",
                    "thermal_wavelength_um", "xi_1_rad_s", "pfa_valid_flag"),
}

#: unit suffixes allowed in column headers
UNIT_SUFFIXES = ("_nm", "_um", "_K", "_fN", "_J_m2", "_N_m2", "_J_s_m2", "_rad_s", "_count",
                 "_flag", "_ratio", "_label")


def columns(mode):
    return _INPUTS[mode] + _OUTPUTS[mode] + ("error_label",)


def _materials(cfg, model):
    au = gold(model, cfg.au_table or None)
    return au, silicon(cfg.si_table or None)


def _apparatus(cfg, p, temps):
    au, si = _materials(cfg, p["model"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ApparatusConfig(p["a_nm"] * 1e-9, temps, p["R_um"] * 1e-6, p["w_nm"] * 1e-9,
                               sphere_material=au, overlayer_material=au,
                               sector_Au_material=au, sector_Si_material=si)


def _pair(cfg, p, temps):
    if cfg.pair == "ideal_mirrors":
        return ideal_mirror(), ideal_mirror()
    app = _apparatus(cfg, p, temps)
    plate = app.plate_Si() if cfg.pair == "si_sector" else app.plate_Au()
    return plate, app.sphere()


def _outputs(cfg, p):
    mode = cfg.mode
    a = p["a_nm"] * 1e-9
    if mode == "equilibrium":
        plate, sphere = _pair(cfg, p, ThermalPair(p["T1_K"], p["T1_K"]))
        eq = EquilibriumConfig(plate, sphere, a, p["T1_K"])
        f = lifshitz_sum(eq, cfg.matsubara)
        pr = lifshitz_sum(eq, cfg.matsubara, derivative=True)
        return (f.value, pr.value, f.zero_term[0], f.zero_term[1], max(f.terms, pr.terms),
                f.panels + pr.panels)

    temps = ThermalPair(p["T1_K"], p["T2_K"])
    if mode == "delta_f":
        app = _apparatus(cfg, p, temps)
        r = delta_F(app, cfg.matsubara, cfg.neq)
        d = r.diagnostics
        return (r.delta_F * FEMTO, r.F_over_Au * FEMTO, r.F_over_Si * FEMTO,
                r.equilibrium_part * FEMTO, r.antisymmetric_part * FEMTO, r.residual * FEMTO,
                d["matsubara_terms"], d["panels"], d["neq_error"], int(app.pfa_valid))
    if mode == "neq_potential":
        plate, sphere = _pair(cfg, p, temps)
        br = neq_antisymmetric_potential(plate, sphere, a, temps, cfg.neq)
        total = neq_total_potential(plate, sphere, a, temps, cfg.matsubara, cfg.neq)
        return tuple(br.channels()) + (br.total, total, br.panels, br.error_estimate,
                                       int(br.regularized))
    if mode == "spectral":
        plate, sphere = _pair(cfg, p, temps)
        d = neq_spectral_density(plate, sphere, a, temps, p["omega_rad_s"], cfg.neq)
        return tuple(d.channels()) + (d.total,)
    # diagnostics
    app = _apparatus(cfg, p, temps)
    fw = filter_window_check(app)
    return (fw.delta_0 * 1e9, fw.delta_T * 1e9, fw.lower_margin, fw.upper_margin,
            int(fw.satisfied), thermal_wavelength(p["T1_K"]) * 1e6,
            matsubara_frequency(p["T1_K"], 1), int(app.pfa_valid))


def _clean(v):
    if hasattr(v, "item"):
        v = v.item()
    return v


def evaluate_point(cfg, point):
    """One output row (dict in column order); failures fill ``error_label``."""
    inputs = dict(point)
    inputs["model_label"] = point["model"]
    inputs["pair_label"] = cfg.pair
    row = {k: inputs[k] for k in _INPUTS[cfg.mode]}
    names = _OUTPUTS[cfg.mode]
    try:
        vals = _outputs(cfg, point)
        row.update({k: _clean(v) for k, v in zip(names, vals)})
        row["error_label"] = ""
    except (ArithmeticError, RuntimeError, ValueError, OSError) as exc:
        row.update({k: None for k in names})
        row["error_label"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return row


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(cfg, workers=1):
    """Evaluate every grid point; rows come back in grid order."""
    jobs = [(cfg, p) for p in cfg.points()]
    if workers <= 1 or len(jobs) <= 1:
        return [evaluate_point(c, p) for c, p in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_evaluate, jobs, chunksize=1))


def failed(rows):
    return sum(1 for r in rows if r["error_label"])


def preamble(cfg):
    """Comment block: the resolved configuration, then version lines."""
    lines = [f"# {line}" if line else "#" for line in cfg.to_text().splitlines()]
    lines.append(f"# # casimir-neq {__version__}")
    lines.append(f"# # constants: {CONSTANTS_VERSION}")
    return "\n".join(lines) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def render(rows, cfg, format="csv"):
    if not rows:
        raise ValueError("no rows to emit")
    if format == "json":
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(preamble(cfg))
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def emit_output(rows, cfg, path=None, format=None):
    """Write rows as CSV (with preamble) or JSON to ``path`` (``-`` = stdout)."""
    path = cfg.output if path is None else path
    text = render(rows, cfg, cfg.format if format is None else format)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def gnuplot_script(cfg, data_path):
    """Minimal gnuplot script plotting the first output column against ``a_nm``."""
    y = _OUTPUTS[cfg.mode][0]
    return "\n".join([
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set xlabel 'a (nm)'",
        f"set ylabel '{y}'",
        f"plot '{data_path}' using 'a_nm':'{y}' with linespoints",
        "",
    ])
