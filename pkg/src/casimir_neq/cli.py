"""``casimir-neq run <config-file> [--preset fig2|fig3] [--workers N] [--out PATH] [--format csv|json]``

Exit status: 0 on success, 1 on configuration errors, 2 when some grid
points failed (their rows carry an ``error_label``).
"""

import argparse
import os
import sys

from .config import PRESETS, ConfigError, parse_run_config
from .sweep import emit_output, failed, gnuplot_script, run_sweep


def build_parser():
    parser = argparse.ArgumentParser(prog="casimir-neq",
                                     description="Casimir-Lifshitz force sweeps")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a configuration file")
    run.add_argument("config", nargs="?", help="key = value configuration file")
    run.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    run.add_argument("--out", help="output path ('-' for stdout)")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--gnuplot", metavar="PATH", help="also write a gnuplot script stub")
    return parser


def run(args):
    if args.config is None and args.preset is None:
        print("error: give a configuration file, a --preset, or both", file=sys.stderr)
        return 1
    try:
        text = ""
        if args.config is not None:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_run_config(text, preset=args.preset).with_output(args.out, args.format)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return 1

    rows = run_sweep(cfg, workers=args.workers)
    emit_output(rows, cfg)
    if args.gnuplot:
        with open(args.gnuplot, "w", encoding="utf-8") as fh:
            fh.write(gnuplot_script(cfg, cfg.output))
    n = failed(rows)
    if n:
        print(f"{n} of {len(rows)} grid points failed", file=sys.stderr)
        return 2
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
