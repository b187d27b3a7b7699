"""Command line entry point: ``palh <experiment> --config <path> --out <dir>``."""

import argparse
import logging
import os
import sys
import time

from . import experiments as ex
from .config import default_config_text, load_config, parse_config
from .errors import ConfigError, PalhError

log = logging.getLogger("palh")

COMMANDS = {
    "waveguide": ("waveguide_compare", ex.run_waveguide_compare),
    "circular": ("circular_compare", ex.run_circular_compare),
    "thickness": ("thickness_table", ex.run_thickness_table),
    "scatter": ("scatter2d", ex.run_scatter2d),
}

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def build_parser():
    ap = argparse.ArgumentParser(prog="palh", description="Absorbing-layer Helmholtz experiments.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="experiment config file (defaults apply when omitted)")
    ap.add_argument("--out", help="output directory for CSV, JSON and field dumps")
    ap.add_argument("--print-config", action="store_true", help="print the default config and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _summary(command, result):
    if command == "thickness":
        for i, k in enumerate(result.ks):
            cells = " ".join(f"{e:.2e}" for e in result.errors[i])
            yield f"k={k:g}: {cells}"
        return
    if command == "scatter":
        rep = result.report
        yield f"{rep.label}: slope {rep.extras['slope']:.3f} per degree, final max error {rep.rows[-1][1]:.2e}"
        return
    for rep in result.values():
        yield f"{rep.label}: " + " ".join(f"N={N}:{e:.2e}" for N, e, _, _ in rep.rows)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    experiment, runner = COMMANDS[args.command]
    if args.print_config:
        print(default_config_text(experiment))
        return EXIT_OK
    try:
        ex.worker_count()
        cfg = load_config(args.config, experiment) if args.config else parse_config("", experiment)
        if not args.out:
            raise ConfigError("--out is required")
        os.makedirs(args.out, exist_ok=True)
    except ConfigError as exc:
        print(f"palh: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"palh: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        result = runner(cfg, args.out)
    except ConfigError as exc:
        print(f"palh: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PalhError, ArithmeticError, ValueError, MemoryError) as exc:
        print(f"palh: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for line in _summary(args.command, result):
        print(line)
    log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
