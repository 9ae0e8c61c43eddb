"""Command line entry point: ``rsfde <subcommand> --config FILE [--out DIR]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import experiments as ex
from .config import CONFIG_SCHEMA, ConfigError, load_config

# subcommand -> experiment kinds it accepts (first is the default)
SUBCOMMANDS = {
    "solve": ("solve",),
    "convergence": ("convergence-temporal", "convergence-spatial"),
    "iterations": ("iterations",),
    "spectrum": ("spectrum",),
    "stability": ("stability",),
}


def _prepare(config, command):
    kinds = SUBCOMMANDS[command]
    if config.experiment.kind == "solve" and command != "solve":
        config.experiment.kind = kinds[0]
    if config.experiment.kind not in kinds:
        raise ConfigError(f"experiment kind {config.experiment.kind!r} does not match subcommand {command!r}")
    return config


def _run(command, config, out):
    written = []
    if command == "solve":
        summary, steps = ex.run_solve(config)
        written.append(ex.write_csv(summary, os.path.join(out, "solve_summary.csv")))
        written.append(ex.write_csv(steps, os.path.join(out, "solve_steps.csv")))
    elif command == "iterations":
        written.append(ex.write_csv(ex.run_iterations_experiment(config), os.path.join(out, "iterations.csv")))
    elif command == "convergence":
        rows = ex.run_convergence_experiment(config)
        written.append(ex.write_csv(rows, os.path.join(out, f"{config.experiment.kind}.csv")))
    elif command == "spectrum":
        spectrum, summary = ex.run_spectrum_experiment(config)
        written.append(ex.write_csv(spectrum, os.path.join(out, "spectrum.csv")))
        written.append(ex.write_csv(summary, os.path.join(out, "spectrum_summary.csv")))
    elif command == "stability":
        written.append(ex.write_csv(ex.run_stability_experiment(config), os.path.join(out, "stability.csv")))
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsfde", description="Riesz fractional diffusion experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment configuration")
        p.add_argument("--out", help="output directory (overrides output_dir in the config)")
        p.add_argument("--print-schema", action="store_true", help="print the configuration JSON schema and exit")
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"status": "error", "error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.print_schema:
        print(json.dumps(CONFIG_SCHEMA, indent=2))
        return 0
    if not args.config:
        return _fail("usage", "--config is required", 2)
    try:
        config = _prepare(load_config(args.config), args.command)
        out = args.out or config.output_dir
        written = _run(args.command, config, out)
    except (ConfigError, FileNotFoundError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)
    except Exception as exc:  # noqa: BLE001 -- every failure becomes one machine-readable line
        return _fail(type(exc).__name__, str(exc), 1)
    print(json.dumps({"status": "ok", "command": args.command, "files": written}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
