"""Command line entry point: ``kgspectral <experiment> --config FILE [--output DIR] [--seed N]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, Experiment, ExperimentConfig, load_config
from .experiments import EXIT_CONFIG, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kgspectral",
                                 description="Damped Klein-Gordon experiments on compact Lie groups")
    sub = ap.add_subparsers(dest="command", required=True)
    for exp in Experiment:
        p = sub.add_parser(exp.command, help=f"run the {exp.value} experiment")
        p.add_argument("--config", help="YAML config file (defaults apply when omitted)")
        p.add_argument("--output", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="data seed (overrides the config)")
        p.add_argument("--quiet", action="store_true", help="only report errors")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    experiment = Experiment.from_command(args.command)
    try:
        cfg = load_config(args.config, experiment) if args.config else ExperimentConfig(experiment)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            cfg = cfg.with_seed(args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = run(cfg, args.output)
    if not args.quiet:
        out = args.output or cfg.output or "results"
        print(f"[{experiment.command}] status={status} -> {out}/summary.json")
    return status


if __name__ == "__main__":
    sys.exit(main())
