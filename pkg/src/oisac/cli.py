"""Command-line entry point.

Usage: oisac <subcommand> --config <file> --seed <u64> --out <dir>

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
import yaml

from . import harness, optics, sensing
from .geometry import ConfigError
from .layout_opt import InfeasibleThresholdError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oisac",
        description="Two-phase LED optical ISAC simulator",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in harness.EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (u64)")
        p.add_argument("--out", default="out", help="output directory")
    return parser


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        harness.run_experiment(args.experiment, cfg, args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (
        InfeasibleThresholdError,
        optics.TotalInternalReflectionError,
        optics.QuadratureError,
        sensing.InsufficientIlluminationError,
        sensing.RankDeficiencyError,
        harness.NotBracketedError,
        np.linalg.LinAlgError,
        ArithmeticError,
        ValueError,
    ) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
