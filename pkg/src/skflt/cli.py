"""Command-line entry point.

Exit codes: 0 on success, 1 on a configuration or usage error, 2 when
``--check`` finds a threshold breach.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

from . import experiments as ex
from .cadlag_geometry import m2_distance, read_path_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BREACH = 2

# defaults used when no --config is given
DEFAULT_CONFIGS = {
    "marginal": {
        "experiment": "marginal",
        "tail": {"alpha": 0.7, "p": 1.0},
        "coefficients": {"kind": "deterministic", "coefficients": [1.0, 0.5, 0.25]},
        "n": 10000,
        "reps": 4000,
    },
    "truncation": {
        "experiment": "truncation",
        "tail": {"alpha": 0.7, "p": 1.0},
        "coefficients": {"kind": "geometric_random", "theta": 0.5, "weight_law": 1.0},
        "n": 5000,
        "reps": 200,
    },
    "dependence": {
        "experiment": "dependence",
        "tail": {"alpha": 1.0, "p": 0.5},
        "n": 2000,
        "reps": 2000,
    },
    "lemma": {"experiment": "lemma", "cases": 1000},
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skflt", description="Heavy-tailed moving-average simulation lab.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("marginal", "truncation", "dependence", "lemma"):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", help="CSV output path (default: config output_path, else stdout)")
        p.add_argument("--reps", type=int, help="replicate count (overrides the config)")
        p.add_argument("--check", action="store_true", help="exit 2 if an acceptance threshold is breached")
        if name == "lemma":
            p.add_argument("--cases", type=int, help="number of randomized instances")
    p = sub.add_parser("m2dist", help="M2 distance between two step paths stored as CSV")
    p.add_argument("first")
    p.add_argument("second")
    return parser


def _load(args) -> ex.ExperimentConfig:
    if args.config:
        cfg = ex.ExperimentConfig.from_json(args.config)
        if cfg.experiment != args.command:
            raise ex.ConfigError(f"config is for experiment {cfg.experiment!r}, not {args.command!r}")
    else:
        cfg = ex.ExperimentConfig.from_dict(dict(DEFAULT_CONFIGS[args.command]))
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    if getattr(args, "cases", None) is not None:
        overrides["cases"] = args.cases
    if args.out is not None:
        overrides["output_path"] = args.out
    # replace() re-runs validation
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_CONFIG

    if args.command == "m2dist":
        try:
            d = m2_distance(read_path_csv(args.first), read_path_csv(args.second))
        except (OSError, ValueError) as exc:
            print(f"skflt m2dist: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(format(d, ".17g"))
        return EXIT_OK

    try:
        cfg = _load(args)
        rows = ex.run_experiment(cfg)
    except (ex.ConfigError, ValueError) as exc:
        print(f"skflt {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = ex.rows_to_csv(rows)
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"skflt {args.command}: cannot write {cfg.output_path}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)

    if args.check:
        breaches = ex.check_rows(cfg, rows)
        for b in breaches:
            print(f"BREACH {b}", file=sys.stderr)
        if breaches:
            return EXIT_BREACH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
