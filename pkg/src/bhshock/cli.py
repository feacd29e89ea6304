"""Command-line interface.

Subcommands map onto the scenario modes; a config file can carry presets
and solver overrides, with command-line flags taking precedence.  Exit
codes: 0 all checks passed, 1 a check failed, 2 configuration error,
3 numerical failure.
"""

import argparse
import sys

from .errors import (
    AccuracyError,
    AdmissibilityError,
    ConfigError,
    DomainError,
    NonconvergenceError,
    RegimeError,
)
from .harness import MODES, ScenarioConfig, run_scenario

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="flat key=value scenario file")
    common.add_argument("--out", metavar="DIR",
                        help="directory for CSV/JSON exports")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for randomized checks")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="bhshock", parents=[common],
        description="Shock-fitting solvers and oracles for the "
                    "Burgers-Hilbert equation")
    sub = parser.add_subparsers(dest="command", required=True)

    names = {
        "single": "solve a single-shock scenario",
        "two-shock": "solve a two-shock interaction up to collision",
        "interaction": "full interaction pipeline incl. the merged shock",
        "burgers-ref": "exact two-shock transport oracle",
        "fv-ref": "finite-volume oracle with the nonlocal source",
        "validate": "fast invariant sweep over the core operations",
    }
    for name, help_text in names.items():
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       help="solver constant override (repeatable)")
        p.add_argument("--preset-set", action="append", default=[],
                       metavar="K=V", help="preset parameter override")
    return parser


def _parse_pairs(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"expected K=V, got {item!r}")
        k, v = item.split("=", 1)
        for cast in (int, float):
            try:
                v = cast(v)
                break
            except ValueError:
                continue
        out[k.strip()] = v
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    mode = args.command.replace("-", "_")
    try:
        if args.config:
            cfg = ScenarioConfig.from_file(args.config, mode=mode)
            if cfg.mode != mode:
                raise ConfigError(
                    f"config mode {cfg.mode!r} conflicts with subcommand {mode!r}")
        else:
            cfg = ScenarioConfig(mode=mode)
        solver = dict(cfg.solver)
        solver.update(_parse_pairs(args.set))
        preset_params = dict(cfg.preset_params)
        preset_params.update(_parse_pairs(args.preset_set))
        cfg = ScenarioConfig(
            mode=cfg.mode, preset=cfg.preset, preset_params=preset_params,
            solver=solver,
            out_dir=args.out if args.out else cfg.out_dir,
            seed=args.seed if args.seed is not None else cfg.seed,
            verbose=args.verbose or cfg.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        summary = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (NonconvergenceError, RegimeError, AccuracyError,
            AdmissibilityError, DomainError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE

    print(summary.print_lines(verbose=cfg.verbose))
    return EXIT_PASS if summary.passed else EXIT_CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())
