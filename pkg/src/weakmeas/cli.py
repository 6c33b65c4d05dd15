"""Command-line entry point.

    weakmeas run SCENARIO [options] [--param key=value ...]
    weakmeas list
    weakmeas dry-run SCENARIO [options]

Exit codes: 0 all checks passed, 1 at least one check failed (checks.json is
still written), 2 configuration error (unknown scenario/key, malformed
value), 3 I/O failure.  Identical (config, seed) produce byte-identical
checks.json.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenarios import SCENARIOS, run_scenario

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(Exception):
    pass


def _flag_name(param: str) -> str:
    return "--" + param.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakmeas",
                                     description="pre/post-selected measurement scenarios")
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run a scenario and write its report")
    dry_p = sub.add_parser("dry-run", help="validate the configuration, write nothing")
    sub.add_parser("list", help="enumerate scenarios and their checks")

    for p, dry_default in ((run_p, False), (dry_p, True)):
        p.add_argument("scenario", choices=sorted(SCENARIOS))
        p.add_argument("--seed", type=int, default=20250809, help="64-bit master seed")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="generic parameter override (repeatable)")
        p.add_argument("--config", default=None, help="JSON config file (flags win)")
        p.add_argument("--emit", choices=["csv", "json", "both"], default="both")
        p.add_argument("--no-figures", action="store_true",
                       help="skip rendering PNG figures")
        p.add_argument("--tolerance-scale", type=float, default=None,
                       help="multiply all check tolerances (testing hook)")
        p.add_argument("--dry-run", action="store_true", default=dry_default,
                       help=argparse.SUPPRESS)
        # dedicated flags for every scenario parameter (value parsed later so
        # unknown keys are caught regardless of which scenario is chosen)
        for name in {k for spec in SCENARIOS.values() for k in spec.params}:
            p.add_argument(_flag_name(name), dest=f"sp_{name}", default=None)
    return parser


def _parse_value(spec_params, key, raw):
    if key not in spec_params:
        raise ConfigError(f"unknown parameter {key!r}")
    try:
        return spec_params[key].parse(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed value for {key!r}: {raw!r} ({exc})") from exc


def collect_params(args) -> tuple:
    """Merge defaults < config file < --param < dedicated flags."""
    spec = SCENARIOS[args.scenario]
    params = {}
    seed = args.seed
    tol_scale = 1.0
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        for key, value in loaded.items():
            if key == "seed":
                seed = int(value)
            elif key == "tolerance_scale":
                tol_scale = float(value)
            elif key == "scenario":
                if value != args.scenario:
                    raise ConfigError(f"config file names scenario {value!r}")
            else:
                params[key] = _parse_value(spec.params, key, value)
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.replace("-", "_")
        if key == "tolerance_scale":
            tol_scale = float(raw)
        else:
            params[key] = _parse_value(spec.params, key, raw)
    for key in spec.params:
        raw = getattr(args, f"sp_{key}", None)
        if raw is not None:
            params[key] = _parse_value(spec.params, key, raw)
    if args.tolerance_scale is not None:
        tol_scale = args.tolerance_scale
    return params, seed, tol_scale


def cmd_list() -> int:
    for name in sorted(SCENARIOS):
        spec = SCENARIOS[name]
        print(f"{name}: {spec.description}")
        for pname, pspec in spec.params.items():
            print(f"    --{pname.replace('_', '-')} (default {pspec.default}) {pspec.help}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        params, seed, tol_scale = collect_params(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        print(f"dry-run: {args.scenario} params={params} seed={seed}")
        return EXIT_OK
    result = run_scenario(args.scenario, params, seed=seed, tolerance_scale=tol_scale)
    emit = ("csv", "json") if args.emit == "both" else (args.emit,)
    from .report import write_scenario
    try:
        write_scenario(result, Path(args.out), seed, emit=emit,
                       figures=not args.no_figures)
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    failed = [c for c in result.checks if not c.passed]
    for c in result.checks:
        marker = "PASS" if c.passed else "FAIL"
        print(f"[{marker}] {result.name}/{c.name}: expected {c.expected:.6g} "
              f"got {c.got:.6g} (tol {c.tolerance:.3g}, {c.kind})")
    if failed:
        print(f"{len(failed)} check(s) failed, first: {failed[0].name}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        return cmd_list()
    if args.command in ("run", "dry-run"):
        return cmd_run(args)
    parser.print_usage(sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
