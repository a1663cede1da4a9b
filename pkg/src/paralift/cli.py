"""Batch driver: parse a run config, execute checks, emit reports.

Usage:

    paralift verify CONFIG.json [--seed N] [--samples N]
                    [--tol-override NAME=VALUE ...] [--out PATH]
    paralift presets

Exit status: 0 when every requested check passes, 1 when a check fails,
2 on configuration or domain errors.  The report is a JSON document that is
byte-stable for a fixed config and seed; the only volatile fields live in
its isolated "timing" object.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import __version__
from .config import (
    apply_overrides,
    build_space_form,
    build_structure,
    parse_config,
)
from .coefficients import SCALAR_PRESETS
from .errors import (
    ChartDomainError,
    ConfigError,
    ContractError,
    DegenerateCoefficient,
    RangeError,
)
from .verify import DEFAULT_TOLERANCES, run_check, sample_points

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

_DOMAIN_ERRORS = (ChartDomainError, ContractError, DegenerateCoefficient,
                  RangeError)


def execute_checks(config):
    """Run every requested check; returns (reports, all_passed)."""
    m = build_space_form(config)
    ls = build_structure(config, m)
    t_max = config.coefficients["t_max"]
    sample = sample_points(
        m,
        config.sampling["count"],
        config.sampling["seed"],
        p_max=config.sampling["p_max"],
        t_max=t_max,
    )
    reports = [
        run_check(name, ls, sample, tol=config.tolerances.get(name))
        for name in config.checks
    ]
    return reports, all(r.passed for r in reports)


def build_report_document(config, reports, all_passed, wall_time_seconds):
    """Assemble the report JSON; volatile fields go into "timing" only."""
    return {
        "library_version": __version__,
        "config": config.echo(),
        "checks": [r.to_dict() for r in reports],
        "all_passed": bool(all_passed),
        "timing": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "wall_time_seconds": wall_time_seconds,
        },
    }


def emit_report(document, path):
    """Write the report document as canonical JSON (sorted keys, no NaN)."""
    text = json.dumps(document, indent=2, sort_keys=True, allow_nan=False)
    path = Path(path)
    try:
        path.write_text(text + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def run(config, *, out=None, stream=None):
    """Execute a validated config end to end; returns the exit status."""
    stream = stream or sys.stdout
    start = time.perf_counter()
    reports, all_passed = execute_checks(config)
    wall = time.perf_counter() - start
    document = build_report_document(config, reports, all_passed, wall)
    out_path = out or config.output or "report.json"
    emit_report(document, out_path)
    for r in reports:
        residual = "nan" if r.max_residual != r.max_residual \
            else f"{r.max_residual:.3e}"
        print(f"{r.check_name}: {r.verdict.upper()}  "
              f"max_residual={residual}  tolerance={r.tolerance:.1e}",
              file=stream)
    print(f"overall: {'PASS' if all_passed else 'FAIL'}", file=stream)
    print(f"report: {out_path}", file=stream)
    return EXIT_PASS if all_passed else EXIT_CHECK_FAILED


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="paralift",
        description="Build lifted structures on cotangent bundles of space "
                    "forms and verify their defining identities numerically.")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run the checks described by a config")
    pv.add_argument("config", help="path to a JSON run config")
    pv.add_argument("--seed", type=int, help="override sampling.seed")
    pv.add_argument("--samples", type=int, help="override sampling.count")
    pv.add_argument("--tol-override", action="append", default=[],
                    metavar="NAME=VALUE",
                    help="override one check tolerance (repeatable)")
    pv.add_argument("--out", help="override the report output path")

    sub.add_parser("presets", help="list coefficient presets and the shipped "
                                   "example configs")

    args = parser.parse_args(argv)
    if args.command == "presets":
        return _presets()
    return _verify(args)


def _verify(args):
    try:
        raw = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        document = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        tolerances = _parse_tol_overrides(args.tol_override)
        config = parse_config(document)
        config = apply_overrides(config, seed=args.seed, samples=args.samples,
                                 tolerances=tolerances, output=args.out)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        return run(config)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


def _parse_tol_overrides(entries):
    problems = []
    out = {}
    for entry in entries:
        name, sep, value = entry.partition("=")
        if not sep:
            problems.append(f"--tol-override {entry!r}: expected NAME=VALUE")
            continue
        if name not in DEFAULT_TOLERANCES:
            problems.append(f"--tol-override {name!r}: unknown check name")
            continue
        try:
            out[name] = float(value)
        except ValueError:
            problems.append(f"--tol-override {entry!r}: bad number")
    if problems:
        raise ConfigError(problems)
    return out


def _presets():
    print("scalar presets (usable for a1, b1, lambda, mu, family.u):")
    for name, (_, params) in sorted(SCALAR_PRESETS.items()):
        print(f"  {name}: params {list(params)}")
    print()
    print("coefficient families:")
    print("  rational: params ['alpha', 'beta', 'u'];"
          " a1 = 1/beta, b1 = u/(alpha beta), a2 = beta,"
          " b2 = -u beta/(alpha + 2 t u)")
    print()
    print("checks:", ", ".join(sorted(DEFAULT_TOLERANCES)))
    print()
    print("example configs (run with: paralift verify PATH):")
    base = resources.files("paralift") / "presets"
    for item in sorted(base.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".json"):
            doc = json.loads(item.read_text())
            print(f"  {item}  checks={doc.get('checks')}")
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
