"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 numerical-precondition error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .errors import ConfigError, NumericalPreconditionError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _load(path: str, seed: int | None = None) -> harness.Scenario:
    text = Path(path).read_text(encoding="utf-8")
    sc = harness.parse_scenario(text)
    return sc if seed is None else sc.with_seed(seed)


def _expect_kind(sc: harness.Scenario, kind: str) -> None:
    if sc.kind != kind:
        raise ConfigError("kind", f"expected a {kind} scenario, got {sc.kind}")


def cmd_run(args) -> int:
    sc = _load(args.config, args.seed)
    fmt = args.format or ("csv" if sc.kind in ("direct_measure", "conjugate_protocol", "lambda_sweep") else "json")
    path = harness.emit(harness.run(sc), fmt, args.out)
    print(path)
    return EXIT_OK


def cmd_check_decoupling(args) -> int:
    sc = _load(args.config)
    _expect_kind(sc, "decoupling_check")
    print(json.dumps(harness.run(sc).report, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_tomography(args) -> int:
    sc = _load(args.config)
    _expect_kind(sc, "tomography")
    print(json.dumps(harness.run(sc).estimate, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_validate(args) -> int:
    sys.stdout.write(harness.serialize_scenario(_load(args.config)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qprobe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write its record")
    p.add_argument("config")
    p.add_argument("--out", default=None, help=f"output directory (default ${harness.OUTPUT_DIR_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check-decoupling", help="certify a decoupling_check scenario")
    p.add_argument("config")
    p.set_defaults(func=cmd_check_decoupling)

    p = sub.add_parser("tomography", help="estimate populations for a tomography scenario")
    p.add_argument("config")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("validate", help="parse a scenario and print it with defaults applied")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalPreconditionError as exc:
        print(f"numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
