from __future__ import annotations

import argparse
import json
import sys

from .errors import ConvergenceError, DomainError, InconsistentDataError
from .experiments import KINDS, ConfigError, build_config, load_config, run


def _parse_assignment(raw: str) -> tuple[str, object]:
    if "=" not in raw:
        raise ConfigError("--set", f"expected key=value, got {raw!r}")
    key, value = raw.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key.strip(), parsed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramsey-experiment",
        description="Write CSV tables (plus a run.json manifest) for Ramsey estimation experiments.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="JSON config file or a previous run.json manifest")
        p.add_argument("--seed", type=int, help="unsigned 64-bit base seed")
        p.add_argument("--out", default="runs", help="parent directory for run folders (default: runs)")
        p.add_argument("--grid-points", type=int, dest="grid_points", help="posterior grid size")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one parameter; VALUE is parsed as JSON when possible",
        )
        p.add_argument("--workers", type=int, default=1, help="process pool size for sweep points")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        mapping = load_config(args.config) if args.config else {}
        if mapping.get("kind", args.kind) != args.kind:
            raise ConfigError(
                "kind", f"config file is for {mapping['kind']!r}, subcommand is {args.kind!r}"
            )
        mapping["kind"] = args.kind
        for raw in args.set:
            key, value = _parse_assignment(raw)
            mapping[key] = value
        if args.seed is not None:
            mapping["seed"] = args.seed
        if args.grid_points is not None:
            mapping["grid_points"] = args.grid_points
        if args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
        config = build_config(mapping)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        run_dir = run(config, args.out, workers=args.workers, argv=argv)
    except (DomainError, ConvergenceError, InconsistentDataError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(run_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
