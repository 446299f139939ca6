"""Command line entry point: ``fbmoo run | list | dump-function``.

Exit codes: 0 when every gating flag passes, 1 when a check fails and
2 for unusable configs or inadmissible exponents.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import CATALOG, function_from_spec, run_experiment
from .weights import InadmissibleExponents

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbmoo", description="Dyadic harmonic analysis experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a JSON config")
    run.add_argument("config", help="path to the JSON config")
    run.add_argument("--out", help="report path (default: config 'output' key or stdout)")
    run.add_argument("--csv", help="also write the flags as CSV")
    run.add_argument("--no-timestamp", action="store_true", help="omit the volatile timestamp block")

    sub.add_parser("list", help="list the available experiments")

    dump = sub.add_parser("dump-function", help="sample a function spec and write it as CSV")
    dump.add_argument("spec", help="JSON spec string or path to a JSON file")
    dump.add_argument("csv", help="output CSV path")
    dump.add_argument("--resolution", type=int, default=10)
    return parser


def _write_flags_csv(report, path):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "quantity", "value", "relation", "threshold", "passed", "gating"])
        for f in report.flags + report.runtime_flags:
            writer.writerow([f.name, f.quantity, repr(f.value), f.relation, repr(f.threshold), f.passed, f.gating])


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        report = run_experiment(cfg)
    except (ConfigError, InadmissibleExponents) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.to_json(include_timestamp=not args.no_timestamp)
    out = args.out or cfg.get("output")
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)
    if args.csv:
        _write_flags_csv(report, args.csv)
    print(report.summary(), file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_list(args) -> int:
    width = max(len(n) for n in CATALOG)
    for name, exp in CATALOG.items():
        print(f"{name:<{width}}  {exp.label:<20}  {exp.summary}")
    return 0


def _cmd_dump(args) -> int:
    try:
        path = Path(args.spec)
        text = path.read_text() if path.is_file() else args.spec
        spec = json.loads(text)
        resolution = int(spec.pop("resolution", args.resolution)) if isinstance(spec, dict) else args.resolution
        function_from_spec(spec, resolution).to_csv(args.csv)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "list": _cmd_list, "dump-function": _cmd_dump}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
