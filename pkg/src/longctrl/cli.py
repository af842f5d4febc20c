"""Command line entry point: ``longctrl run | validate | list-scenarios``.

Exit codes: 0 ok, 1 a scenario assertion failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import loads_toml
from .core_types import ConfigError
from .runner import (check_assertions, load_scenario, run_scenario, write_metrics,
                     write_timeseries)
from .scenarios import builtin_names, builtin_text

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="longctrl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and write timeseries.csv and metrics.json")
    run.add_argument("--scenario", required=True,
                     help="scenario file, or a built-in name (optionally prefixed 'builtin:')")
    run.add_argument("--out", help="output directory (default: the scenario's output_dir)")
    run.add_argument("--seed", type=int, help="noise seed, overrides the scenario's")
    val = sub.add_parser("validate", help="check a scenario without running it")
    val.add_argument("--scenario", required=True)
    sub.add_parser("list-scenarios", help="list the built-in scenarios")
    return p


def _run(args) -> int:
    cfg = load_scenario(args.scenario)
    out = args.out or cfg.output_dir
    if not out:
        raise ConfigError("no output directory: pass --out or set output_dir", "scenario.output_dir")
    out = Path(out)
    if out.exists() and not out.is_dir():
        raise ConfigError("exists and is not a directory", f"--out ({out})")
    log, metrics = run_scenario(cfg, seed=args.seed)
    out.mkdir(parents=True, exist_ok=True)
    write_timeseries(log, out / "timeseries.csv")
    failures = check_assertions(metrics, cfg.assertions)
    write_metrics(metrics, out / "metrics.json", failures)
    for msg in failures:
        print(f"assertion failed: {msg}", file=sys.stderr)
    print(f"{cfg.name}: {len(log)} rows, {len(failures)} assertion failure(s) -> {out}")
    return EXIT_ASSERTION if failures else EXIT_OK


def _validate(args) -> int:
    cfg = load_scenario(args.scenario)
    print(f"{cfg.name}: ok ({cfg.duration:g} s, {len(cfg.assertions)} assertion(s))")
    return EXIT_OK


def _list() -> int:
    for name in builtin_names():
        head = loads_toml(builtin_text(name), name).get("scenario", {})
        print(f"{name}\t{head.get('description', '')}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "validate":
            return _validate(args)
        return _list()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
