"""Command-line entry point: run configured experiments, verify, sweep."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import acceptance, experiments
from .config import ConfigError, ExperimentConfig, parse_config, validate_config


def _load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    t0 = time.perf_counter()
    out = experiments.run_experiment(cfg)
    dt = time.perf_counter() - t0
    print(f"{cfg.experiment} done in {dt:.1f}s; outputs in {out}")
    return 0


def _cmd_verify(args) -> int:
    results = acceptance.run_all(fast=args.fast)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 0 if failed == 0 else 1


def _cmd_sweep(args) -> int:
    overrides = {}
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, _, val = item.partition("=")
        overrides[key.strip()] = val.strip()
    lines = [f"experiment = {args.experiment}", f"seed = {args.seed}"]
    lines += [f"{k} = {v}" for k, v in overrides.items()]
    cfg = parse_config("\n".join(lines))
    errors = validate_config(cfg)
    if errors:
        raise ConfigError("\n".join(errors))
    out = experiments.run_experiment(cfg)
    print(f"{cfg.experiment} done; outputs in {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mbqc-lab",
        description="Simulation laboratory for measurement-based computation "
                    "on symmetry-protected cluster chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config", help="path to a key=value config file")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the acceptance check suite")
    p_verify.add_argument("--fast", action="store_true",
                          help="reduce trajectory counts for a quicker pass")
    p_verify.set_defaults(func=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run an experiment with inline overrides")
    p_sweep.add_argument("--experiment", required=True)
    p_sweep.add_argument("--seed", type=int, required=True)
    p_sweep.add_argument("--param", action="append", default=[],
                         metavar="KEY=VALUE")
    p_sweep.set_defaults(func=_cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
