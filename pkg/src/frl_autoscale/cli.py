"""Command line entry point: ``frl-autoscale run | compare | gen-trace-template``."""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (
    ConfigError,
    ExperimentConfig,
    compare_controllers,
    emit_outputs,
    load_config,
    run_experiment,
    write_comparison,
)
from .workload import TraceError

DEFAULT_CONTROLLERS = "FQL,FSL,fixed(1),fixed(5)"


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file, then --seed/--horizon, then FRL_SEED (highest precedence)."""
    data = load_config(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.horizon is not None:
        data["horizon"] = args.horizon
    env_seed = os.environ.get("FRL_SEED")
    if env_seed:
        try:
            data["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"FRL_SEED must be an integer, got {env_seed!r}") from None
    return ExperimentConfig.from_dict(data)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    result = run_experiment(cfg)
    for path in emit_outputs(result, args.out):
        print(path)
    s = result.summary
    print(
        f"{cfg.controller}: mean_rt={s['mean_rt_s']:.4f}s "
        f"sla_violation={s['sla_violation_ratio']:.3f} mean_vm={s['mean_vm_pct']:.1f}% "
        f"convergence_step={s['convergence_step']}",
        file=sys.stderr,
    )
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    base = build_config(args)
    names = [c.strip() for c in _split_controllers(args.controllers)]
    cfgs = [replace(base, controller=name) for name in names]
    rows, results = compare_controllers(cfgs, jobs=args.jobs)
    out = Path(args.out)
    for name, res in zip(names, results):
        emit_outputs(res, out / _slug(name))
    for path in write_comparison(rows, out):
        print(path)
    for row in rows:
        print(
            f"{row['controller']:>10}  mean_rt={row['mean_rt_s']:.4f}s  "
            f"sla_violation={row['sla_violation_ratio']:.3f}  mean_vm={row['mean_vm_pct']:.1f}%",
            file=sys.stderr,
        )
    return 0


def cmd_gen_trace_template(args: argparse.Namespace) -> int:
    """Write a two-column ``t,count`` trace with a daily-cycle shape."""
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        fh.write("t,count\n")
        for t in range(args.length):
            count = 500 + 400 * math.sin(2 * math.pi * t / 288 - math.pi / 2) ** 2
            fh.write(f"{t},{round(count)}\n")
    print(out)
    return 0


def _split_controllers(text: str) -> list[str]:
    # commas inside fixed(n) never occur, so a plain split is enough
    return [c for c in text.split(",") if c.strip()]


def _slug(name: str) -> str:
    return name.replace("(", "").replace(")", "")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frl-autoscale",
        description="Fuzzy SARSA / fuzzy Q-learning auto-scaling experiments on a simulated cluster.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="experiment JSON config (all keys optional)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--horizon", type=int, help="override the number of intervals")

    run = sub.add_parser("run", help="run one controller")
    common(run)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run several controllers on the same setup")
    common(cmp_)
    cmp_.add_argument(
        "--controllers", default=DEFAULT_CONTROLLERS,
        help=f"comma-separated controllers (default: {DEFAULT_CONTROLLERS})",
    )
    cmp_.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    cmp_.set_defaults(func=cmd_compare)

    gen = sub.add_parser("gen-trace-template", help="write an example trace CSV")
    gen.add_argument("--out", required=True, help="trace file to write")
    gen.add_argument("--length", type=int, default=1440, help="number of rows")
    gen.set_defaults(func=cmd_gen_trace_template)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
