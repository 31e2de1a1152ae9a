"""Command line entry point: ``jobshop-planner {run,matrix,sweep,budget,disturbance}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import yaml

from .config import MODES, ConfigurationError, ScenarioConfig
from .experiments import (
    ExperimentError,
    RunTask,
    budget_curve,
    disturbance_curve,
    prepare_output,
    run_matrix,
    run_tasks,
    sweep_alpha_beta,
    write_runs,
)
from .planner import run_seed


def parse_seeds(text: str) -> list[int]:
    """``"0-29"``, ``"1,4,9"`` or a mix such as ``"0-4,10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else (part, part)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError(f"no seeds in {text!r}")
    return seeds


def parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else (
        ScenarioConfig.desk() if args.desk else ScenarioConfig())
    updates = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        updates[key.strip()] = yaml.safe_load(value)
    if args.seeds is not None:
        updates["seeds"] = args.seeds
    if getattr(args, "rule", None):
        updates["rules"] = [args.rule]
    if updates:
        data = cfg.to_dict()
        data.update(updates)
        cfg = ScenarioConfig.from_dict(data)
    return cfg


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML scenario file")
    p.add_argument("--desk", action="store_true", help="desk-scale job counts (200 warm-up, 500 measured)")
    p.add_argument("--seeds", type=parse_seeds, help="e.g. 0-29 or 0,3,7")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--cache", type=Path, help="directory for per-run result cache")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jobshop-planner", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one (mode, rule) cell over the given seeds")
    _common(p)
    p.add_argument("--mode", choices=MODES, default="dyro_mcts")
    p.add_argument("--rule", default=None)
    p.add_argument("--gantt", action="store_true", help="also write gantt_<seed>.csv per seed")

    p = sub.add_parser("matrix", help="all configured modes x rules x seeds")
    _common(p)

    p = sub.add_parser("sweep", help="alpha/beta heatmap on validation seeds")
    _common(p)
    p.add_argument("--alphas", type=parse_floats, default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.add_argument("--betas", type=parse_floats, default=[200.0, 400.0, 800.0, 1600.0, 3200.0])

    p = sub.add_parser("budget", help="tardiness and decision time versus search budget")
    _common(p)
    p.add_argument("--budgets", type=parse_ints, default=[10, 50, 100, 500, 1000])

    p = sub.add_parser("disturbance", help="cumulative gain over the bare policy per arrival")
    _common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        out: Path = args.out
        if args.command == "run":
            rule = cfg.rules[0]
            tasks = [RunTask(cfg, args.mode, rule, s) for s in cfg.seeds]
            records = run_tasks(tasks, args.jobs, args.cache)
            prepare_output(out, cfg)
            write_runs(records, out / "runs.csv")
            if args.gantt:
                for s in cfg.seeds:
                    run_seed(cfg, args.mode, rule, s).gantt.to_csv(out / f"gantt_{s}.csv")
            for r in records:
                print(f"{r.mode} {r.rule} seed={r.seed} mean_wt={r.mean_wt:.3f} "
                      f"decision_ms={r.decision_ms_mean:.3f}")
        elif args.command == "matrix":
            report, _ = run_matrix(cfg, out, args.jobs, args.cache)
            for row in report.rows:
                print(f"{row.rule:10s} {row.mode:13s} {row.mean:10.3f} +- {row.std:8.3f} "
                      f"imp={row.improvement:+.1%} p={row.p_baseline:.3g}")
        elif args.command == "sweep":
            grid = sweep_alpha_beta(args.alphas, args.betas, cfg, out, args.jobs, args.cache)
            for cell in grid:
                print(f"alpha={cell.alpha:.2f} beta={cell.beta:g} gain={cell.gain:+.2%}")
        elif args.command == "budget":
            points, _ = budget_curve(args.budgets, cfg, out=out, jobs=args.jobs, cache_dir=args.cache)
            for pt in points:
                print(f"budget={pt.budget} {pt.mode} mean={pt.mean_tardiness:.3f} "
                      f"decision_s={pt.decision_s_mean:.4f}+-{pt.decision_s_std:.4f}")
        elif args.command == "disturbance":
            points, _ = disturbance_curve(cfg, out=out, jobs=args.jobs, cache_dir=args.cache)
            last = max(p.index for p in points)
            for p in points:
                if p.index == last:
                    print(f"{p.mode} final gain={p.gain:.2f}")
    except (ConfigurationError, ExperimentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
