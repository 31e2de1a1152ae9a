"""Replicated experiments: comparison matrices, parameter sweeps, budget and disturbance studies.

Every run is a pure function of (scenario, mode, rule, seed, overrides), so
runs can be farmed out to a process pool and cached on disk by content key.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import stats

from .config import MODES, ScenarioConfig
from .planner import run_seed

CACHE_VERSION = 1
EXACT_MAX_N = 25
MIN_PAIRS = 6


class ExperimentError(RuntimeError):
    """One or more runs failed, or results could not be written."""

    def __init__(self, message: str, failures: Sequence[tuple["RunTask", str]] = ()) -> None:
        super().__init__(message)
        self.failures = list(failures)


# -- single runs -----------------------------------------------------------------

@dataclass(frozen=True)
class RunTask:
    scenario: ScenarioConfig
    mode: str
    rule: str
    seed: int
    overrides: tuple[tuple[str, Any], ...] = ()

    def key(self) -> str:
        scen = self.scenario.to_dict()
        for name in ("modes", "rules", "seeds", "trace"):
            scen.pop(name)
        blob = json.dumps([CACHE_VERSION, scen, self.mode, self.rule, self.seed,
                           sorted(self.overrides)], sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:20]


@dataclass
class RunRecord:
    mode: str
    rule: str
    seed: int
    mean_wt: float
    decision_ms_mean: float
    decision_ms_std: float
    decisions: int
    objective: str
    utilization: float
    alpha: float
    beta: float
    n_mcts: int
    reused: int
    instance_hash: str
    trace: list[float] | None = field(default=None, repr=False)

    CSV_FIELDS = ("mode", "rule", "seed", "mean_wt", "decision_ms_mean", "decision_ms_std",
                  "decisions", "objective", "utilization", "alpha", "beta", "n_mcts",
                  "reused", "instance_hash")

    def row(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.CSV_FIELDS}


def execute(task: RunTask) -> RunRecord:
    """Run one cell with tracing on; the trace is kept as cumulative tardiness per arrival."""
    overrides = dict(task.overrides)
    res = run_seed(task.scenario, task.mode, task.rule, task.seed, trace=True, **overrides)
    params = task.scenario.planner(task.mode, task.rule, **overrides).effective_params
    ms_mean, ms_std = res.timing_ms()
    return RunRecord(
        mode=task.mode, rule=task.rule, seed=task.seed,
        mean_wt=res.mean_tardiness,
        decision_ms_mean=ms_mean, decision_ms_std=ms_std, decisions=len(res.timing),
        objective=task.scenario.objective, utilization=task.scenario.utilization,
        alpha=params.alpha, beta=params.beta, n_mcts=params.n_mcts,
        reused=res.reused, instance_hash=res.instance_hash,
        trace=[v for _, v in res.trace] if res.trace is not None else None,
    )


def _execute_safe(task: RunTask) -> tuple[RunRecord | None, str | None]:
    try:
        return execute(task), None
    except Exception as exc:  # reported per run, the batch keeps going
        return None, f"{type(exc).__name__}: {exc}"


def _cache_get(cache_dir: Path | None, task: RunTask) -> RunRecord | None:
    if cache_dir is None:
        return None
    path = cache_dir / f"{task.key()}.json"
    if not path.exists():
        return None
    return RunRecord(**json.loads(path.read_text(encoding="utf-8")))


def _cache_put(cache_dir: Path | None, task: RunTask, rec: RunRecord) -> None:
    if cache_dir is None:
        return
    cache_dir.mkdir(parents=True, exist_ok=True)
    tmp = cache_dir / f"{task.key()}.tmp"
    tmp.write_text(json.dumps(asdict(rec)), encoding="utf-8")
    tmp.replace(cache_dir / f"{task.key()}.json")


def run_tasks(tasks: Sequence[RunTask], jobs: int = 1,
              cache_dir: str | Path | None = None) -> list[RunRecord]:
    """Run (or load from cache) every task; order of the result follows ``tasks``."""
    cache = Path(cache_dir) if cache_dir is not None else None
    out: list[RunRecord | None] = [_cache_get(cache, t) for t in tasks]
    todo = [i for i, rec in enumerate(out) if rec is None]
    failures: list[tuple[RunTask, str]] = []

    def collect(i: int, rec: RunRecord | None, err: str | None) -> None:
        if err is not None:
            failures.append((tasks[i], err))
            return
        out[i] = rec
        _cache_put(cache, tasks[i], rec)

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, (rec, err) in zip(todo, pool.map(_execute_safe, [tasks[i] for i in todo])):
                collect(i, rec, err)
    else:
        for i in todo:
            collect(i, *_execute_safe(tasks[i]))
    if failures:
        lines = [f"{t.mode}/{t.rule}/seed {t.seed}: {err}" for t, err in failures]
        raise ExperimentError(f"{len(failures)} run(s) failed:\n" + "\n".join(lines), failures)
    return out  # type: ignore[return-value]


# -- statistics -------------------------------------------------------------------

def signed_rank(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped. The exact null distribution is used for up to
    25 nonzero pairs without tied magnitudes, the tie-corrected normal
    approximation otherwise. All-zero differences give p = 1.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("signed_rank needs two equal-length 1-d samples")
    if len(x) < MIN_PAIRS:
        raise ValueError(f"signed_rank needs at least {MIN_PAIRS} pairs, got {len(x)}")
    d = x - y
    d = d[d != 0]
    if len(d) == 0:
        return 1.0
    ties = len(np.unique(np.abs(d))) < len(d)
    method = "exact" if len(d) <= EXACT_MAX_N and not ties else "approx"
    res = stats.wilcoxon(d, zero_method="wilcox", correction=False,
                         alternative="two-sided", method=method)
    return float(res.pvalue)


def improvement(baseline: float, method: float) -> float:
    """(baseline - method) / baseline; zero when both are zero."""
    if baseline == 0:
        return 0.0 if method == 0 else -math.inf
    return (baseline - method) / baseline


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    return statistics.fmean(values), (statistics.stdev(values) if len(values) > 1 else 0.0)


def _paired(records: Iterable[RunRecord]) -> dict[int, float]:
    return {r.seed: r.mean_wt for r in records}


def paired_p(a: Sequence[RunRecord], b: Sequence[RunRecord]) -> float:
    """Signed-rank p-value over the seeds both record sets share (nan if too few)."""
    pa, pb = _paired(a), _paired(b)
    seeds = sorted(set(pa) & set(pb))
    if len(seeds) < MIN_PAIRS:
        return math.nan
    return signed_rank([pa[s] for s in seeds], [pb[s] for s in seeds])


# -- comparison report ------------------------------------------------------------

@dataclass
class ReportRow:
    objective: str
    utilization: float
    rule: str
    mode: str
    n: int
    mean: float
    std: float
    improvement: float
    p_baseline: float
    p_previous: float
    config_hash: str


@dataclass
class ComparisonReport:
    rows: list[ReportRow]

    def row(self, mode: str, rule: str | None = None) -> ReportRow:
        for r in self.rows:
            if r.mode == mode and (rule is None or r.rule == rule):
                return r
        raise KeyError((mode, rule))

    def to_csv(self, path: str | Path) -> None:
        names = [f.name for f in fields(ReportRow)]
        _write_csv(path, names, [[getattr(r, n) for n in names] for r in self.rows])

    @classmethod
    def from_csv(cls, path: str | Path) -> "ComparisonReport":
        rows = []
        for raw in _read_csv(path):
            rows.append(ReportRow(
                objective=raw["objective"], utilization=float(raw["utilization"]),
                rule=raw["rule"], mode=raw["mode"], n=int(raw["n"]),
                mean=float(raw["mean"]), std=float(raw["std"]),
                improvement=float(raw["improvement"]), p_baseline=float(raw["p_baseline"]),
                p_previous=float(raw["p_previous"]), config_hash=raw["config_hash"],
            ))
        return cls(rows)


def build_report(records: Sequence[RunRecord], config: ScenarioConfig,
                 baseline: str = "policy_only") -> ComparisonReport:
    """Aggregate per (rule, mode): mean, std, improvement and p-values.

    ``p_baseline`` compares against the baseline mode and ``p_previous``
    against the preceding mode in ``config.modes``, for the same rule.
    """
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.rule, r.mode), []).append(r)
    chash = config.content_hash()
    rows = []
    for rule in config.rules:
        base = groups.get((rule, baseline), [])
        base_mean = _mean_std([r.mean_wt for r in base])[0]
        prev: list[RunRecord] = []
        for mode in config.modes:
            recs = groups.get((rule, mode), [])
            mean, std = _mean_std([r.mean_wt for r in recs])
            rows.append(ReportRow(
                objective=config.objective, utilization=config.utilization, rule=rule,
                mode=mode, n=len(recs), mean=mean, std=std,
                improvement=improvement(base_mean, mean) if base else math.nan,
                p_baseline=paired_p(recs, base) if base and mode != baseline else math.nan,
                p_previous=paired_p(recs, prev) if prev else math.nan,
                config_hash=chash,
            ))
            prev = recs
    return ComparisonReport(rows)


def matrix_tasks(config: ScenarioConfig) -> list[RunTask]:
    return [RunTask(config, mode, rule, seed)
            for rule in config.rules for mode in config.modes for seed in config.seeds]


def run_matrix(config: ScenarioConfig, out: str | Path | None = None, jobs: int = 1,
               cache_dir: str | Path | None = None) -> tuple[ComparisonReport, list[RunRecord]]:
    """Every (mode, rule, seed) cell on shared arrival streams; writes runs.csv and report.csv."""
    records = run_tasks(matrix_tasks(config), jobs, cache_dir)
    report = build_report(records, config)
    if out is not None:
        out = prepare_output(out, config)
        write_runs(records, out / "runs.csv")
        report.to_csv(out / "report.csv")
    return report, records


# -- alpha / beta sweep -------------------------------------------------------------

@dataclass
class HeatmapCell:
    alpha: float
    beta: float
    baseline_mean: float
    method_mean: float
    gain: float
    config_hash: str


def validation_seeds(config: ScenarioConfig) -> list[int]:
    return [s + config.validation_seed_offset for s in config.seeds]


def sweep_alpha_beta(alphas: Sequence[float], betas: Sequence[float], config: ScenarioConfig,
                     out: str | Path | None = None, jobs: int = 1,
                     cache_dir: str | Path | None = None,
                     seeds: Sequence[int] | None = None) -> list[HeatmapCell]:
    """Gain of the robustness-aware search over its alpha = 1 reduction for each (alpha, beta).

    Runs on the validation seeds. With alpha = 1 the robustness term has zero
    weight, so beta cannot affect the run; those cells reuse the baseline runs
    and their gain is exactly zero.
    """
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha {a} outside [0, 1]")
    for b in betas:
        if b <= 0:
            raise ValueError(f"beta {b} must be positive")
    seeds = list(seeds) if seeds is not None else validation_seeds(config)
    rule = config.rules[0]
    mode = "dyro_mcts"
    base_tasks = [RunTask(config, mode, rule, s, (("alpha", 1.0),)) for s in seeds]
    cells = [(a, b) for a in alphas for b in betas]
    cell_tasks = {(a, b): [RunTask(config, mode, rule, s, (("alpha", float(a)), ("beta", float(b))))
                           for s in seeds]
                  for a, b in cells if a != 1.0}
    flat = base_tasks + [t for ts in cell_tasks.values() for t in ts]
    records = run_tasks(flat, jobs, cache_dir)
    base = records[:len(seeds)]
    base_mean = statistics.fmean(r.mean_wt for r in base)
    chash = config.content_hash()
    grid = []
    pos = len(seeds)
    for a, b in cells:
        if a == 1.0:
            grid.append(HeatmapCell(float(a), float(b), base_mean, base_mean, 0.0, chash))
            continue
        recs = records[pos:pos + len(seeds)]
        pos += len(seeds)
        mean = statistics.fmean(r.mean_wt for r in recs)
        grid.append(HeatmapCell(float(a), float(b), base_mean, mean, improvement(base_mean, mean), chash))
    if out is not None:
        out = prepare_output(out, config)
        write_runs(records, out / "runs.csv")
        write_dataclasses(grid, out / "heatmap.csv")
    return grid


# -- decision budget ---------------------------------------------------------------

@dataclass
class BudgetPoint:
    budget: int
    mode: str
    n: int
    mean_tardiness: float
    std_tardiness: float
    decision_s_mean: float
    decision_s_std: float
    config_hash: str


def pooled_timing(records: Sequence[RunRecord]) -> tuple[float, float]:
    """Mean and std (ms) over all decisions of several runs, from per-run moments."""
    n = sum(r.decisions for r in records)
    if n == 0:
        return 0.0, 0.0
    mean = sum(r.decision_ms_mean * r.decisions for r in records) / n
    second = sum((r.decision_ms_std ** 2 + r.decision_ms_mean ** 2) * r.decisions for r in records) / n
    return mean, math.sqrt(max(0.0, second - mean * mean))


def budget_curve(budgets: Sequence[int], config: ScenarioConfig,
                 modes: Sequence[str] = ("vanilla_mcts", "dyro_mcts"),
                 out: str | Path | None = None, jobs: int = 1,
                 cache_dir: str | Path | None = None) -> tuple[list[BudgetPoint], list[RunRecord]]:
    for b in budgets:
        if b < 1:
            raise ValueError(f"budget {b} must be positive")
    rule = config.rules[0]
    keys = [(b, m) for b in budgets for m in modes]
    tasks = [RunTask(config, m, rule, s, (("n_mcts", int(b)),)) for b, m in keys for s in config.seeds]
    records = run_tasks(tasks, jobs, cache_dir)
    chash = config.content_hash()
    points = []
    k = len(config.seeds)
    for i, (b, m) in enumerate(keys):
        recs = records[i * k:(i + 1) * k]
        mean, std = _mean_std([r.mean_wt for r in recs])
        t_mean, t_std = pooled_timing(recs)
        points.append(BudgetPoint(int(b), m, len(recs), mean, std, t_mean / 1000.0, t_std / 1000.0, chash))
    if out is not None:
        out = prepare_output(out, config)
        write_runs(records, out / "runs.csv")
        write_dataclasses(points, out / "curve.csv")
    return points, records


# -- disturbance curve -------------------------------------------------------------

@dataclass
class CurvePoint:
    index: int
    mode: str
    gain: float


def disturbance_curve(config: ScenarioConfig,
                      modes: Sequence[str] = ("vanilla_mcts", "dyro_mcts"),
                      out: str | Path | None = None, jobs: int = 1,
                      cache_dir: str | Path | None = None) -> tuple[list[CurvePoint], list[RunRecord]]:
    """Seed-averaged reduction in cumulative tardiness versus the bare policy, per measured arrival."""
    rule = config.rules[0]
    all_modes = ["policy_only"] + [m for m in modes if m != "policy_only"]
    tasks = [RunTask(config, m, rule, s) for m in all_modes for s in config.seeds]
    records = run_tasks(tasks, jobs, cache_dir)
    k = len(config.seeds)
    traces = {}
    for i, m in enumerate(all_modes):
        traces[m] = np.array([r.trace for r in records[i * k:(i + 1) * k]], dtype=float)
    base = traces["policy_only"]
    points = []
    for m in all_modes[1:]:
        gain = (base - traces[m]).mean(axis=0)
        points.extend(CurvePoint(i, m, float(g)) for i, g in enumerate(gain))
    if out is not None:
        out = prepare_output(out, config)
        write_runs(records, out / "runs.csv")
        write_dataclasses(points, out / "curve.csv")
    return points, records


def late_gain(points: Sequence[CurvePoint], mode: str, tail: float = 0.2) -> list[float]:
    """Gain values of ``mode`` over the final ``tail`` fraction of arrivals."""
    series = [p.gain for p in sorted((p for p in points if p.mode == mode), key=lambda p: p.index)]
    start = int(math.floor(len(series) * (1.0 - tail)))
    return series[start:]


# -- csv helpers -------------------------------------------------------------------

def prepare_output(out: str | Path, config: ScenarioConfig) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        config.dump(out / "config.yaml")
        (out / "config.hash").write_text(config.content_hash() + "\n", encoding="utf-8")
    except OSError as exc:
        raise ExperimentError(f"cannot write to output directory {out}: {exc}") from exc
    return out


def _write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    except OSError as exc:
        raise ExperimentError(f"cannot write {path}: {exc}") from exc


def _read_csv(path: str | Path) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise ExperimentError(f"cannot read {path}: {exc}") from exc


def write_runs(records: Sequence[RunRecord], path: str | Path) -> None:
    _write_csv(path, RunRecord.CSV_FIELDS, [[getattr(r, k) for k in RunRecord.CSV_FIELDS] for r in records])


def read_runs(path: str | Path) -> list[dict[str, str]]:
    return _read_csv(path)


def write_dataclasses(items: Sequence[Any], path: str | Path) -> None:
    if not items:
        _write_csv(path, [], [])
        return
    names = [f.name for f in fields(items[0])]
    _write_csv(path, names, [[getattr(it, n) for n in names] for it in items])


__all__ = [
    "MODES", "BudgetPoint", "ComparisonReport", "CurvePoint", "ExperimentError", "HeatmapCell",
    "ReportRow", "RunRecord", "RunTask", "budget_curve", "build_report", "disturbance_curve",
    "execute", "improvement", "late_gain", "matrix_tasks", "paired_p", "pooled_timing", "prepare_output",
    "read_runs", "run_matrix", "run_tasks", "signed_rank", "sweep_alpha_beta", "validation_seeds",
    "write_runs",
]
