import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from jobshop_planner.cli import main, parse_seeds
from jobshop_planner.config import ScenarioConfig
from jobshop_planner.experiments import (
    ComparisonReport,
    CurvePoint,
    ExperimentError,
    RunRecord,
    RunTask,
    budget_curve,
    build_report,
    disturbance_curve,
    improvement,
    late_gain,
    paired_p,
    pooled_timing,
    read_runs,
    run_matrix,
    run_tasks,
    signed_rank,
    sweep_alpha_beta,
)

TINY = ScenarioConfig.desk(warmup_jobs=10, measured_jobs=20, n_mcts=8, rules=["spt"], seeds=list(range(6)))


def exact_signed_rank(a, b):
    """Two-sided p by enumerating every sign pattern of the nonzero differences."""
    d = [x - y for x, y in zip(a, b) if x != y]
    if not d:
        return 1.0
    order = sorted(range(len(d)), key=lambda i: abs(d[i]))
    ranks = [0] * len(d)
    for r, i in enumerate(order, 1):
        ranks[i] = r
    w = sum(r for r, x in zip(ranks, d) if x > 0)
    counts = [sum(r for r, s in zip(ranks, signs) if s)
              for signs in itertools.product((0, 1), repeat=len(d))]
    total = len(counts)
    lo = sum(c <= w for c in counts) / total
    hi = sum(c >= w for c in counts) / total
    return min(1.0, 2 * min(lo, hi))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-1000, 1000), st.integers(-1000, 1000)), min_size=6, max_size=12))
def test_signed_rank_matches_enumeration(pairs):
    a = [float(x) for x, _ in pairs]
    b = [float(y) for _, y in pairs]
    mags = [abs(x - y) for x, y in zip(a, b) if x != y]
    if len(set(mags)) < len(mags):
        return  # tied magnitudes use the normal approximation
    assert signed_rank(a, b) == pytest.approx(exact_signed_rank(a, b), rel=1e-9, abs=1e-12)


def test_signed_rank_textbook_example():
    x = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30]
    y = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29]
    assert signed_rank(x, y) == pytest.approx(0.0390625, abs=1e-7)


def test_signed_rank_edge_cases():
    a = [float(i) for i in range(10)]
    assert signed_rank(a, a) == 1.0
    better = [float(i) for i in range(1, 21)]
    assert signed_rank([x + 5 for x in better], better) < 1e-5
    assert signed_rank([x + 0.1 * i for i, x in enumerate(better, 1)], better) < 0.001
    with pytest.raises(ValueError):
        signed_rank([1.0] * 5, [2.0] * 5)
    with pytest.raises(ValueError):
        signed_rank([1.0] * 6, [2.0] * 7)


def test_improvement():
    assert improvement(100.0, 60.0) == pytest.approx(0.4)
    assert improvement(0.0, 0.0) == 0.0
    assert improvement(50.0, 50.0) == 0.0
    assert improvement(50.0, 75.0) == pytest.approx(-0.5)


def record(mode, seed, value, n=10, ms=1.0, sd=0.0):
    return RunRecord(mode, "spt", seed, value, ms, sd, n, "WT_mean", 0.85, 0.5, 800.0, 8, 0, f"h{seed}")


def test_report_identity_has_no_gain():
    cfg = TINY.with_overrides(seeds=list(range(8)))
    recs = [record(m, s, 10.0 + s) for m in cfg.modes for s in cfg.seeds]
    report = build_report(recs, cfg)
    assert len(report.rows) == len(cfg.modes) * len(cfg.rules)
    for mode in ("vanilla_mcts", "dyro_mcts"):
        row = report.row(mode, "spt")
        assert row.improvement == 0.0 and row.p_baseline == 1.0 and row.n == 8
    assert math.isnan(report.row("policy_only").p_baseline)
    assert math.isnan(report.row("policy_only").p_previous)


def test_report_pairs_by_seed():
    cfg = TINY.with_overrides(seeds=list(range(8)))
    recs = [record("policy_only", s, 20.0 + 2 * s) for s in range(8)]
    recs += [record("vanilla_mcts", s, 10.0 + s) for s in reversed(range(8))]
    recs += [record("dyro_mcts", s, 5.0 + 0.5 * s) for s in range(8)]
    report = build_report(recs, cfg)
    assert report.row("vanilla_mcts").improvement == pytest.approx(0.5)
    assert report.row("vanilla_mcts").p_baseline == pytest.approx(2 / 2 ** 8)
    assert report.row("dyro_mcts").p_previous == pytest.approx(2 / 2 ** 8)


def test_paired_p_needs_enough_shared_seeds():
    a = [record("x", s, 1.0 + s) for s in range(8)]
    b = [record("y", s + 4, 2.0 + s) for s in range(8)]
    assert math.isnan(paired_p(a, b))


def test_report_csv_round_trip(tmp_path):
    cfg = TINY.with_overrides(seeds=list(range(8)))
    recs = [record(m, s, float((s * 7 + len(m)) % 5) / 3) for m in cfg.modes for s in cfg.seeds]
    report = build_report(recs, cfg)
    report.to_csv(tmp_path / "r.csv")
    back = ComparisonReport.from_csv(tmp_path / "r.csv")
    for a, b in zip(report.rows, back.rows):
        for name in ("mean", "std", "improvement", "p_baseline", "p_previous"):
            x, y = getattr(a, name), getattr(b, name)
            assert (math.isnan(x) and math.isnan(y)) or x == y
        assert (a.mode, a.rule, a.config_hash) == (b.mode, b.rule, b.config_hash)


def test_pooled_timing_equals_direct_moments():
    import statistics
    groups = [[1.0, 2.0, 4.0], [3.0, 3.5], [0.5, 9.0, 2.0, 2.5]]
    recs = [record("x", i, 0.0, n=len(g), ms=statistics.fmean(g), sd=statistics.pstdev(g))
            for i, g in enumerate(groups)]
    flat = [x for g in groups for x in g]
    mean, std = pooled_timing(recs)
    assert mean == pytest.approx(statistics.fmean(flat))
    assert std == pytest.approx(statistics.pstdev(flat))


def test_late_gain_tail():
    pts = [CurvePoint(i, "dyro_mcts", float(i)) for i in range(10)] + [CurvePoint(0, "other", 5.0)]
    assert late_gain(pts, "dyro_mcts") == [8.0, 9.0]


def test_matrix_shares_instances_and_writes_files(tmp_path):
    report, recs = run_matrix(TINY, tmp_path / "out", cache_dir=tmp_path / "cache")
    assert len(recs) == 3 * 6
    by_seed = {}
    for r in recs:
        by_seed.setdefault(r.seed, set()).add(r.instance_hash)
    assert all(len(h) == 1 for h in by_seed.values())
    assert len({next(iter(h)) for h in by_seed.values()}) == 6
    rows = read_runs(tmp_path / "out" / "runs.csv")
    assert len(rows) == 18 and float(rows[0]["mean_wt"]) == recs[0].mean_wt
    assert (tmp_path / "out" / "config.hash").read_text().strip() == TINY.content_hash()
    assert ScenarioConfig.load(tmp_path / "out" / "config.yaml") == TINY
    assert len(ComparisonReport.from_csv(tmp_path / "out" / "report.csv").rows) == 3
    # a second pass is served from the cache
    again = run_tasks([RunTask(TINY, r.mode, r.rule, r.seed) for r in recs], cache_dir=tmp_path / "cache")
    assert [r.mean_wt for r in again] == [r.mean_wt for r in recs]


def test_parallel_and_serial_agree(tmp_path):
    tasks = [RunTask(TINY, "dyro_mcts", "spt", s) for s in range(4)]
    serial = run_tasks(tasks)
    parallel = run_tasks(tasks, jobs=2)
    assert [r.mean_wt for r in serial] == [r.mean_wt for r in parallel]


def test_failed_run_is_reported():
    bad = RunTask(TINY, "dyro_mcts", "spt", 0, (("n_mcts", 0),))
    with pytest.raises(ExperimentError) as info:
        run_tasks([bad, RunTask(TINY, "policy_only", "spt", 0)])
    assert len(info.value.failures) == 1


def test_sweep_alpha_one_column_is_zero(tmp_path):
    grid = sweep_alpha_beta([0.5, 1.0], [100.0, 800.0], TINY, tmp_path, seeds=[10_000, 10_001])
    assert [(c.alpha, c.beta) for c in grid] == [(0.5, 100.0), (0.5, 800.0), (1.0, 100.0), (1.0, 800.0)]
    assert all(c.gain == 0.0 for c in grid if c.alpha == 1.0)
    assert (tmp_path / "heatmap.csv").exists()
    with pytest.raises(ValueError):
        sweep_alpha_beta([1.5], [100.0], TINY)


def test_budget_curve_shape(tmp_path):
    cfg = TINY.with_overrides(seeds=[0, 1])
    points, recs = budget_curve([4, 16], cfg, out=tmp_path)
    assert [(p.budget, p.mode) for p in points] == [(4, "vanilla_mcts"), (4, "dyro_mcts"),
                                                   (16, "vanilla_mcts"), (16, "dyro_mcts")]
    assert all(r.n_mcts in (4, 16) for r in recs)
    assert all(p.decision_s_mean > 0 for p in points)


def test_disturbance_curve_length(tmp_path):
    cfg = TINY.with_overrides(seeds=[0, 1])
    points, _ = disturbance_curve(cfg, out=tmp_path)
    assert len([p for p in points if p.mode == "dyro_mcts"]) == cfg.measured_jobs
    assert {p.mode for p in points} == {"vanilla_mcts", "dyro_mcts"}


def test_parse_seeds():
    assert parse_seeds("0-3,7") == [0, 1, 2, 3, 7]
    assert parse_seeds("5") == [5]


def cli_args(tmp_path, *extra):
    return [*extra, "--desk", "--seeds", "0-1", "--out", str(tmp_path),
            "--set", "warmup_jobs=10", "--set", "measured_jobs=20", "--set", "n_mcts=6"]


def test_cli_run_writes_outputs(tmp_path, capsys):
    assert main(["run", *cli_args(tmp_path), "--rule", "atc", "--gantt"]) == 0
    assert len(read_runs(tmp_path / "runs.csv")) == 2
    assert (tmp_path / "gantt_1.csv").exists() and (tmp_path / "config.hash").exists()
    assert "seed=0" in capsys.readouterr().out


def test_cli_matrix(tmp_path):
    args = ["matrix", *cli_args(tmp_path), "--seeds", "0-5"]
    assert main(args) == 0
    assert (tmp_path / "report.csv").exists()


def test_cli_errors(tmp_path, capsys):
    assert main(["run", *cli_args(tmp_path), "--rule", "fifo"]) == 1
    assert main(["run", *cli_args(tmp_path), "--set", "no_such_key=1"]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 1
    with pytest.raises(SystemExit) as info:
        main(["run", "--mode", "greedy"])
    assert info.value.code == 2
