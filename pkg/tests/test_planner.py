import pytest

from jobshop_planner import accel
from jobshop_planner.config import ConfigurationError, ScenarioConfig
from jobshop_planner.heuristics import rollout_policy
from jobshop_planner.instance import ArrivalStream, Job, generate_instance
from jobshop_planner.planner import Planner, run, run_seed
from jobshop_planner.sim import ShopState, run_policy

from oracles import gantt_violations

SMALL = ScenarioConfig.desk(warmup_jobs=20, measured_jobs=40, n_mcts=30)
BACKENDS = ["python"] + (["kernel"] if accel.available() else [])


def test_policy_only_is_the_rule():
    res = run_seed(SMALL, "policy_only", "spt", 3)
    state = ShopState.initial(10, generate_instance(3, SMALL), stop_after=60)
    assert res.gantt.entries == run_policy(state, rollout_policy("spt")).gantt.entries
    assert res.searches == 0


@pytest.mark.parametrize("backend", BACKENDS)
def test_vanilla_equals_dyro_at_alpha_one(backend):
    a = run_seed(SMALL, "vanilla_mcts", "random", 1, backend=backend)
    b = run_seed(SMALL, "dyro_mcts", "random", 1, backend=backend, alpha=1.0)
    assert a.gantt.entries == b.gantt.entries


@pytest.mark.parametrize("backend", BACKENDS)
def test_runs_are_deterministic_and_valid(backend):
    a = run_seed(SMALL, "dyro_mcts", "random", 4, backend=backend)
    b = run_seed(SMALL, "dyro_mcts", "random", 4, backend=backend)
    assert a.gantt.entries == b.gantt.entries
    assert a.mean_tardiness == b.mean_tardiness
    jobs = generate_instance(4, SMALL).take(200)
    done = {j for _, j, _, _, _ in a.gantt.entries}
    assert gantt_violations(a.gantt, [j for j in jobs if j.job_id in done], must_finish=set(range(60))) == []
    assert len(a.tardiness.per_job) == 40
    assert a.searches == len(a.timing) > 0


@pytest.mark.skipif(not accel.available(), reason="compiled kernel not built")
@pytest.mark.parametrize("mode,rule", [("dyro_mcts", "random"), ("vanilla_mcts", "atc"), ("dyro_mcts", "holthaus2")])
def test_backends_produce_identical_runs(mode, rule):
    a = run_seed(SMALL, mode, rule, 2, backend="python", trace=True)
    b = run_seed(SMALL, mode, rule, 2, backend="kernel", trace=True)
    assert a.gantt.entries == b.gantt.entries
    assert a.trace == b.trace
    assert (a.reused, a.saved_iterations) == (b.reused, b.saved_iterations)
    assert a.instance_hash == b.instance_hash


def test_different_seeds_differ():
    a = run_seed(SMALL, "dyro_mcts", "random", 0)
    b = run_seed(SMALL, "dyro_mcts", "random", 1)
    assert a.instance_hash != b.instance_hash


def test_trace_has_one_point_per_measured_job():
    res = run_seed(SMALL, "policy_only", "spt", 0, trace=True)
    assert [k for k, _ in res.trace] == list(range(40))
    # cumulative measured tardiness seen at each measured arrival
    values = [v for _, v in res.trace]
    assert values == sorted(values)
    assert values[-1] <= res.mean_tardiness * 40 + 1e-9


def test_reuse_saves_iterations_without_arrivals():
    # three jobs all queued on M0 at t=0, no further arrivals: the second search starts
    # from the subtree grown under the first choice
    jobs = [Job.build(i, 0, 20 + i, 1.0, [(0, 3 + i), (1, 2)]) for i in range(3)]
    cfg = ScenarioConfig(machine_count=2, warmup_jobs=0, measured_jobs=3, n_mcts=40)
    res = run(ArrivalStream.from_jobs(jobs), cfg.planner("dyro_mcts", "spt"), 0, cfg, backend="python")
    assert res.searches == 2 and res.reused == 1
    assert 0 < res.saved_iterations < 40


def test_no_reuse_when_new_jobs_arrive():
    jobs = [Job.build(0, 0, 30, 1.0, [(0, 5), (1, 2)]), Job.build(1, 0, 30, 1.0, [(0, 4), (1, 2)]),
            Job.build(2, 3, 30, 1.0, [(0, 1)]), Job.build(3, 3, 30, 1.0, [(0, 2)])]
    cfg = ScenarioConfig(machine_count=2, warmup_jobs=0, measured_jobs=4, n_mcts=40)
    res = run(ArrivalStream.from_jobs(jobs), cfg.planner("dyro_mcts", "spt"), 0, cfg, backend="python")
    # searches at t=0 {0, 1}, t=4 {0, 2, 3} and t=5 {0, 3}: the t=4 tree never saw jobs 2
    # and 3, so only the last search reuses
    assert [e for e in res.gantt.entries if e[0] == 0][:2] == [(0, 1, 0, 0, 4), (0, 2, 0, 4, 5)]
    assert res.searches == 3 and res.reused == 1


def test_unknown_backend_rejected():
    with pytest.raises(ConfigurationError):
        Planner(SMALL.planner("dyro_mcts", "random"), 0, backend="gpu")


def test_timing_summary():
    res = run_seed(SMALL, "dyro_mcts", "random", 0)
    mean, std = res.timing_ms()
    assert mean > 0 and std >= 0
    assert run_seed(SMALL, "policy_only", "spt", 0).timing_ms() == (0.0, 0.0)
