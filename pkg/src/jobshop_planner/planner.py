"""Online decision loop: simulate the shop and plan every dispatch."""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass, field

from . import accel, mcts
from .config import ConfigurationError, InvalidActionError, PlannerConfig, ScenarioConfig
from .evaluation import TardinessResult, tardiness
from .heuristics import rollout_policy
from .instance import ArrivalStream, Operation, generate_instance, instance_digest
from .rng import SplitMix64, stream_seed
from .sim import DecisionPoint, GanttRecord, ShopState, SimulationEnd, advance, apply_action

BACKENDS = ("kernel", "python")


def default_backend() -> str:
    if os.environ.get("JOBSHOP_PLANNER_PURE") or not accel.available():
        return "python"
    return "kernel"


@dataclass
class RunResult:
    gantt: GanttRecord
    tardiness: TardinessResult
    trace: list[tuple[int, float]] | None
    timing: list[float] = field(default_factory=list)
    searches: int = 0
    reused: int = 0
    saved_iterations: int = 0
    backend: str = "python"
    instance_hash: str = ""

    @property
    def mean_tardiness(self) -> float:
        return self.tardiness.mean_weighted_tardiness

    def timing_ms(self) -> tuple[float, float]:
        """Mean and standard deviation of per-search wall time in milliseconds."""
        if not self.timing:
            return 0.0, 0.0
        ms = [t * 1000.0 for t in self.timing]
        return statistics.fmean(ms), (statistics.pstdev(ms) if len(ms) > 1 else 0.0)


def _decision_key(state: ShopState, decision: DecisionPoint) -> tuple:
    return state.signature(), decision.machine_id, tuple(op.job_id for op in decision.candidates)


def carry_subtree(tree, action: Operation, state: ShopState, decision: DecisionPoint):
    """Subtree under ``action`` if it was built from exactly this live decision, else None."""
    if tree is None:
        return None
    key = action.job_id if tree.backend == "kernel" else action
    sig = tree.child_signature(key)
    if sig is None or sig != _decision_key(state, decision):
        return None
    return tree.reroot(key)


class Planner:
    """Chooses dispatches for one run, holding the rng streams and the carried tree."""

    def __init__(self, config: PlannerConfig, seed: int, backend: str | None = None) -> None:
        self.config = config
        self.params = config.effective_params
        self.backend = backend or default_backend()
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"unknown backend {self.backend!r}")
        if self.backend == "kernel" and not accel.available():
            raise ConfigurationError("compiled kernel requested but not built")
        self.rollout_rng = SplitMix64(stream_seed(seed, "rollout"))
        self.policy = rollout_policy(config.rule, SplitMix64(stream_seed(seed, "policy")))
        self.tree = None
        self.last_action: Operation | None = None
        self.timing: list[float] = []
        self.searches = 0
        self.reused = 0
        self.saved_iterations = 0

    def _search(self, state: ShopState, decision: DecisionPoint, reused):
        if self.backend == "kernel":
            return accel.kernel_search(state, decision, self.config.rule, self.params,
                                       self.rollout_rng, reused)
        return mcts.search(state, decision, self.config.rule, self.params, self.rollout_rng,
                           reused)

    def choose(self, decision: DecisionPoint, state: ShopState) -> Operation:
        cands = decision.candidates
        if self.config.mode == "policy_only":
            return self.policy(decision, state)
        if len(cands) == 1:
            # the carried tree stays valid: lookahead clones dispatch singletons the same way
            return cands[0]
        reused = None
        if self.tree is not None and self.last_action is not None:
            reused = carry_subtree(self.tree, self.last_action, state, decision)
            if reused is not None:
                self.reused += 1
                self.saved_iterations += min(reused.root_visits, self.params.n_mcts)
        t0 = time.perf_counter()
        result = self._search(state, decision, reused)
        self.timing.append(time.perf_counter() - t0)
        self.searches += 1
        self.tree = result.tree
        self.last_action = result.chosen
        return result.chosen


def run(stream: ArrivalStream, planner: PlannerConfig, seed: int,
        scenario: ScenarioConfig | None = None, *, trace: bool | None = None,
        backend: str | None = None) -> RunResult:
    """Simulate from an empty shop until every warm-up and measured job has completed."""
    scenario = scenario or ScenarioConfig()
    trace = scenario.trace if trace is None else trace
    lo = scenario.warmup_jobs
    hi = lo + scenario.measured_jobs
    state = ShopState.initial(scenario.machine_count, stream, stop_after=hi,
                              record_gantt=True, measured=(lo, hi), trace=trace)
    agent = Planner(planner, seed, backend)
    auto = planner.auto_dispatch_singletons
    while True:
        ev = advance(state, auto_dispatch=auto)
        if ev is SimulationEnd:
            break
        action = agent.choose(ev, state)
        if action not in ev.candidates:
            raise InvalidActionError("planner returned an action outside the live candidates")
        apply_action(state, ev, action)
    measured = [job for job in state.released if lo <= job.job_id < hi]
    quota = sorted((job for job in state.released if job.job_id < hi), key=lambda j: j.job_id)
    result = tardiness(state.gantt, measured, weighted=scenario.weighted)
    return RunResult(
        gantt=state.gantt,
        tardiness=result,
        trace=state.trace,
        timing=agent.timing,
        searches=agent.searches,
        reused=agent.reused,
        saved_iterations=agent.saved_iterations,
        backend=agent.backend,
        instance_hash=instance_digest(quota),
    )


def run_seed(scenario: ScenarioConfig, mode: str, rule: str, seed: int, *,
             trace: bool | None = None, backend: str | None = None, **overrides) -> RunResult:
    """Run one (mode, rule, seed) cell on the scenario's arrival stream for ``seed``."""
    cfg = scenario.planner(mode, rule, **overrides)
    return run(generate_instance(seed, scenario), cfg, seed, scenario, trace=trace, backend=backend)
