"""Dispatching rules, their softmax priors, and rollout policies.

Every rule returns a score per candidate where higher is preferred; rules
defined as "smallest value first" are negated. The arithmetic below is
mirrored operation-for-operation in the compiled kernel, so keep the two in
step when editing a formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .config import RULE_IDS, ConfigurationError
from .instance import Operation
from .rng import SplitMix64
from .sim import DecisionPoint, ShopState

MANUAL_RULES = RULE_IDS[:-1]

ATC_K = 3.0
COVERT_K = 2.0

Policy = Callable[[DecisionPoint, ShopState], Operation]


@dataclass(frozen=True)
class PriorityScore:
    op: Operation
    score: float


def rule_code(rule: str) -> int:
    try:
        return RULE_IDS.index(rule.lower())
    except ValueError:
        raise ConfigurationError(f"unknown dispatching rule {rule!r}; choose from {RULE_IDS}") from None


def _winq(state: ShopState, op: Operation) -> int:
    route = state.jobs[op.job_id].route
    if op.index + 1 >= len(route):
        return 0
    nxt = state.machines[route[op.index + 1].machine_id]
    work = 0
    for b in nxt.buffer:
        work += b.proc_time
    if nxt.current is not None:
        work += nxt.finish - state.clock
    return work


def _score(code: int, op: Operation, state: ShopState, pbar: float) -> float:
    job = state.jobs[op.job_id]
    route = job.route
    t = state.clock
    pt = op.proc_time
    d = job.due_date
    if code == 0:  # SPT
        return float(-pt)
    if code == 1:  # SWINQ
        return float(-_winq(state, op))
    if code == 10:
        return 0.0
    rem = 0
    for o in route[op.index:]:
        rem += o.proc_time
    if code == 2:  # CR, highest first
        den = d - t
        if den == 0:
            den = 1
        return rem / den
    if code == 3:  # SL
        return float(-(d - t))
    if code == 4:  # ATC
        slack = d - t - rem
        if slack < 0:
            slack = 0
        return (job.weight / pt) * math.exp(-slack / (ATC_K * pbar))
    if code == 5:  # COVERT
        slack = d - t - rem
        if slack < 0:
            slack = 0
        return (job.weight / pt) * max(0.0, 1.0 - slack / (COVERT_K * rem))
    if code == 6:  # MOD
        r = job.release_time
        total = 0
        cum = 0
        for o in route:
            total += o.proc_time
            if o.index <= op.index:
                cum += o.proc_time
        od = r + ((d - r) * cum) / total
        return -max(float(t + pt), od)
    if code == 7:  # Anderson CR+PT
        return -((d - t) / rem + pt)
    if code == 8:  # Holthaus PT+WINQ+SL
        return float(-(pt + _winq(state, op) + (d - t)))
    if code == 9:  # Holthaus 2PT+WINQ+NPT
        npt = route[op.index + 1].proc_time if op.index + 1 < len(route) else 0
        return float(-(2 * pt + _winq(state, op) + npt))
    raise ConfigurationError(f"unknown rule code {code}")


def rank(rule: str, decision: DecisionPoint, state: ShopState | None = None) -> list[PriorityScore]:
    """Score every candidate at ``decision``; the argmax is the rule's dispatch choice."""
    code = rule_code(rule)
    state = decision.state if state is None else state
    cands = decision.candidates
    if not cands:
        raise ConfigurationError("decision point has no candidates")
    psum = 0
    for op in cands:
        psum += op.proc_time
    pbar = psum / len(cands)
    return [PriorityScore(op, _score(code, op, state, pbar)) for op in cands]


def argmax_index(values: Sequence[float]) -> int:
    """First index of the maximum (candidates are job-id ordered, so ties go to the lowest id)."""
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def to_prior(scores: Sequence[PriorityScore] | Sequence[float], temperature: float = 0.5) -> list[float]:
    """Softmax over min-max normalized scores."""
    vals = [s.score if isinstance(s, PriorityScore) else float(s) for s in scores]
    if not vals:
        raise ConfigurationError("cannot build a prior over zero candidates")
    n = len(vals)
    lo = min(vals)
    hi = max(vals)
    if not hi > lo:
        return [1.0 / n] * n
    span = hi - lo
    ex = [math.exp(((v - lo) / span - 1.0) / temperature) for v in vals]
    total = 0.0
    for e in ex:
        total += e
    return [e / total for e in ex]


def rule_prior(rule: str, temperature: float = 0.5) -> Callable[[DecisionPoint, ShopState], list[float]]:
    code = rule_code(rule)

    def prior(decision: DecisionPoint, state: ShopState) -> list[float]:
        if code == 10:
            n = len(decision.candidates)
            return [1.0 / n] * n
        return to_prior(rank(rule, decision, state), temperature)

    return prior


def rollout_policy(rule: str, rng: SplitMix64 | None = None) -> Policy:
    """Dispatch function choosing the rule's argmax (uniformly at random for ``random``)."""
    code = rule_code(rule)
    if code == 10:
        if rng is None:
            raise ConfigurationError("the random policy needs an rng")

        def choose_random(decision: DecisionPoint, state: ShopState) -> Operation:
            cands = decision.candidates
            if len(cands) == 1:
                return cands[0]
            return cands[rng.randbelow(len(cands))]

        choose_random.rule = rule
        choose_random.rng = rng
        return choose_random

    def choose(decision: DecisionPoint, state: ShopState) -> Operation:
        cands = decision.candidates
        if len(cands) == 1:
            return cands[0]
        scores = rank(rule, decision, state)
        return cands[argmax_index([s.score for s in scores])]

    choose.rule = rule
    choose.rng = None
    return choose
