"""Tardiness and robustness metrics over realized or simulated schedules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .config import EvaluationError
from .instance import Job
from .sim import GanttRecord


@dataclass
class TardinessResult:
    per_job: list[tuple[int, float]]
    mean_weighted_tardiness: float

    @property
    def total(self) -> float:
        return sum(v for _, v in self.per_job)


@dataclass
class RobustnessResult:
    R: float
    horizon_used: float


def tardiness(gantt: GanttRecord, jobs: Iterable[Job], weighted: bool = True) -> TardinessResult:
    """Mean of w_i * max(c_i - d_i, 0) over ``jobs``; unweighted forces w_i = 1."""
    last_op: dict[int, tuple[int, int]] = {}
    for _, job_id, op, _, end in gantt.entries:
        prev = last_op.get(job_id)
        if prev is None or op > prev[0]:
            last_op[job_id] = (op, end)
    per_job = []
    for job in jobs:
        done = last_op.get(job.job_id)
        if done is None or done[0] != len(job.route) - 1:
            raise EvaluationError(f"job {job.job_id} is not complete in the schedule")
        w = job.weight if weighted else 1.0
        late = done[1] - job.due_date
        per_job.append((job.job_id, w * late if late > 0 else 0.0))
    mean = sum(v for _, v in per_job) / len(per_job) if per_job else 0.0
    return TardinessResult(per_job, mean)


def idleness_weight(t: float, beta: float) -> float:
    """w(t) = min(0, t/beta - 1): early idleness is penalized most."""
    return min(0.0, t / beta - 1.0)


def _weighted_idle(a: float, b: float, beta: float) -> float:
    # closed form of the integral of w over [a, b] with 0 <= a <= b <= beta
    return -((b - a) - (b * b - a * a) / (2.0 * beta))


def robustness(gantt: GanttRecord, machine_count: int, beta: float, origin: float = 0.0) -> RobustnessResult:
    """Weighted machine idleness over [origin, origin + min(T, beta)].

    Idleness is measured from ``origin`` up to the schedule's makespan, so a
    machine that finishes early (or never works) stays idle until the last
    operation anywhere ends.
    """
    horizon = min(gantt.horizon - origin, beta)
    if horizon <= 0:
        return RobustnessResult(0.0, 0.0)
    busy = gantt.by_machine()
    R = 0.0
    for m in range(machine_count):
        cursor = 0.0
        for s, e in busy.get(m, []):
            s = max(s - origin, 0.0)
            e = min(e - origin, horizon)
            if e <= s:
                continue
            if s > cursor:
                R += _weighted_idle(cursor, s, beta)
            cursor = max(cursor, e)
        if cursor < horizon:
            R += _weighted_idle(cursor, horizon, beta)
    return RobustnessResult(R, horizon)
