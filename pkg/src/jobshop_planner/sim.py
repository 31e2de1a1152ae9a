"""Discrete-event job shop simulation driven by dispatch decisions.

Events at equal timestamps are processed completions first (ascending
machine id), then arrivals (ascending job id). Decision points are then
surfaced for idle machines with a nonempty buffer in ascending machine id.
All times are integers.
"""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .config import InvalidActionError
from .instance import ArrivalStream, Job, Operation


def _by_job(op: Operation) -> int:
    return op.job_id


@dataclass
class MachineState:
    machine_id: int
    current: Operation | None = None
    start: int = 0
    finish: int = 0
    buffer: list[Operation] = field(default_factory=list)

    @property
    def idle(self) -> bool:
        return self.current is None

    def copy(self) -> "MachineState":
        return MachineState(self.machine_id, self.current, self.start, self.finish, list(self.buffer))


@dataclass
class Lookahead:
    """Accumulators carried by a lookahead clone, relative to its origin clock."""

    origin: int
    beta: float
    n_jobs: int
    tardiness: float = 0.0
    busy: float = 0.0

    def weight_integral(self, x: float) -> float:
        # integral of (1 - t/beta) over [0, x], x <= beta
        return x - x * x / (2.0 * self.beta)

    def add_busy(self, start: int, finish: int) -> None:
        s = start - self.origin
        if s < self.beta:
            e = finish - self.origin
            if e > self.beta:
                e = self.beta
            self.busy += self.weight_integral(e) - self.weight_integral(s)

    def outcome(self, end_clock: int, machine_count: int) -> tuple[float, float]:
        """(mean weighted tardiness of lookahead jobs, weighted-idleness robustness)."""
        t_mean = self.tardiness / self.n_jobs if self.n_jobs > 0 else 0.0
        h = end_clock - self.origin
        if h > self.beta:
            h = self.beta
        robustness = -(machine_count * self.weight_integral(h) - self.busy)
        if robustness > 0.0:
            robustness = 0.0
        return t_mean, robustness


@dataclass
class GanttRecord:
    entries: list[tuple[int, int, int, int, int]] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return max((e[4] for e in self.entries), default=0)

    def completion_times(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, job, _, _, end in self.entries:
            if end > out.get(job, -1):
                out[job] = end
        return out

    def by_machine(self) -> dict[int, list[tuple[int, int]]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for m, _, _, s, e in self.entries:
            out.setdefault(m, []).append((s, e))
        for ivs in out.values():
            ivs.sort()
        return out

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["machine", "job", "op", "start", "end"])
            w.writerows(self.entries)

    @classmethod
    def from_csv(cls, path: str | Path) -> "GanttRecord":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return cls([(int(r["machine"]), int(r["job"]), int(r["op"]), int(r["start"]), int(r["end"]))
                    for r in rows])


@dataclass
class DecisionPoint:
    state: "ShopState"
    machine_id: int
    candidates: tuple[Operation, ...]

    @property
    def clock(self) -> int:
        return self.state.clock


class _End:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "SimulationEnd"

    def __bool__(self) -> bool:
        return False


SimulationEnd = _End()
Event = Union[DecisionPoint, _End]


@dataclass
class ShopState:
    machines: list[MachineState]
    clock: int = 0
    stream: ArrivalStream | None = None
    jobs: dict[int, Job] = field(default_factory=dict)
    progress: dict[int, int] = field(default_factory=dict)
    completed: list[tuple[int, int]] = field(default_factory=list)
    released: list[Job] = field(default_factory=list)
    stop_after: int | None = None
    quota_done: int = 0
    gantt: GanttRecord | None = None
    look: Lookahead | None = None
    measured: tuple[int, int] | None = None
    measured_tardiness: float = 0.0
    trace: list[tuple[int, float]] | None = None

    @classmethod
    def initial(cls, machine_count: int, stream: ArrivalStream | None = None,
                stop_after: int | None = None, record_gantt: bool = True,
                measured: tuple[int, int] | None = None, trace: bool = False) -> "ShopState":
        return cls(
            machines=[MachineState(m) for m in range(machine_count)],
            stream=stream,
            stop_after=stop_after,
            gantt=GanttRecord() if record_gantt else None,
            measured=measured,
            trace=[] if trace else None,
        )

    @classmethod
    def from_jobs(cls, machine_count: int, jobs: list[Job], **kw) -> "ShopState":
        """Shop fed by a finite job list; runs until every job completes."""
        return cls.initial(machine_count, ArrivalStream.from_jobs(jobs), **kw)

    @property
    def machine_count(self) -> int:
        return len(self.machines)

    def finished(self) -> bool:
        return self.stop_after is not None and self.quota_done >= self.stop_after

    def copy(self) -> "ShopState":
        """Independent copy; the arrival stream, if any, is shared and must not be consumed."""
        look = None
        if self.look is not None:
            lk = self.look
            look = Lookahead(lk.origin, lk.beta, lk.n_jobs, lk.tardiness, lk.busy)
        return ShopState(
            machines=[m.copy() for m in self.machines],
            clock=self.clock,
            stream=self.stream,
            jobs=dict(self.jobs),
            progress=dict(self.progress),
            completed=list(self.completed),
            released=list(self.released),
            stop_after=self.stop_after,
            quota_done=self.quota_done,
            gantt=GanttRecord(list(self.gantt.entries)) if self.gantt is not None else None,
            look=look,
            measured=self.measured,
            measured_tardiness=self.measured_tardiness,
            trace=list(self.trace) if self.trace is not None else None,
        )

    def signature(self) -> tuple:
        """Structural projection used to test whether two states are the same shop."""
        busy = tuple(
            None if m.current is None else (m.current.job_id, m.current.index, m.finish)
            for m in self.machines
        )
        buffers = tuple(tuple(op.job_id for op in m.buffer) for m in self.machines)
        prog = tuple(sorted(self.progress.items()))
        return (self.clock, busy, buffers, prog)


# -- event handlers ---------------------------------------------------------

def _dispatch(state: ShopState, machine: MachineState, op: Operation) -> None:
    machine.buffer.remove(op)
    machine.current = op
    machine.start = state.clock
    machine.finish = state.clock + op.proc_time
    if state.look is not None:
        state.look.add_busy(machine.start, machine.finish)


def _enqueue(state: ShopState, op: Operation) -> None:
    bisect.insort(state.machines[op.machine_id].buffer, op, key=_by_job)


def _complete(state: ShopState, machine: MachineState) -> None:
    op = machine.current
    machine.current = None
    if state.gantt is not None:
        state.gantt.entries.append((machine.machine_id, op.job_id, op.index, machine.start, machine.finish))
    job = state.jobs[op.job_id]
    nxt = op.index + 1
    if nxt < len(job.route):
        state.progress[op.job_id] = nxt
        _enqueue(state, job.route[nxt])
        return
    # job done
    del state.jobs[op.job_id]
    del state.progress[op.job_id]
    c = state.clock
    state.completed.append((op.job_id, c))
    late = c - job.due_date
    wt = job.weight * late if late > 0 else 0.0
    if state.look is not None:
        state.look.tardiness += wt
    if state.stop_after is not None and op.job_id < state.stop_after:
        state.quota_done += 1
    if state.measured is not None and state.measured[0] <= op.job_id < state.measured[1]:
        state.measured_tardiness += wt


def _arrive(state: ShopState, job: Job) -> None:
    state.jobs[job.job_id] = job
    state.progress[job.job_id] = 0
    state.released.append(job)
    if state.trace is not None and state.measured is not None:
        lo, hi = state.measured
        if lo <= job.job_id < hi:
            state.trace.append((job.job_id - lo, state.measured_tardiness))
    _enqueue(state, job.route[0])


def advance(state: ShopState, auto_dispatch: bool = True) -> Event:
    """Run events until a dispatch choice is required or the run ends."""
    machines = state.machines
    while True:
        if state.finished():
            return SimulationEnd
        for m in machines:
            if m.current is None and m.buffer:
                if auto_dispatch and len(m.buffer) == 1:
                    _dispatch(state, m, m.buffer[0])
                    continue
                return DecisionPoint(state, m.machine_id, tuple(m.buffer))
        t = None
        for m in machines:
            if m.current is not None and (t is None or m.finish < t):
                t = m.finish
        stream = state.stream
        ta = stream.peek_time() if stream is not None else None
        if ta is not None and (t is None or ta < t):
            t = ta
        if t is None:
            return SimulationEnd
        assert t >= state.clock, "event in the past"
        state.clock = t
        for m in machines:
            if m.current is not None and m.finish == t:
                _complete(state, m)
        if stream is not None:
            while stream.peek_time() == t:
                _arrive(state, stream.pop())


def apply_action(state: ShopState, decision: DecisionPoint, chosen: Operation) -> ShopState:
    """Start ``chosen`` on the decision's idle machine at the current clock."""
    if chosen not in decision.candidates:
        raise InvalidActionError(f"{chosen} is not a candidate at machine {decision.machine_id}")
    machine = state.machines[decision.machine_id]
    if machine.current is not None or chosen not in machine.buffer:
        raise InvalidActionError("decision point is stale for this state")
    _dispatch(state, machine, chosen)
    return state


def clone_for_lookahead(state: ShopState, beta: float = 800.0, record_gantt: bool = False) -> ShopState:
    """Deep copy restricted to jobs already in the shop (no future arrivals)."""
    clone = ShopState(
        machines=[m.copy() for m in state.machines],
        clock=state.clock,
        jobs=dict(state.jobs),
        progress=dict(state.progress),
        gantt=GanttRecord() if record_gantt else None,
    )
    clone.look = Lookahead(origin=state.clock, beta=float(beta), n_jobs=len(state.jobs))
    for m in clone.machines:
        if m.current is not None:
            clone.look.add_busy(state.clock, m.finish)
    return clone


def run_policy(state: ShopState, choose, auto_dispatch: bool = True) -> ShopState:
    """Drive ``state`` to its end, asking ``choose(decision, state)`` at each decision point."""
    while True:
        ev = advance(state, auto_dispatch)
        if ev is SimulationEnd:
            return state
        apply_action(state, ev, choose(ev, state))
