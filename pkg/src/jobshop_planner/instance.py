"""Jobs, operations and the stochastic arrival stream."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .config import ConfigurationError, ScenarioConfig

WEIGHT_VALUES = (1, 2, 4)
WEIGHT_PROBS = (0.2, 0.6, 0.2)


@dataclass(frozen=True)
class Operation:
    job_id: int
    index: int
    machine_id: int
    proc_time: int


@dataclass(frozen=True)
class Job:
    job_id: int
    release_time: int
    due_date: int
    weight: float
    route: tuple[Operation, ...]

    @property
    def total_work(self) -> int:
        return sum(op.proc_time for op in self.route)

    @classmethod
    def build(cls, job_id: int, release: int, due: int, weight: float,
              route: Iterable[tuple[int, int]]) -> "Job":
        ops = tuple(Operation(job_id, k, m, p) for k, (m, p) in enumerate(route))
        if not ops:
            raise ConfigurationError(f"job {job_id} has an empty route")
        if due < release:
            raise ConfigurationError(f"job {job_id}: due date before release")
        return cls(job_id, release, due, weight, ops)


def mean_ops_per_job(config: ScenarioConfig) -> float:
    """Expected route length; routes never revisit a machine so lengths cap at machine_count."""
    lengths = np.arange(config.min_ops, config.max_ops + 1)
    return float(np.minimum(lengths, config.machine_count).mean())


def mean_job_work(config: ScenarioConfig) -> float:
    mean_proc = (config.min_proc + config.max_proc) / 2.0
    return mean_ops_per_job(config) * mean_proc


def arrival_rate(config: ScenarioConfig) -> float:
    """Poisson rate lambda = machine_count * utilization / mean job work."""
    if not 0.0 < config.utilization < 1.0:
        raise ConfigurationError(f"utilization must lie in (0, 1), got {config.utilization}")
    if config.machine_count < 1:
        raise ConfigurationError("machine_count must be >= 1")
    return config.machine_count * config.utilization / mean_job_work(config)


class ArrivalStream:
    """Time-ordered source of jobs, either generated lazily or replayed from a list."""

    def __init__(self, jobs: Iterator[Job]) -> None:
        self._it = jobs
        self._next: Job | None = next(self._it, None)
        self.emitted = 0

    @classmethod
    def from_jobs(cls, jobs: Iterable[Job]) -> "ArrivalStream":
        return cls(iter(list(jobs)))

    def peek_time(self) -> int | None:
        return None if self._next is None else self._next.release_time

    def pop(self) -> Job:
        job = self._next
        if job is None:
            raise StopIteration("arrival stream exhausted")
        self._next = next(self._it, None)
        self.emitted += 1
        return job

    def take(self, n: int) -> list[Job]:
        out = []
        while len(out) < n and self._next is not None:
            out.append(self.pop())
        return out


def _job_source(seed: int, config: ScenarioConfig) -> Iterator[Job]:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xA11]))
    scale = 1.0 / arrival_rate(config)
    now = 0.0
    job_id = 0
    while True:
        now += rng.exponential(scale)
        release = int(np.floor(now + 0.5))
        n_ops = int(rng.integers(config.min_ops, config.max_ops + 1))
        n_ops = min(n_ops, config.machine_count)
        machines = rng.choice(config.machine_count, size=n_ops, replace=False)
        procs = rng.integers(config.min_proc, config.max_proc + 1, size=n_ops)
        if config.weighted:
            weight = float(rng.choice(WEIGHT_VALUES, p=WEIGHT_PROBS))
        else:
            weight = 1.0
        total = int(procs.sum())
        due = release + int(round(config.due_date_factor * total))
        yield Job.build(job_id, release, due, weight,
                        zip(machines.tolist(), procs.tolist()))
        job_id += 1


def generate_instance(seed: int, config: ScenarioConfig) -> ArrivalStream:
    """Deterministic, unbounded arrival stream for ``seed`` under ``config``."""
    arrival_rate(config)  # validates utilization / machine count
    return ArrivalStream(_job_source(seed, config))


def instance_digest(jobs: Iterable[Job]) -> str:
    h = hashlib.sha256()
    for job in jobs:
        h.update(repr((job.release_time, job.due_date, job.weight,
                       [(o.machine_id, o.proc_time) for o in job.route])).encode())
    return h.hexdigest()[:16]


def export_instance(path: str | Path, jobs: list[Job], machine_count: int,
                    seed: int, config_hash: str) -> None:
    """Write jobs in the line format ``release due weight m:p m:p ...``."""
    lines = [f"machines={machine_count} seed={seed} config={config_hash} jobs={len(jobs)}"]
    for job in jobs:
        route = " ".join(f"{o.machine_id}:{o.proc_time}" for o in job.route)
        weight = int(job.weight) if float(job.weight).is_integer() else job.weight
        lines.append(f"{job.release_time} {job.due_date} {weight} {route}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def import_instance(path: str | Path) -> tuple[dict[str, str], list[Job]]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ConfigurationError(f"{path}: empty instance file")
    header = dict(tok.split("=", 1) for tok in text[0].split())
    jobs = []
    for job_id, line in enumerate(l for l in text[1:] if l.strip()):
        parts = line.split()
        try:
            release, due, weight = int(parts[0]), int(parts[1]), float(parts[2])
            route = [tuple(int(x) for x in tok.split(":")) for tok in parts[3:]]
        except (ValueError, IndexError) as exc:
            raise ConfigurationError(f"{path}: malformed job line {job_id + 2}: {line!r}") from exc
        jobs.append(Job.build(job_id, release, due, weight, route))
    return header, jobs
