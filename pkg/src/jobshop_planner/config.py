"""Configuration objects and error types shared across the package."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml


class ConfigurationError(ValueError):
    """Raised for invalid scenario, planner or rule settings."""


class InvalidActionError(ValueError):
    """Raised when a dispatch choice is not among the decision's candidates."""


class EvaluationError(ValueError):
    """Raised when a metric is requested over an incomplete schedule."""


OBJECTIVES = ("T_mean", "WT_mean")
MODES = ("policy_only", "vanilla_mcts", "dyro_mcts")
SELECTION_CRITERIA = ("visit_count", "value")
RULE_IDS = (
    "spt", "swinq", "cr", "sl", "atc", "covert", "mod",
    "anderson", "holthaus1", "holthaus2", "random",
)


@dataclass(frozen=True)
class SearchParams:
    alpha: float = 0.6
    beta: float = 800.0
    c: float = 3.0
    n_mcts: int = 100
    selection_criterion: str = "visit_count"
    temperature: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta <= 0:
            raise ConfigurationError(f"beta must be positive, got {self.beta}")
        if self.c < 0:
            raise ConfigurationError(f"c must be nonnegative, got {self.c}")
        if self.n_mcts < 1:
            raise ConfigurationError(f"n_mcts must be positive, got {self.n_mcts}")
        if self.selection_criterion not in SELECTION_CRITERIA:
            raise ConfigurationError(f"unknown selection criterion {self.selection_criterion!r}")
        if self.temperature <= 0:
            raise ConfigurationError("temperature must be positive")


@dataclass(frozen=True)
class PlannerConfig:
    mode: str = "dyro_mcts"
    rule: str = "random"
    params: SearchParams = field(default_factory=SearchParams)
    auto_dispatch_singletons: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown planner mode {self.mode!r}")
        if self.rule.lower() not in RULE_IDS:
            raise ConfigurationError(f"unknown dispatching rule {self.rule!r}")

    @property
    def effective_params(self) -> SearchParams:
        """Vanilla MCTS is the robustness-aware search with alpha pinned to 1."""
        if self.mode == "vanilla_mcts":
            return replace(self.params, alpha=1.0)
        return self.params


@dataclass
class ScenarioConfig:
    machine_count: int = 10
    utilization: float = 0.85
    objective: str = "T_mean"
    warmup_jobs: int = 1000
    measured_jobs: int = 5000
    due_date_factor: float = 1.5
    min_ops: int = 2
    max_ops: int = 10
    min_proc: int = 1
    max_proc: int = 99
    modes: list[str] = field(default_factory=lambda: list(MODES))
    rules: list[str] = field(default_factory=lambda: ["random"])
    seeds: list[int] = field(default_factory=lambda: list(range(30)))
    validation_seed_offset: int = 10_000
    alpha: float = 0.6
    beta: float = 800.0
    c: float = 3.0
    n_mcts: int = 100
    selection_criterion: str = "visit_count"
    temperature: float = 0.5
    auto_dispatch_singletons: bool = True
    trace: bool = False

    def __post_init__(self) -> None:
        self.validate()

    @classmethod
    def desk(cls, **overrides: Any) -> "ScenarioConfig":
        """Desk-scale protocol: 200 warm-up jobs and 500 measured jobs."""
        kw: dict[str, Any] = dict(warmup_jobs=200, measured_jobs=500)
        kw.update(overrides)
        return cls(**kw)

    def validate(self) -> None:
        if not 0.0 < self.utilization < 1.0:
            raise ConfigurationError(f"utilization must lie in (0, 1), got {self.utilization}")
        if self.machine_count < 1:
            raise ConfigurationError("machine_count must be >= 1")
        if self.objective not in OBJECTIVES:
            raise ConfigurationError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.warmup_jobs < 0 or self.measured_jobs < 1:
            raise ConfigurationError("warmup_jobs must be >= 0 and measured_jobs >= 1")
        if self.due_date_factor <= 0:
            raise ConfigurationError("due_date_factor must be positive")
        if not 1 <= self.min_ops <= self.max_ops:
            raise ConfigurationError("need 1 <= min_ops <= max_ops")
        if not 1 <= self.min_proc <= self.max_proc:
            raise ConfigurationError("need 1 <= min_proc <= max_proc")
        for mode in self.modes:
            if mode not in MODES:
                raise ConfigurationError(f"unknown planner mode {mode!r}")
        for rule in self.rules:
            if rule.lower() not in RULE_IDS:
                raise ConfigurationError(f"unknown dispatching rule {rule!r}; choose from {RULE_IDS}")
        self.search_params()

    @property
    def weighted(self) -> bool:
        return self.objective == "WT_mean"

    def search_params(self, **overrides: Any) -> SearchParams:
        kw = dict(
            alpha=self.alpha,
            beta=self.beta,
            c=self.c,
            n_mcts=self.n_mcts,
            selection_criterion=self.selection_criterion,
            temperature=self.temperature,
        )
        kw.update(overrides)
        return SearchParams(**kw)

    def planner(self, mode: str, rule: str, **overrides: Any) -> PlannerConfig:
        return PlannerConfig(
            mode=mode,
            rule=rule,
            params=self.search_params(**overrides),
            auto_dispatch_singletons=self.auto_dispatch_singletons,
        )

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        return replace(self, **overrides)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def instance_hash(self) -> str:
        """Hash of the fields that determine the arrival stream."""
        keys = ("machine_count", "utilization", "objective", "due_date_factor",
                "min_ops", "max_ops", "min_proc", "max_proc")
        blob = json.dumps({k: getattr(self, k) for k in keys}, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: expected a mapping at top level")
        return cls.from_dict(data)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)
