"""Dynamic job shop scheduling with robustness-aware Monte Carlo tree search."""

from .config import (
    ConfigurationError,
    EvaluationError,
    InvalidActionError,
    PlannerConfig,
    ScenarioConfig,
    SearchParams,
)
from .instance import Job, Operation, generate_instance

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "EvaluationError",
    "InvalidActionError",
    "Job",
    "Operation",
    "PlannerConfig",
    "ScenarioConfig",
    "SearchParams",
    "generate_instance",
]
