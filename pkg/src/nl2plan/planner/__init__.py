"""Embedded classical planner: grounding, heuristic search, plan validation."""

from .ground import (
    CondEffect,
    GroundAction,
    GroundTask,
    GroundingLimitError,
    applicable,
    ground,
    successor,
)
from .heuristics import UNREACHABLE, FfHeuristic, goal_count, make_heuristic
from .plan_check import PlanVerdict, plan_cost, validate_plan
from .search import PlanResult, PlannerConfig, SearchStats, solve


def plan_task(domain, problem, config: PlannerConfig = PlannerConfig()) -> PlanResult:
    """Ground, search, and cross-check the plan against the lifted model."""
    task = ground(domain, problem)
    result = solve(task, config)
    if result.outcome == "plan":
        verdict = validate_plan(domain, problem, result.plan)
        assert verdict.valid, f"planner returned an invalid plan: {verdict.reason}"
    return result


__all__ = [
    "CondEffect",
    "FfHeuristic",
    "GroundAction",
    "GroundTask",
    "GroundingLimitError",
    "PlanResult",
    "PlanVerdict",
    "PlannerConfig",
    "SearchStats",
    "UNREACHABLE",
    "applicable",
    "goal_count",
    "ground",
    "make_heuristic",
    "plan_cost",
    "plan_task",
    "solve",
    "successor",
    "validate_plan",
]
