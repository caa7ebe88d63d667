"""Forward state-space search over ground tasks.

Three modes: greedy best-first (default, guided by a heuristic), A*
(g + h), and uniform-cost ("bfs", ignores the heuristic; optimal on the
action costs). Ties break FIFO by generation order, which makes every
search deterministic. ``unsolvable`` is claimed only after the reachable
state space is exhausted; hitting a limit yields ``resource-limit``.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Optional

from ..pddl.model import GroundStep, Plan
from .ground import GroundTask, applicable, successor
from .heuristics import UNREACHABLE, make_heuristic

SEARCH_KINDS = ("gbfs", "astar", "bfs")
HEURISTIC_KINDS = ("ff", "goal-count")


@dataclass(frozen=True)
class PlannerConfig:
    search: str = "gbfs"
    heuristic: str = "ff"
    max_expansions: int = 1_000_000
    timeout_s: float = 60.0

    def __post_init__(self):
        if self.search not in SEARCH_KINDS:
            raise ValueError(f"unknown search '{self.search}'")
        if self.heuristic not in HEURISTIC_KINDS:
            raise ValueError(f"unknown heuristic '{self.heuristic}'")
        if self.max_expansions <= 0 or self.timeout_s <= 0:
            raise ValueError("limits must be positive")


@dataclass
class SearchStats:
    expansions: int = 0
    generated: int = 0
    seconds: float = 0.0


@dataclass
class PlanResult:
    outcome: str  # "plan" | "unsolvable" | "resource-limit"
    plan: Optional[Plan] = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def user_message(self) -> str:
        if self.outcome == "plan":
            assert self.plan is not None
            return f"Plan found ({len(self.plan.steps)} steps, cost {self.plan.cost})"
        if self.outcome == "unsolvable":
            return "No plan found"
        return "Search gave up before exhausting the state space (resource limit)"


def solve(task: GroundTask, config: PlannerConfig = PlannerConfig()) -> PlanResult:
    start = time.monotonic()
    stats = SearchStats()
    heuristic = None
    if config.search in ("gbfs", "astar"):
        heuristic = make_heuristic(task, config.heuristic)

    def priority(state, g):
        if config.search == "bfs":
            return g
        h = heuristic(state)
        if h == UNREACHABLE:
            return None
        return h if config.search == "gbfs" else g + h

    init = task.init
    parents: dict[frozenset[int], tuple[frozenset[int], int]] = {}
    best_g = {init: 0}
    closed: set[frozenset[int]] = set()
    counter = 0
    open_heap: list[tuple[float, int, frozenset[int], int]] = []
    p0 = priority(init, 0)
    if p0 is not None:
        heapq.heappush(open_heap, (p0, counter, init, 0))
    stats.generated = 1

    while open_heap:
        if stats.expansions >= config.max_expansions:
            return _limit(stats, start)
        if stats.expansions % 256 == 0 and time.monotonic() - start > config.timeout_s:
            return _limit(stats, start)

        _, _, state, g = heapq.heappop(open_heap)
        if state in closed:
            continue
        closed.add(state)

        if task.satisfies_goal(state):
            plan = _reconstruct(task, parents, state)
            stats.seconds = time.monotonic() - start
            _assert_sound(task, plan)
            return PlanResult("plan", plan, stats)

        stats.expansions += 1
        for idx, action in enumerate(task.actions):
            if not applicable(action, state):
                continue
            nxt = successor(action, state)
            if nxt in closed:
                continue
            g2 = g + action.cost
            known = best_g.get(nxt)
            if known is not None and known <= g2 and config.search != "gbfs":
                continue
            if known is not None and config.search == "gbfs":
                continue
            best_g[nxt] = g2
            p = priority(nxt, g2)
            if p is None:
                continue
            counter += 1
            parents[nxt] = (state, idx)
            heapq.heappush(open_heap, (p, counter, nxt, g2))
            stats.generated += 1

    stats.seconds = time.monotonic() - start
    return PlanResult("unsolvable", None, stats)


def _limit(stats: SearchStats, start: float) -> PlanResult:
    stats.seconds = time.monotonic() - start
    return PlanResult("resource-limit", None, stats)


def _reconstruct(task: GroundTask, parents, state) -> Plan:
    indices = []
    while state in parents:
        state, idx = parents[state]
        indices.append(idx)
    indices.reverse()
    steps = tuple(
        GroundStep(task.actions[i].name, task.actions[i].args) for i in indices
    )
    cost = sum(task.actions[i].cost for i in indices)
    return Plan(steps, cost)


def _assert_sound(task: GroundTask, plan: Plan) -> None:
    """Internal cross-check: the plan must simulate from init to a goal state."""
    state = task.init
    by_label: dict[tuple[str, tuple[str, ...]], list] = {}
    for action in task.actions:
        by_label.setdefault((action.name, action.args), []).append(action)
    for step in plan.steps:
        options = [
            a for a in by_label.get((step.action, step.args), ())
            if applicable(a, state)
        ]
        assert options, f"planner produced inapplicable step {step}"
        state = successor(options[0], state)
    assert task.satisfies_goal(state), "planner produced a non-goal plan"
