"""Search heuristics over ground tasks.

Both heuristics return 0 exactly when the state satisfies the goal and
``UNREACHABLE`` when the delete relaxation proves the goal out of reach
(sound for dead-end pruning). Negative literals are ignored inside the
relaxation, as usual for delete-free reasoning.
"""

from __future__ import annotations

from .ground import GroundAction, GroundTask

UNREACHABLE = float("inf")


def goal_count(task: GroundTask, state: frozenset[int]) -> float:
    """Number of unsatisfied goal literals, minimized over goal bodies."""
    if not task.goal_bodies:
        return UNREACHABLE
    best = min(
        sum(1 for a in pos if a not in state) + sum(1 for a in neg if a in state)
        for pos, neg in task.goal_bodies
    )
    return float(best)


class _Achiever:
    """Delete-free view of one way a ground action can add atoms."""

    __slots__ = ("action_id", "pre", "adds")

    def __init__(self, action_id: int, pre: frozenset[int], adds: frozenset[int]):
        self.action_id = action_id
        self.pre = pre
        self.adds = adds


def build_achievers(task: GroundTask) -> list[_Achiever]:
    out: list[_Achiever] = []
    for i, action in enumerate(task.actions):
        if action.adds:
            out.append(_Achiever(i, action.pre_pos, action.adds))
        for ce in action.cond_effects:
            if not ce.adds:
                continue
            for pos, _ in ce.conditions:
                out.append(_Achiever(i, action.pre_pos | pos, ce.adds))
    return out


class FfHeuristic:
    """Length of a relaxed plan extracted from a delete-free exploration."""

    def __init__(self, task: GroundTask):
        self.task = task
        self.achievers = build_achievers(task)

    def __call__(self, state: frozenset[int]) -> float:
        if self.task.satisfies_goal(state):
            return 0.0
        supporter: dict[int, _Achiever] = {}
        reached = set(state)
        frontier = True
        while frontier:
            frontier = False
            for ach in self.achievers:
                if ach.pre <= reached:
                    for atom in ach.adds:
                        if atom not in reached:
                            reached.add(atom)
                            supporter[atom] = ach
                            frontier = True

        best = UNREACHABLE
        for pos, _neg in self.task.goal_bodies:
            if not pos <= reached:
                continue
            count = self._extract(pos, state, supporter)
            best = min(best, count)
        if best is UNREACHABLE or best == UNREACHABLE:
            return UNREACHABLE
        # The goal is not truly satisfied (negative literals), so never say 0.
        return max(best, 1.0)

    def _extract(self, goal_pos, state, supporter) -> float:
        used: set[int] = set()
        stack = [a for a in goal_pos if a not in state]
        seen = set(stack)
        while stack:
            atom = stack.pop()
            ach = supporter[atom]
            used.add(ach.action_id)
            for pre_atom in ach.pre:
                if pre_atom not in state and pre_atom not in seen:
                    seen.add(pre_atom)
                    stack.append(pre_atom)
        return float(len(used))


def make_heuristic(task: GroundTask, kind: str):
    if kind == "ff":
        return FfHeuristic(task)
    if kind == "goal-count":
        return lambda state: goal_count(task, state)
    raise ValueError(f"unknown heuristic '{kind}'")
