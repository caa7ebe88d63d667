"""Plan validation by simulating a plan against the lifted model.

Works directly on the domain/problem (no grounding pass), so it serves
as an independent check on planner output: substitute each step's
arguments, evaluate the precondition in the current state, apply the
effects, and finally test the goal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from ..pddl.model import (
    Atom,
    And,
    DomainSpec,
    EffectAnd,
    EffectExpr,
    EffectForall,
    EffectLiteral,
    Equality,
    Exists,
    Forall,
    Formula,
    Imply,
    IncreaseCost,
    Not,
    Or,
    Plan,
    ProblemSpec,
    When,
)
from ..pddl.printer import format_formula


@dataclass(frozen=True)
class PlanVerdict:
    valid: bool
    failed_step: Optional[int] = None  # 1-based; None for a goal failure
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def validate_plan(domain: DomainSpec, problem: ProblemSpec, plan: Plan) -> PlanVerdict:
    hierarchy = domain.hierarchy
    object_types = dict(problem.objects)
    objects_by_type: dict[str, list[str]] = {t: [] for t in hierarchy.types}
    for name, typ in problem.objects:
        for sup in hierarchy.ancestors(typ):
            objects_by_type[sup].append(name)

    state = set(problem.init)
    for number, step in enumerate(plan.steps, start=1):
        schema = domain.action(step.action)
        if schema is None:
            return PlanVerdict(False, number, f"unknown action '{step.action}'")
        if len(step.args) != len(schema.params):
            return PlanVerdict(
                False, number,
                f"'{step.action}' takes {len(schema.params)} argument(s), got {len(step.args)}",
            )
        env: dict[str, str] = {}
        for arg, (var, typ) in zip(step.args, schema.params):
            arg_type = object_types.get(arg)
            if arg_type is None:
                return PlanVerdict(False, number, f"unknown object '{arg}'")
            if not hierarchy.is_subtype(arg_type, typ):
                return PlanVerdict(
                    False, number,
                    f"object '{arg}' has type '{arg_type}', but '{var}' expects '{typ}'",
                )
            env[var] = arg

        failing = _first_unsatisfied(schema.precondition, env, state, objects_by_type)
        if failing is not None:
            return PlanVerdict(
                False, number,
                f"precondition of '{step.action}' not satisfied: {failing}",
            )
        adds, dels = _effect_changes(schema.effect, env, state, objects_by_type)
        state -= dels
        state |= adds

    failing = _first_unsatisfied(problem.goal, {}, state, objects_by_type)
    if failing is not None:
        return PlanVerdict(False, None, f"goal not satisfied: {failing}")
    return PlanVerdict(True)


def holds(
    f: Formula,
    env: dict[str, str],
    state: set[Atom],
    objects_by_type: dict[str, list[str]],
) -> bool:
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(env.get(t, t) for t in f.terms)) in state
    if isinstance(f, Equality):
        return env.get(f.left, f.left) == env.get(f.right, f.right)
    if isinstance(f, Not):
        return not holds(f.body, env, state, objects_by_type)
    if isinstance(f, And):
        return all(holds(p, env, state, objects_by_type) for p in f.parts)
    if isinstance(f, Or):
        return any(holds(p, env, state, objects_by_type) for p in f.parts)
    if isinstance(f, Imply):
        return (not holds(f.antecedent, env, state, objects_by_type)) or holds(
            f.consequent, env, state, objects_by_type
        )
    if isinstance(f, (Forall, Exists)):
        combos = _bindings(f.variables, env, objects_by_type)
        if isinstance(f, Forall):
            return all(holds(f.body, e, state, objects_by_type) for e in combos)
        return any(holds(f.body, e, state, objects_by_type) for e in combos)
    raise TypeError(f"not a formula: {f!r}")


def _bindings(variables, env, objects_by_type):
    names = [v for v, _ in variables]
    pools = [objects_by_type.get(t, []) for _, t in variables]
    for combo in itertools.product(*pools):
        child = dict(env)
        child.update(zip(names, combo))
        yield child


def _first_unsatisfied(f, env, state, objects_by_type) -> Optional[str]:
    """Human-readable pinpoint of the first failing conjunct, else None."""
    if holds(f, env, state, objects_by_type):
        return None
    if isinstance(f, And):
        for part in f.parts:
            if not holds(part, env, state, objects_by_type):
                return _first_unsatisfied(part, env, state, objects_by_type)
    bound = _substitute(f, env)
    return format_formula(bound)


def _substitute(f: Formula, env: dict[str, str]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(env.get(t, t) for t in f.terms))
    if isinstance(f, Equality):
        return Equality(env.get(f.left, f.left), env.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(_substitute(f.body, env))
    if isinstance(f, And):
        return And(tuple(_substitute(p, env) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_substitute(p, env) for p in f.parts))
    if isinstance(f, Imply):
        return Imply(_substitute(f.antecedent, env), _substitute(f.consequent, env))
    if isinstance(f, Forall):
        return Forall(f.variables, _substitute(f.body, _without(env, f.variables)))
    if isinstance(f, Exists):
        return Exists(f.variables, _substitute(f.body, _without(env, f.variables)))
    raise TypeError(f"not a formula: {f!r}")


def _without(env, variables):
    shadowed = {v for v, _ in variables}
    return {k: v for k, v in env.items() if k not in shadowed}


def _effect_changes(
    eff: EffectExpr,
    env: dict[str, str],
    pre_state: set[Atom],
    objects_by_type: dict[str, list[str]],
) -> tuple[set[Atom], set[Atom]]:
    adds: set[Atom] = set()
    dels: set[Atom] = set()

    def walk(e: EffectExpr, env: dict[str, str]) -> None:
        if isinstance(e, EffectLiteral):
            ground = Atom(e.atom.predicate, tuple(env.get(t, t) for t in e.atom.terms))
            (dels if e.negated else adds).add(ground)
        elif isinstance(e, EffectAnd):
            for p in e.parts:
                walk(p, env)
        elif isinstance(e, EffectForall):
            for child in _bindings(e.variables, env, objects_by_type):
                walk(e.body, child)
        elif isinstance(e, When):
            if holds(e.condition, env, pre_state, objects_by_type):
                walk(e.effect, env)
        elif isinstance(e, IncreaseCost):
            pass
        else:
            raise TypeError(f"not an effect: {e!r}")

    walk(eff, env)
    return adds, dels


def plan_cost(domain: DomainSpec, plan: Plan) -> int:
    """Sum of per-step action costs (1 per step when a schema has no increase)."""
    total = 0
    for step in plan.steps:
        schema = domain.action(step.action)
        amounts = _cost_amounts(schema.effect) if schema else []
        total += sum(amounts) if amounts else 1
    return total


def _cost_amounts(eff: EffectExpr) -> list[int]:
    if isinstance(eff, IncreaseCost):
        return [eff.amount]
    if isinstance(eff, EffectAnd):
        return [a for p in eff.parts for a in _cost_amounts(p)]
    if isinstance(eff, EffectForall):
        return _cost_amounts(eff.body)
    if isinstance(eff, When):
        return _cost_amounts(eff.effect)
    return []
