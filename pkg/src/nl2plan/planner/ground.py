"""Grounding: compile a domain/problem pair into a propositional task.

Variables are substituted with type-compatible objects, quantifiers are
expanded over the object universe, and disjunctive conditions are
compiled to alternative ground bodies (one ground action per body).
Atoms of static predicates (never added or deleted by any action) are
evaluated against the initial state during compilation and never enter
the atom table. A delete-free reachability pass then discards ground
actions that can never fire.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..pddl.model import (
    Atom,
    ActionSchema,
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
    ProblemSpec,
    When,
)

# A conjunctive condition over atom ids: (required true, required false).
Body = tuple[frozenset[int], frozenset[int]]


class GroundingLimitError(Exception):
    """Raised when grounding exceeds the configured atom or action caps."""


@dataclass(frozen=True)
class CondEffect:
    """Conditional effect: fires when any body holds in the pre-state."""

    conditions: tuple[Body, ...]
    adds: frozenset[int]
    dels: frozenset[int]


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: frozenset[int]
    pre_neg: frozenset[int]
    adds: frozenset[int]
    dels: frozenset[int]
    cond_effects: tuple[CondEffect, ...] = ()
    cost: int = 1

    @property
    def label(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"


@dataclass
class GroundTask:
    atoms: list[Atom]
    atom_index: dict[Atom, int]
    actions: list[GroundAction]
    init: frozenset[int]
    goal_bodies: tuple[Body, ...]
    objects: tuple[tuple[str, str], ...]
    stats: dict[str, int] = field(default_factory=dict)

    def satisfies_goal(self, state: frozenset[int]) -> bool:
        return any(pos <= state and not (neg & state) for pos, neg in self.goal_bodies)


def applicable(action: GroundAction, state: frozenset[int]) -> bool:
    return action.pre_pos <= state and not (action.pre_neg & state)


def successor(action: GroundAction, state: frozenset[int]) -> frozenset[int]:
    """Apply ``action``; conditional effects trigger on the PRE state."""
    if not applicable(action, state):
        raise ValueError(f"action {action.label} is not applicable")
    adds = set(action.adds)
    dels = set(action.dels)
    for ce in action.cond_effects:
        if any(pos <= state and not (neg & state) for pos, neg in ce.conditions):
            adds |= ce.adds
            dels |= ce.dels
    return frozenset((state - dels) | adds)


# ---------------------------------------------------------------------------
# Formula compilation: ground literal DNF with static evaluation


class _Compiler:
    def __init__(
        self,
        objects_by_type: dict[str, list[str]],
        static_preds: frozenset[str],
        static_facts: frozenset[Atom],
        cap: int,
    ):
        self.objects_by_type = objects_by_type
        self.static_preds = static_preds
        self.static_facts = static_facts
        self.cap = cap

    def dnf(self, f: Formula, env: dict[str, str], positive: bool) -> list[tuple[frozenset[Atom], frozenset[Atom]]]:
        """DNF of ``f`` (or its negation) as (pos, neg) ground literal sets."""
        TRUE = [(frozenset(), frozenset())]
        FALSE: list[tuple[frozenset[Atom], frozenset[Atom]]] = []
        if isinstance(f, Atom):
            ground = Atom(f.predicate, tuple(env.get(t, t) for t in f.terms))
            if ground.predicate in self.static_preds:
                holds = ground in self.static_facts
                return TRUE if holds == positive else FALSE
            if positive:
                return [(frozenset([ground]), frozenset())]
            return [(frozenset(), frozenset([ground]))]
        if isinstance(f, Equality):
            left = env.get(f.left, f.left)
            right = env.get(f.right, f.right)
            return TRUE if (left == right) == positive else FALSE
        if isinstance(f, Not):
            return self.dnf(f.body, env, not positive)
        if isinstance(f, (And, Or)):
            conjunctive = isinstance(f, And) == positive
            parts = [self.dnf(p, env, positive) for p in f.parts]
            return self._conjoin(parts) if conjunctive else self._disjoin(parts)
        if isinstance(f, Imply):
            rewritten = Or((Not(f.antecedent), f.consequent))
            return self.dnf(rewritten, env, positive)
        if isinstance(f, (Forall, Exists)):
            conjunctive = isinstance(f, Forall) == positive
            parts = [
                self.dnf(f.body, sub_env, positive)
                for sub_env in self._expansions(f.variables, env)
            ]
            return self._conjoin(parts) if conjunctive else self._disjoin(parts)
        raise TypeError(f"not a formula: {f!r}")

    def _expansions(self, variables, env):
        names = [v for v, _ in variables]
        pools = [self.objects_by_type.get(t, []) for _, t in variables]
        for combo in itertools.product(*pools):
            sub = dict(env)
            sub.update(zip(names, combo))
            yield sub

    def _conjoin(self, parts):
        acc = [(frozenset(), frozenset())]
        for part in parts:
            if not part:
                return []
            merged = []
            seen = set()
            for pos_a, neg_a in acc:
                for pos_b, neg_b in part:
                    pos = pos_a | pos_b
                    neg = neg_a | neg_b
                    if pos & neg:
                        continue
                    key = (pos, neg)
                    if key not in seen:
                        seen.add(key)
                        merged.append(key)
            if len(merged) > self.cap:
                raise GroundingLimitError(
                    f"condition expands to more than {self.cap} alternatives"
                )
            acc = merged
        return acc

    def _disjoin(self, parts):
        out = []
        seen = set()
        for part in parts:
            for body in part:
                if body not in seen:
                    seen.add(body)
                    out.append(body)
        return out


# ---------------------------------------------------------------------------
# Grounding


def ground(
    domain: DomainSpec,
    problem: ProblemSpec,
    max_atoms: int = 1_000_000,
    max_actions: int = 1_000_000,
) -> GroundTask:
    hierarchy = domain.hierarchy
    objects_by_type: dict[str, list[str]] = {t: [] for t in hierarchy.types}
    for name, typ in problem.objects:
        for sup in hierarchy.ancestors(typ):
            objects_by_type[sup].append(name)

    static_preds = _static_predicates(domain)
    static_facts = frozenset(a for a in problem.init if a.predicate in static_preds)
    compiler = _Compiler(objects_by_type, static_preds, static_facts, max_actions)

    candidates: list[GroundAction] = []
    for schema in domain.actions:
        candidates.extend(
            _instantiate(schema, compiler, objects_by_type, max_actions, len(candidates))
        )

    init_atoms = frozenset(a for a in problem.init if a.predicate not in static_preds)
    reached, fired = _relaxed_fixpoint(init_atoms, candidates, max_atoms)

    atoms = sorted(reached, key=lambda a: (a.predicate, a.terms))
    atom_index = {a: i for i, a in enumerate(atoms)}

    actions = [
        _trim(c, atom_index) for keep, c in zip(fired, candidates) if keep
    ]
    init = frozenset(atom_index[a] for a in init_atoms)

    goal_bodies = []
    for pos, neg in compiler.dnf(problem.goal, {}, True):
        if not all(a in atom_index for a in pos):
            continue  # positive literal can never become true
        body = (
            frozenset(atom_index[a] for a in pos),
            frozenset(atom_index[a] for a in neg if a in atom_index),
        )
        if body not in goal_bodies:
            goal_bodies.append(body)

    return GroundTask(
        atoms=atoms,
        atom_index=atom_index,
        actions=actions,
        init=init,
        goal_bodies=tuple(goal_bodies),
        objects=problem.objects,
        stats={"candidates": len(candidates)},
    )


def _static_predicates(domain: DomainSpec) -> frozenset[str]:
    touched: set[str] = set()

    def walk(eff: EffectExpr) -> None:
        if isinstance(eff, EffectLiteral):
            touched.add(eff.atom.predicate)
        elif isinstance(eff, EffectAnd):
            for p in eff.parts:
                walk(p)
        elif isinstance(eff, EffectForall):
            walk(eff.body)
        elif isinstance(eff, When):
            walk(eff.effect)

    for action in domain.actions:
        walk(action.effect)
    return frozenset(p.name for p in domain.predicates if p.name not in touched)


def _instantiate(
    schema: ActionSchema,
    compiler: _Compiler,
    objects_by_type: dict[str, list[str]],
    max_actions: int,
    already: int,
):
    out: list[GroundAction] = []
    pools = [objects_by_type.get(t, []) for _, t in schema.params]
    names = [v for v, _ in schema.params]
    for combo in itertools.product(*pools):
        env = dict(zip(names, combo))
        pre_bodies = compiler.dnf(schema.precondition, env, True)
        if not pre_bodies:
            continue
        adds, dels, conds, cost = _ground_effect(schema.effect, env, compiler)
        for pos, neg in pre_bodies:
            out.append(
                GroundAction(
                    name=schema.name,
                    args=tuple(combo),
                    pre_pos=pos,
                    pre_neg=neg,
                    adds=frozenset(adds),
                    dels=frozenset(dels),
                    cond_effects=tuple(conds),
                    cost=cost,
                )
            )
            if already + len(out) > max_actions:
                raise GroundingLimitError(
                    f"more than {max_actions} ground actions; raise the cap or shrink the task"
                )
    return out


def _ground_effect(eff: EffectExpr, env: dict[str, str], compiler: _Compiler):
    """Returns (adds, dels, conditional effects, cost); cost 1 if no increase."""
    adds: set[Atom] = set()
    dels: set[Atom] = set()
    conds: list[CondEffect] = []
    cost_parts: list[int] = []

    def walk(e: EffectExpr, env: dict[str, str]) -> None:
        if isinstance(e, EffectLiteral):
            ground = Atom(e.atom.predicate, tuple(env.get(t, t) for t in e.atom.terms))
            (dels if e.negated else adds).add(ground)
        elif isinstance(e, EffectAnd):
            for p in e.parts:
                walk(p, env)
        elif isinstance(e, EffectForall):
            for sub_env in compiler._expansions(e.variables, env):
                walk(e.body, sub_env)
        elif isinstance(e, When):
            bodies = compiler.dnf(e.condition, env, True)
            sub_adds, sub_dels, sub_conds, _ = _ground_effect(e.effect, env, compiler)
            if bodies == [(frozenset(), frozenset())]:
                adds.update(sub_adds)
                dels.update(sub_dels)
                conds.extend(sub_conds)
            elif bodies:
                raw = tuple((pos, neg) for pos, neg in bodies)
                if sub_adds or sub_dels:
                    conds.append(CondEffect(raw, frozenset(sub_adds), frozenset(sub_dels)))
                for inner in sub_conds:
                    merged = _and_bodies(raw, inner.conditions)
                    if merged:
                        conds.append(CondEffect(merged, inner.adds, inner.dels))
        elif isinstance(e, IncreaseCost):
            cost_parts.append(e.amount)
        else:
            raise TypeError(f"not an effect: {e!r}")

    walk(eff, env)
    cost = sum(cost_parts) if cost_parts else 1
    # Conditional effects here still hold raw Atom sets; ids come later.
    return adds, dels, conds, cost


def _and_bodies(outer, inner):
    merged = []
    for pos_a, neg_a in outer:
        for pos_b, neg_b in inner:
            pos = pos_a | pos_b
            neg = neg_a | neg_b
            if not (pos & neg):
                merged.append((pos, neg))
    return tuple(merged)


def _relaxed_fixpoint(init_atoms, candidates, max_atoms):
    reached: set[Atom] = set(init_atoms)
    fired = [False] * len(candidates)
    changed = True
    while changed:
        changed = False
        for i, action in enumerate(candidates):
            if not all(a in reached for a in action.pre_pos):
                continue
            fired[i] = True
            new = [a for a in action.adds if a not in reached]
            for ce in action.cond_effects:
                if any(all(a in reached for a in pos) for pos, _ in ce.conditions):
                    new.extend(a for a in ce.adds if a not in reached)
            if new:
                reached.update(new)
                changed = True
                if len(reached) > max_atoms:
                    raise GroundingLimitError(
                        f"more than {max_atoms} ground atoms; raise the cap or shrink the task"
                    )
    return reached, fired


def _trim(c: GroundAction, atom_index: dict[Atom, int]) -> GroundAction:
    """Rewrite a fired candidate over atom ids, dropping never-true atoms."""
    conds = []
    for ce in c.cond_effects:
        bodies = []
        for pos, neg in ce.conditions:
            if all(a in atom_index for a in pos):
                bodies.append(
                    (
                        frozenset(atom_index[a] for a in pos),
                        frozenset(atom_index[a] for a in neg if a in atom_index),
                    )
                )
        adds = frozenset(atom_index[a] for a in ce.adds if a in atom_index)
        dels = frozenset(atom_index[a] for a in ce.dels if a in atom_index)
        if bodies and (adds or dels):
            conds.append(CondEffect(tuple(bodies), adds, dels))
    return GroundAction(
        name=c.name,
        args=c.args,
        pre_pos=frozenset(atom_index[a] for a in c.pre_pos),
        pre_neg=frozenset(atom_index[a] for a in c.pre_neg if a in atom_index),
        adds=frozenset(atom_index[a] for a in c.adds if a in atom_index),
        dels=frozenset(atom_index[a] for a in c.dels if a in atom_index),
        cond_effects=tuple(conds),
        cost=c.cost,
    )
