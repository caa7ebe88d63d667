"""Typed in-memory representation of the supported PDDL fragment.

All values are immutable after construction and safe to share between
threads. Structural checks (tree-shaped type hierarchy, declared
predicates, bound variables, matching arities) live in ``checks.py`` and
are enforced by the parser; the dataclasses themselves stay dumb.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

ROOT_TYPE = "object"

# Every domain is printed with this fixed requirements line; it covers the
# full fragment the generator can ever emit.
REQUIREMENTS = (
    ":strips",
    ":typing",
    ":equality",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":universal-preconditions",
    ":conditional-effects",
    ":existential-preconditions",
    ":action-costs",
)

RESERVED_WORDS = frozenset(
    {
        "and", "or", "not", "imply", "forall", "exists", "when", "increase",
        "define", "domain", "problem", "object", "either", "total-cost", "=",
    }
)


def is_identifier(name: str) -> bool:
    """Valid PDDL identifier: letters, digits, ``_`` and ``-``, led by a letter."""
    if not name or not name[0].isalpha():
        return False
    return all(c.isalnum() or c in "_-" for c in name)


class PddlError(Exception):
    """Parse or structural error with source position and a one-line hint."""

    def __init__(self, message: str, line: int = 0, col: int = 0, hint: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.hint = hint
        where = f" (line {line}, col {col})" if line else ""
        suffix = f" Hint: {hint}" if hint else ""
        super().__init__(f"{message}{where}.{suffix}")


# ---------------------------------------------------------------------------
# Type hierarchy


@dataclass(frozen=True)
class TypeHierarchy:
    """Single-inheritance type tree rooted at ``object``.

    ``parent`` maps every declared type (never the root itself) to its
    parent; insertion order is the declaration order used when printing.
    """

    parent: dict[str, str] = field(default_factory=dict)
    description: dict[str, str] = field(default_factory=dict)

    @property
    def types(self) -> tuple[str, ...]:
        return (ROOT_TYPE, *self.parent.keys())

    def has_type(self, name: str) -> bool:
        return name == ROOT_TYPE or name in self.parent

    def ancestors(self, name: str) -> Iterator[str]:
        """Yield ``name`` and every ancestor up to and including the root."""
        while name != ROOT_TYPE:
            yield name
            name = self.parent[name]
        yield ROOT_TYPE

    def is_subtype(self, sub: str, sup: str) -> bool:
        """Reflexive: true iff ``sup`` lies on the parent chain of ``sub``."""
        if not self.has_type(sub):
            raise PddlError(f"undeclared type '{sub}'")
        if not self.has_type(sup):
            raise PddlError(f"undeclared type '{sup}'")
        return sup in self.ancestors(sub)

    def children(self, name: str) -> list[str]:
        return [t for t, p in self.parent.items() if p == name]

    def validate(self) -> None:
        for name, par in self.parent.items():
            if not is_identifier(name):
                raise PddlError(f"invalid type name '{name}'")
            if name == ROOT_TYPE:
                raise PddlError("the built-in root type cannot be redeclared")
            if par != ROOT_TYPE and par not in self.parent:
                raise PddlError(f"type '{name}' has undeclared parent '{par}'")
        for name in self.parent:
            seen = set()
            cur = name
            while cur != ROOT_TYPE:
                if cur in seen:
                    raise PddlError(f"type hierarchy contains a cycle through '{name}'")
                seen.add(cur)
                cur = self.parent[cur]


# ---------------------------------------------------------------------------
# Formulas (preconditions and goals)


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple[str, ...] = ()


@dataclass(frozen=True)
class Equality:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Imply:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Forall:
    variables: tuple[tuple[str, str], ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    variables: tuple[tuple[str, str], ...]
    body: "Formula"


Formula = Union[Atom, Equality, Not, And, Or, Imply, Forall, Exists]


# ---------------------------------------------------------------------------
# Effects


@dataclass(frozen=True)
class EffectLiteral:
    """An added atom, or a deleted one when ``negated``."""

    atom: Atom
    negated: bool = False


@dataclass(frozen=True)
class EffectAnd:
    parts: tuple["EffectExpr", ...] = ()


@dataclass(frozen=True)
class EffectForall:
    variables: tuple[tuple[str, str], ...]
    body: "EffectExpr"


@dataclass(frozen=True)
class When:
    condition: Formula
    effect: "EffectExpr"


@dataclass(frozen=True)
class IncreaseCost:
    amount: int = 1


EffectExpr = Union[EffectLiteral, EffectAnd, EffectForall, When, IncreaseCost]


# ---------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[tuple[str, str], ...] = ()
    description: str = ""

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    precondition: Formula
    effect: EffectExpr
    description: str = ""


@dataclass(frozen=True)
class DomainSpec:
    name: str
    hierarchy: TypeHierarchy = field(default_factory=TypeHierarchy)
    predicates: tuple[PredicateDecl, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    requirements: tuple[str, ...] = REQUIREMENTS

    def predicate(self, name: str) -> Optional[PredicateDecl]:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def action(self, name: str) -> Optional[ActionSchema]:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    @property
    def uses_costs(self) -> bool:
        return any(_effect_has_cost(a.effect) for a in self.actions)


def _effect_has_cost(eff: EffectExpr) -> bool:
    if isinstance(eff, IncreaseCost):
        return True
    if isinstance(eff, EffectAnd):
        return any(_effect_has_cost(p) for p in eff.parts)
    if isinstance(eff, EffectForall):
        return _effect_has_cost(eff.body)
    if isinstance(eff, When):
        return _effect_has_cost(eff.effect)
    return False


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()
    init: tuple[Atom, ...] = ()
    goal: Formula = And(())
    total_cost_init: Optional[int] = None

    def object_type(self, name: str) -> Optional[str]:
        for obj, typ in self.objects:
            if obj == name:
                return typ
        return None


@dataclass(frozen=True)
class GroundStep:
    action: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundStep, ...] = ()
    cost: int = 0
