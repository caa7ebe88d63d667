"""Draft artifacts: parsed but not yet validated model pieces.

Drafts hold raw s-expression trees so the validator can inspect
structure that the strict model builders would reject outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .pddl.model import PredicateDecl, TypeHierarchy
from .pddl.sexpr import SExpr


@dataclass
class PredicateDraft:
    name: str
    params: list[tuple[str, Optional[str]]] = field(default_factory=list)
    description: str = ""

    def as_decl(self) -> PredicateDecl:
        params = tuple((v, t or "object") for v, t in self.params)
        return PredicateDecl(self.name, params, self.description)


@dataclass
class ActionDraft:
    name: str
    params: list[tuple[str, Optional[str]]] = field(default_factory=list)
    precondition: Optional[SExpr] = None
    effect: Optional[SExpr] = None
    new_predicates: list[PredicateDraft] = field(default_factory=list)
    description: str = ""


@dataclass
class TaskDraft:
    objects: list[tuple[str, Optional[str]]] = field(default_factory=list)
    init: list[SExpr] = field(default_factory=list)
    goal: Optional[SExpr] = None


@dataclass
class DomainContext:
    """What the domain looks like so far while actions are being built."""

    hierarchy: TypeHierarchy
    predicates: dict[str, PredicateDecl] = field(default_factory=dict)
    action_names: list[str] = field(default_factory=list)
