"""PDDL model, parser and canonical printer."""

from .model import (
    REQUIREMENTS,
    RESERVED_WORDS,
    ROOT_TYPE,
    ActionSchema,
    And,
    Atom,
    DomainSpec,
    EffectAnd,
    EffectExpr,
    EffectForall,
    EffectLiteral,
    Equality,
    Exists,
    Forall,
    Formula,
    GroundStep,
    Imply,
    IncreaseCost,
    Not,
    Or,
    PddlError,
    Plan,
    PredicateDecl,
    ProblemSpec,
    TypeHierarchy,
    When,
    is_identifier,
)
from .parser import parse_domain, parse_problem
from .printer import format_effect, format_formula, print_domain, print_plan, print_problem

__all__ = [
    "REQUIREMENTS",
    "RESERVED_WORDS",
    "ROOT_TYPE",
    "ActionSchema",
    "And",
    "Atom",
    "DomainSpec",
    "EffectAnd",
    "EffectExpr",
    "EffectForall",
    "EffectLiteral",
    "Equality",
    "Exists",
    "Forall",
    "Formula",
    "GroundStep",
    "Imply",
    "IncreaseCost",
    "Not",
    "Or",
    "PddlError",
    "Plan",
    "PredicateDecl",
    "ProblemSpec",
    "TypeHierarchy",
    "When",
    "format_effect",
    "format_formula",
    "is_identifier",
    "parse_domain",
    "parse_problem",
    "print_domain",
    "print_plan",
    "print_problem",
]
