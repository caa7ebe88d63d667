"""Canonical PDDL printer.

Formatting rules: 2-space indent, lowercase keywords, declaration order
preserved, one type/object/predicate per line. Descriptions are emitted
as ``;`` comments in the positions the parser reads them back from, so
``parse(print(x))`` reproduces ``x`` exactly and printing is a fixpoint.
"""

from __future__ import annotations

from .model import (
    ROOT_TYPE,
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


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return _format_atom(f)
    if isinstance(f, Equality):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(format_formula(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(format_formula(p) for p in f.parts) + ")"
    if isinstance(f, Imply):
        return f"(imply {format_formula(f.antecedent)} {format_formula(f.consequent)})"
    if isinstance(f, Forall):
        return f"(forall ({_format_vars(f.variables)}) {format_formula(f.body)})"
    if isinstance(f, Exists):
        return f"(exists ({_format_vars(f.variables)}) {format_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def format_effect(e: EffectExpr) -> str:
    if isinstance(e, EffectLiteral):
        text = _format_atom(e.atom)
        return f"(not {text})" if e.negated else text
    if isinstance(e, EffectAnd):
        return "(and " + " ".join(format_effect(p) for p in e.parts) + ")"
    if isinstance(e, EffectForall):
        return f"(forall ({_format_vars(e.variables)}) {format_effect(e.body)})"
    if isinstance(e, When):
        return f"(when {format_formula(e.condition)} {format_effect(e.effect)})"
    if isinstance(e, IncreaseCost):
        return f"(increase (total-cost) {e.amount})"
    raise TypeError(f"not an effect: {e!r}")


def _format_atom(a: Atom) -> str:
    if not a.terms:
        return f"({a.predicate})"
    return f"({a.predicate} " + " ".join(a.terms) + ")"


def _format_vars(variables: tuple[tuple[str, str], ...]) -> str:
    return " ".join(f"{v} - {t}" for v, t in variables)


def _comment(text: str) -> str:
    return " ; " + " ".join(text.split()) if text.strip() else ""


def print_domain(domain: DomainSpec) -> str:
    lines = [f"(define (domain {domain.name})"]
    lines.append("  (:requirements " + " ".join(domain.requirements) + ")")

    if domain.hierarchy.parent:
        lines.append("  (:types")
        for name, parent in domain.hierarchy.parent.items():
            desc = domain.hierarchy.description.get(name, "")
            lines.append(f"    {name} - {parent}{_comment(desc)}")
        lines.append("  )")

    if domain.predicates:
        lines.append("  (:predicates")
        for decl in domain.predicates:
            params = _format_vars(decl.params)
            inner = f"({decl.name} {params})" if params else f"({decl.name})"
            lines.append(f"    {inner}{_comment(decl.description)}")
        lines.append("  )")

    if domain.uses_costs:
        lines.append("  (:functions (total-cost))")

    for action in domain.actions:
        lines.append("")
        if action.description.strip():
            lines.append("  ; " + " ".join(action.description.split()))
        lines.append(f"  (:action {action.name}")
        lines.append(f"    :parameters ({_format_vars(action.params)})")
        lines.append(f"    :precondition {format_formula(action.precondition)}")
        lines.append(f"    :effect {format_effect(action.effect)}")
        lines.append("  )")

    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(problem: ProblemSpec) -> str:
    lines = [f"(define (problem {problem.name})"]
    lines.append(f"  (:domain {problem.domain_name})")

    lines.append("  (:objects")
    for name, typ in problem.objects:
        lines.append(f"    {name} - {typ}")
    lines.append("  )")

    lines.append("  (:init")
    if problem.total_cost_init is not None:
        lines.append(f"    (= (total-cost) {problem.total_cost_init})")
    for atom in problem.init:
        lines.append(f"    {_format_atom(atom)}")
    lines.append("  )")

    lines.append(f"  (:goal {format_formula(problem.goal)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_plan(plan: Plan) -> str:
    """One step per line, trailing cost comment; the common exchange format."""
    lines = [f"({step.action}" + ("".join(" " + a for a in step.args)) + ")"
             for step in plan.steps]
    lines.append(f"; cost = {plan.cost}")
    return "\n".join(lines) + "\n"
