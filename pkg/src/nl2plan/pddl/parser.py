"""Parser for the supported PDDL fragment.

Builds :mod:`nl2plan.pddl.model` values from source text, enforcing the
structural invariants (tree hierarchy, declared predicates, matching
arities, bound variables). Errors carry line/column and a one-line hint
so they can be reused verbatim as feedback text.

Comments double as descriptions: a trailing ``;`` comment on a type,
object, or predicate line becomes its description, and the comment block
immediately above an ``(:action`` form becomes the action description.
"""

from __future__ import annotations

from typing import Optional

from .model import (
    ROOT_TYPE,
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
    PddlError,
    PredicateDecl,
    ProblemSpec,
    TypeHierarchy,
    When,
    is_identifier,
)
from .sexpr import SExpr, SList, SToken, SourceUnit, head_of, read_source

DOMAIN_SECTIONS = {":requirements", ":types", ":predicates", ":functions", ":action"}
PROBLEM_SECTIONS = {":domain", ":objects", ":init", ":goal"}
CONNECTIVES = {"and", "or", "not", "imply", "forall", "exists", "when", "increase", "="}


def _expect_list(expr: SExpr, what: str) -> SList:
    if not isinstance(expr, SList):
        raise PddlError(f"expected {what}", expr.line, expr.col,
                        hint=f"found '{expr.text}' where a parenthesized {what} belongs")
    return expr


def _expect_name(expr: SExpr, what: str) -> SToken:
    if not isinstance(expr, SToken):
        raise PddlError(f"expected {what}", expr.line, expr.col,
                        hint=f"found a list where a {what} belongs")
    if not is_identifier(expr.text):
        raise PddlError(f"invalid {what} '{expr.text}'", expr.line, expr.col,
                        hint="identifiers start with a letter and use letters, digits, '_' or '-'")
    return expr


def parse_typed_names(items: tuple[SExpr, ...], what: str) -> list[tuple[SToken, str]]:
    """Parse ``a b - t c - t2 d`` into (token, type) pairs; bare names get ``object``."""
    out: list[tuple[SToken, str]] = []
    pending: list[SToken] = []
    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, SToken) and item.text == "-":
            if not pending:
                raise PddlError(f"dangling '-' in {what} list", item.line, item.col,
                                hint="write 'name - type'")
            if i + 1 >= len(items):
                raise PddlError(f"missing type after '-' in {what} list", item.line, item.col,
                                hint="write 'name - type'")
            typ = _expect_name(items[i + 1], "type name").text
            out.extend((tok, typ) for tok in pending)
            pending = []
            i += 2
        else:
            pending.append(_expect_name(item, f"{what} name"))
            i += 1
    out.extend((tok, ROOT_TYPE) for tok in pending)
    return out


def parse_variable_list(items: tuple[SExpr, ...]) -> list[tuple[SToken, str]]:
    """Like :func:`parse_typed_names` but every name must be a ``?variable``."""
    out: list[tuple[SToken, str]] = []
    pending: list[SToken] = []
    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, SToken) and item.text == "-":
            if not pending or i + 1 >= len(items):
                raise PddlError("malformed typed variable list", item.line, item.col,
                                hint="write '?var - type'")
            typ = _expect_name(items[i + 1], "type name").text
            out.extend((tok, typ) for tok in pending)
            pending = []
            i += 2
        else:
            if not isinstance(item, SToken) or not item.text.startswith("?"):
                raise PddlError("expected a '?variable'",
                                item.line, item.col,
                                hint="parameters and quantified names start with '?'")
            if not is_identifier(item.text[1:]):
                raise PddlError(f"invalid variable name '{item.text}'", item.line, item.col,
                                hint="write '?name' using letters, digits, '_' or '-'")
            pending.append(item)
            i += 1
    out.extend((tok, ROOT_TYPE) for tok in pending)
    return out


class _Scope:
    """Variable bindings visible at a point in a formula."""

    def __init__(self, bindings: dict[str, str]):
        self.bindings = bindings

    def extended(self, more: list[tuple[SToken, str]]) -> "_Scope":
        child = dict(self.bindings)
        for tok, typ in more:
            child[tok.text] = typ
        return _Scope(child)


def _resolve_term(tok: SExpr, scope: _Scope, objects: Optional[dict[str, str]]) -> str:
    if not isinstance(tok, SToken):
        raise PddlError("expected a term", tok.line, tok.col,
                        hint="predicate arguments are variables or object names")
    text = tok.text
    if text.startswith("?"):
        if text not in scope.bindings:
            raise PddlError(f"unbound variable '{text}'", tok.line, tok.col,
                            hint="bind it as a parameter or with forall/exists")
        return text
    if objects is None:
        raise PddlError(f"unknown term '{text}'", tok.line, tok.col,
                        hint="action conditions may only use parameters and quantified variables")
    if text not in objects:
        raise PddlError(f"undeclared object '{text}'", tok.line, tok.col,
                        hint="declare it in the :objects section")
    return text


def build_formula(
    expr: SExpr,
    scope: _Scope,
    predicates: dict[str, PredicateDecl],
    hierarchy: TypeHierarchy,
    objects: Optional[dict[str, str]] = None,
) -> Formula:
    if isinstance(expr, SToken):
        raise PddlError(f"expected a condition, found '{expr.text}'", expr.line, expr.col,
                        hint="conditions are parenthesized, e.g. '(at ?x ?l)'")
    if not expr.items:
        return And(())
    head = head_of(expr)
    args = expr.items[1:]
    if head in ("and", "or"):
        parts = tuple(build_formula(a, scope, predicates, hierarchy, objects) for a in args)
        return And(parts) if head == "and" else Or(parts)
    if head == "not":
        if len(args) != 1:
            raise PddlError("'not' takes exactly one condition", expr.line, expr.col)
        return Not(build_formula(args[0], scope, predicates, hierarchy, objects))
    if head == "imply":
        if len(args) != 2:
            raise PddlError("'imply' takes exactly two conditions", expr.line, expr.col)
        return Imply(
            build_formula(args[0], scope, predicates, hierarchy, objects),
            build_formula(args[1], scope, predicates, hierarchy, objects),
        )
    if head in ("forall", "exists"):
        if len(args) != 2:
            raise PddlError(f"'{head}' takes a variable list and a condition",
                            expr.line, expr.col, hint=f"write '({head} (?x - type) (...))'")
        var_list = parse_variable_list(_expect_list(args[0], "variable list").items)
        for tok, typ in var_list:
            if not hierarchy.has_type(typ):
                raise PddlError(f"undeclared type '{typ}'", tok.line, tok.col,
                                hint="declare it in the :types section")
        inner = scope.extended(var_list)
        body = build_formula(args[1], inner, predicates, hierarchy, objects)
        variables = tuple((tok.text, typ) for tok, typ in var_list)
        return Forall(variables, body) if head == "forall" else Exists(variables, body)
    if head == "=":
        if len(args) != 2:
            raise PddlError("'=' takes exactly two terms", expr.line, expr.col)
        return Equality(
            _resolve_term(args[0], scope, objects),
            _resolve_term(args[1], scope, objects),
        )
    if head in ("when", "increase"):
        raise PddlError(f"'{head}' is not allowed in conditions", expr.line, expr.col,
                        hint="it belongs in effects only")
    return _build_atom(expr, scope, predicates, objects)


def _build_atom(
    expr: SList,
    scope: _Scope,
    predicates: dict[str, PredicateDecl],
    objects: Optional[dict[str, str]],
) -> Atom:
    name_tok = expr.items[0]
    if not isinstance(name_tok, SToken):
        raise PddlError("expected a predicate name", expr.line, expr.col)
    name = name_tok.text
    if name.startswith(":"):
        raise PddlError(f"misplaced keyword '{name}'", name_tok.line, name_tok.col,
                        hint="section keywords cannot appear inside conditions or effects")
    decl = predicates.get(name)
    if decl is None:
        raise PddlError(f"undeclared predicate '{name}'", name_tok.line, name_tok.col,
                        hint="declare it in the :predicates section")
    if len(expr.items) - 1 != decl.arity:
        raise PddlError(
            f"predicate '{name}' takes {decl.arity} argument(s), got {len(expr.items) - 1}",
            name_tok.line, name_tok.col,
        )
    terms = tuple(_resolve_term(t, scope, objects) for t in expr.items[1:])
    return Atom(name, terms)


def build_effect(
    expr: SExpr,
    scope: _Scope,
    predicates: dict[str, PredicateDecl],
    hierarchy: TypeHierarchy,
) -> EffectExpr:
    if isinstance(expr, SToken):
        raise PddlError(f"expected an effect, found '{expr.text}'", expr.line, expr.col)
    if not expr.items:
        return EffectAnd(())
    head = head_of(expr)
    args = expr.items[1:]
    if head == "and":
        return EffectAnd(tuple(build_effect(a, scope, predicates, hierarchy) for a in args))
    if head == "not":
        if len(args) != 1:
            raise PddlError("'not' takes exactly one atom in effects", expr.line, expr.col)
        inner = args[0]
        if not isinstance(inner, SList) or head_of(inner) in CONNECTIVES:
            raise PddlError("'not' in effects must wrap a single atom", expr.line, expr.col,
                            hint="effects allow '(not (pred ...))' but no nested connectives")
        return EffectLiteral(_build_atom(inner, scope, predicates, None), negated=True)
    if head == "forall":
        if len(args) != 2:
            raise PddlError("'forall' takes a variable list and an effect", expr.line, expr.col)
        var_list = parse_variable_list(_expect_list(args[0], "variable list").items)
        for tok, typ in var_list:
            if not hierarchy.has_type(typ):
                raise PddlError(f"undeclared type '{typ}'", tok.line, tok.col)
        inner = scope.extended(var_list)
        return EffectForall(
            tuple((tok.text, typ) for tok, typ in var_list),
            build_effect(args[1], inner, predicates, hierarchy),
        )
    if head == "when":
        if len(args) != 2:
            raise PddlError("'when' takes a condition and an effect", expr.line, expr.col)
        condition = build_formula(args[0], scope, predicates, hierarchy, None)
        return When(condition, build_effect(args[1], scope, predicates, hierarchy))
    if head == "increase":
        if (
            len(args) != 2
            or not isinstance(args[0], SList)
            or head_of(args[0]) != "total-cost"
            or len(args[0].items) != 1
        ):
            raise PddlError("expected '(increase (total-cost) <n>)'", expr.line, expr.col)
        amount_tok = args[1]
        if not isinstance(amount_tok, SToken) or not amount_tok.text.isdigit():
            raise PddlError("action cost must be a nonnegative integer",
                            expr.line, expr.col)
        return IncreaseCost(int(amount_tok.text))
    if head in ("or", "imply", "exists", "="):
        raise PddlError(f"'{head}' is not allowed in effects", expr.line, expr.col,
                        hint="effects allow and/not/forall/when/increase only")
    return EffectLiteral(_build_atom(expr, scope, predicates, None))


# ---------------------------------------------------------------------------
# Domain


def parse_domain(text: str) -> DomainSpec:
    unit = read_source(text)
    top = _define_form(unit, "domain")
    name = _define_name(top, "domain")

    sections: list[SList] = []
    for form in top.items[2:]:
        sec = _expect_list(form, "domain section")
        key = head_of(sec)
        if key not in DOMAIN_SECTIONS:
            raise PddlError(f"unknown section keyword '{key or '()'}'", sec.line, sec.col,
                            hint="expected :requirements, :types, :predicates, :functions or :action")
        sections.append(sec)

    hierarchy = TypeHierarchy()
    for sec in _all(sections, ":types"):
        hierarchy = _parse_types(sec, unit)
    predicates: dict[str, PredicateDecl] = {}
    order: list[PredicateDecl] = []
    for sec in _all(sections, ":predicates"):
        for decl in _parse_predicates(sec, hierarchy, unit):
            if decl.name in predicates:
                raise PddlError(f"duplicate predicate '{decl.name}'", sec.line, sec.col)
            predicates[decl.name] = decl
            order.append(decl)
    for sec in _all(sections, ":functions"):
        _check_functions(sec)

    actions: list[ActionSchema] = []
    for sec in _all(sections, ":action"):
        action = _parse_action(sec, hierarchy, predicates, unit)
        if any(a.name == action.name for a in actions):
            raise PddlError(f"duplicate action '{action.name}'", sec.line, sec.col)
        if action.name in predicates:
            raise PddlError(f"action '{action.name}' collides with a predicate name",
                            sec.line, sec.col)
        actions.append(action)

    return DomainSpec(name, hierarchy, tuple(order), tuple(actions))


def _define_form(unit: SourceUnit, kind: str) -> SList:
    forms = [e for e in unit.exprs if isinstance(e, SList)]
    if len(forms) != 1 or head_of(forms[0]) != "define":
        line = forms[0].line if forms else 1
        raise PddlError(f"expected a single '(define ({kind} ...))' form", line, 1)
    top = forms[0]
    if len(top.items) < 2 or head_of(top.items[1]) != kind:
        raise PddlError(f"expected '({kind} <name>)' after 'define'", top.line, top.col)
    return top


def _define_name(top: SList, kind: str) -> str:
    header = top.items[1]
    assert isinstance(header, SList)
    if len(header.items) != 2:
        raise PddlError(f"expected '({kind} <name>)'", header.line, header.col)
    return _expect_name(header.items[1], f"{kind} name").text


def _all(sections: list[SList], key: str) -> list[SList]:
    return [s for s in sections if head_of(s) == key]


def _parse_types(sec: SList, unit: SourceUnit) -> TypeHierarchy:
    entries = parse_typed_names(sec.items[1:], "type")
    parent: dict[str, str] = {}
    description: dict[str, str] = {}
    for tok, par in entries:
        if tok.text == ROOT_TYPE:
            if par != ROOT_TYPE:
                raise PddlError("'object' cannot have a parent type", tok.line, tok.col)
            continue
        if tok.text in parent:
            raise PddlError(f"duplicate type '{tok.text}'", tok.line, tok.col)
        parent[tok.text] = par
        comment = unit.comment_at(tok.line)
        if comment:
            description[tok.text] = comment
    for _, par in entries:
        if par != ROOT_TYPE and par not in parent:
            parent[par] = ROOT_TYPE
    hierarchy = TypeHierarchy(parent, description)
    hierarchy.validate()
    return hierarchy


def _parse_predicates(
    sec: SList, hierarchy: TypeHierarchy, unit: SourceUnit
) -> list[PredicateDecl]:
    out = []
    for form in sec.items[1:]:
        decl_list = _expect_list(form, "predicate declaration")
        if not decl_list.items:
            raise PddlError("empty predicate declaration", decl_list.line, decl_list.col)
        name_tok = _expect_name(decl_list.items[0], "predicate name")
        params = parse_variable_list(decl_list.items[1:])
        seen = set()
        for tok, typ in params:
            if tok.text in seen:
                raise PddlError(f"duplicate parameter '{tok.text}'", tok.line, tok.col)
            seen.add(tok.text)
            if not hierarchy.has_type(typ):
                raise PddlError(f"undeclared type '{typ}'", tok.line, tok.col,
                                hint="declare it in the :types section")
        out.append(
            PredicateDecl(
                name_tok.text,
                tuple((tok.text, typ) for tok, typ in params),
                unit.comment_at(decl_list.end_line),
            )
        )
    return out


def _check_functions(sec: SList) -> None:
    for form in sec.items[1:]:
        fn = _expect_list(form, "function declaration")
        if head_of(fn) != "total-cost" or len(fn.items) != 1:
            raise PddlError("only the '(total-cost)' function is supported",
                            fn.line, fn.col)


def _parse_action(
    sec: SList,
    hierarchy: TypeHierarchy,
    predicates: dict[str, PredicateDecl],
    unit: SourceUnit,
) -> ActionSchema:
    if len(sec.items) < 2:
        raise PddlError("missing action name", sec.line, sec.col)
    name_tok = _expect_name(sec.items[1], "action name")
    fields: dict[str, SExpr] = {}
    i = 2
    while i < len(sec.items):
        key = sec.items[i]
        if not isinstance(key, SToken) or key.text not in (":parameters", ":precondition", ":effect"):
            got = key.text if isinstance(key, SToken) else "(...)"
            raise PddlError(f"unknown section keyword '{got}' in action", key.line, key.col,
                            hint="actions use :parameters, :precondition and :effect")
        if i + 1 >= len(sec.items):
            raise PddlError(f"missing value after '{key.text}'", key.line, key.col)
        if key.text in fields:
            raise PddlError(f"duplicate '{key.text}' in action", key.line, key.col)
        fields[key.text] = sec.items[i + 1]
        i += 2

    params: list[tuple[SToken, str]] = []
    if ":parameters" in fields:
        params = parse_variable_list(_expect_list(fields[":parameters"], "parameter list").items)
    seen = set()
    for tok, typ in params:
        if tok.text in seen:
            raise PddlError(f"duplicate parameter '{tok.text}'", tok.line, tok.col)
        seen.add(tok.text)
        if not hierarchy.has_type(typ):
            raise PddlError(f"undeclared type '{typ}'", tok.line, tok.col,
                            hint="declare it in the :types section")
    scope = _Scope({tok.text: typ for tok, typ in params})

    precondition: Formula = And(())
    if ":precondition" in fields:
        precondition = build_formula(fields[":precondition"], scope, predicates, hierarchy, None)
    effect: EffectExpr = EffectAnd(())
    if ":effect" in fields:
        effect = build_effect(fields[":effect"], scope, predicates, hierarchy)

    return ActionSchema(
        name_tok.text,
        tuple((tok.text, typ) for tok, typ in params),
        precondition,
        effect,
        unit.comment_block_before(sec.line),
    )


def build_action(
    name: str,
    params: list[tuple[str, str]],
    precondition: Optional[SExpr],
    effect: Optional[SExpr],
    predicates: dict[str, PredicateDecl],
    hierarchy: TypeHierarchy,
    description: str = "",
) -> ActionSchema:
    """Assemble an ActionSchema from already-validated draft pieces."""
    scope = _Scope(dict(params))
    pre: Formula = And(())
    if precondition is not None:
        pre = build_formula(precondition, scope, predicates, hierarchy, None)
    eff: EffectExpr = EffectAnd(())
    if effect is not None:
        eff = build_effect(effect, scope, predicates, hierarchy)
    return ActionSchema(name, tuple(params), pre, eff, description)


def build_goal(
    expr: SExpr,
    predicates: dict[str, PredicateDecl],
    hierarchy: TypeHierarchy,
    objects: dict[str, str],
) -> Formula:
    """Build a ground goal formula (object names allowed as terms)."""
    return build_formula(expr, _Scope({}), predicates, hierarchy, objects)


def build_init_atom(
    expr: SExpr,
    predicates: dict[str, PredicateDecl],
    objects: dict[str, str],
) -> Atom:
    """Build one ground init atom."""
    lst = _expect_list(expr, "init atom")
    return _build_atom(lst, _Scope({}), predicates, objects)


# ---------------------------------------------------------------------------
# Problem


def parse_problem(text: str, domain: DomainSpec) -> ProblemSpec:
    unit = read_source(text)
    top = _define_form(unit, "problem")
    name = _define_name(top, "problem")

    sections: list[SList] = []
    for form in top.items[2:]:
        sec = _expect_list(form, "problem section")
        key = head_of(sec)
        if key not in PROBLEM_SECTIONS:
            raise PddlError(f"unknown section keyword '{key or '()'}'", sec.line, sec.col,
                            hint="expected :domain, :objects, :init or :goal")
        sections.append(sec)

    domain_name = domain.name
    for sec in _all(sections, ":domain"):
        if len(sec.items) != 2:
            raise PddlError("expected '(:domain <name>)'", sec.line, sec.col)
        domain_name = _expect_name(sec.items[1], "domain name").text
        if domain_name != domain.name:
            raise PddlError(
                f"problem references domain '{domain_name}', expected '{domain.name}'",
                sec.line, sec.col,
            )

    objects: list[tuple[str, str]] = []
    object_types: dict[str, str] = {}
    for sec in _all(sections, ":objects"):
        for tok, typ in parse_typed_names(sec.items[1:], "object"):
            if tok.text in object_types:
                raise PddlError(f"duplicate object '{tok.text}'", tok.line, tok.col)
            if domain.hierarchy.has_type(tok.text):
                raise PddlError(f"object '{tok.text}' shadows a type name", tok.line, tok.col,
                                hint="rename the object")
            if not domain.hierarchy.has_type(typ):
                raise PddlError(f"undeclared object type '{typ}'", tok.line, tok.col)
            object_types[tok.text] = typ
            objects.append((tok.text, typ))

    predicates = {p.name: p for p in domain.predicates}
    init: list[Atom] = []
    total_cost_init: Optional[int] = None
    for sec in _all(sections, ":init"):
        for form in sec.items[1:]:
            lst = _expect_list(form, "init atom")
            if head_of(lst) == "=":
                total_cost_init = _parse_cost_init(lst)
                continue
            atom = _build_atom(lst, _Scope({}), predicates, object_types)
            decl = predicates[atom.predicate]
            for term, (_, typ) in zip(atom.terms, decl.params):
                if term.startswith("?"):
                    raise PddlError("init atoms must be fully ground", lst.line, lst.col,
                                    hint="replace variables with object names")
                if not domain.hierarchy.is_subtype(object_types[term], typ):
                    raise PddlError(
                        f"object '{term}' has type '{object_types[term]}', "
                        f"but '{atom.predicate}' expects '{typ}'",
                        lst.line, lst.col,
                    )
            init.append(atom)

    goal: Formula = And(())
    for sec in _all(sections, ":goal"):
        if len(sec.items) != 2:
            raise PddlError("expected '(:goal <condition>)'", sec.line, sec.col)
        goal = build_formula(sec.items[1], _Scope({}), predicates, domain.hierarchy,
                             object_types)

    return ProblemSpec(name, domain_name, tuple(objects), tuple(init), goal,
                       total_cost_init)


def _parse_cost_init(lst: SList) -> int:
    items = lst.items
    ok = (
        len(items) == 3
        and isinstance(items[1], SList)
        and head_of(items[1]) == "total-cost"
        and isinstance(items[2], SToken)
        and items[2].text.isdigit()
    )
    if not ok:
        raise PddlError("expected '(= (total-cost) <n>)' in :init", lst.line, lst.col)
    return int(items[2].text)
