"""Automatic validation of drafted actions and task specifications.

Issues carry machine-readable codes from the catalog documented in
``docs/validation-catalog.md``. Only a single category is reported per
report: action checks run through a fixed category order and stop at the
first failing one; task checks walk objects, then init, then goal, and
report every error of the first bad section. Suggested fixes are
template-based so feedback stays reproducible under replay.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .drafts import ActionDraft, DomainContext, PredicateDraft, TaskDraft
from .pddl.model import (
    DomainSpec,
    PddlError,
    PredicateDecl,
    RESERVED_WORDS,
    TypeHierarchy,
    is_identifier,
)
from .pddl.parser import build_action, build_goal
from .pddl.sexpr import SExpr, SList, SToken, head_of, to_text

ALL_PASSED = "all-passed"

ACTION_CATEGORIES = (
    "keywords",
    "parameter-types",
    "predicates",
    "signatures",
    "bindings",
    "redeclarations",
    "effect-grammar",
    "names",
)

TASK_SECTIONS = ("objects", "init", "goal")


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    location: str
    message: str
    suggested_fix: str

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "location": self.location,
            "message": self.message,
            "suggested_fix": self.suggested_fix,
        }


@dataclass(frozen=True)
class ValidationReport:
    checked_category: str
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.issues

    def to_json(self) -> dict:
        return {
            "checked_category": self.checked_category,
            "issues": [i.to_json() for i in self.issues],
        }

    @staticmethod
    def from_json(data: dict) -> "ValidationReport":
        return ValidationReport(
            data["checked_category"],
            tuple(ValidationIssue(**i) for i in data["issues"]),
        )


PASSED = ValidationReport(ALL_PASSED)


def render_feedback(report: ValidationReport) -> str:
    """Numbered issue list ready to concatenate into a re-prompt."""
    if not report.issues:
        raise ValueError("nothing to render: the report has no issues")
    lines = [
        f"{n}. {issue.message} Fix: {issue.suggested_fix}"
        for n, issue in enumerate(report.issues, start=1)
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Action validation


def validate_action(draft: ActionDraft, ctx: DomainContext) -> ValidationReport:
    pool = dict(ctx.predicates)
    news = {p.name: p for p in draft.new_predicates}
    buckets: dict[str, list[ValidationIssue]] = {c: [] for c in ACTION_CATEGORIES}

    _check_params(draft, ctx.hierarchy, buckets)
    scope = {name: typ for name, typ in draft.params}
    for field_name, expr in (("precondition", draft.precondition), ("effect", draft.effect)):
        if expr is None:
            continue
        loc = f"action {draft.name}/{field_name}"
        _walk_action_expr(
            expr, field_name == "effect", dict(scope), pool, news, ctx.hierarchy,
            loc, buckets,
        )
    _check_redeclarations(draft, pool, buckets)
    _check_names(draft, ctx, pool, buckets)

    for category in ACTION_CATEGORIES:
        if buckets[category]:
            return ValidationReport(category, tuple(buckets[category]))

    # Defensive: the strict builder should now accept the draft.
    try:
        predicates = dict(pool)
        predicates.update({p.name: p.as_decl() for p in draft.new_predicates})
        build_action(
            draft.name,
            [(v, t or "object") for v, t in draft.params],
            draft.precondition,
            draft.effect,
            predicates,
            ctx.hierarchy,
        )
    except PddlError as exc:
        issue = ValidationIssue(
            "misplaced-keyword",
            f"action {draft.name}",
            f"The action does not follow the PDDL grammar: {exc.message}.",
            exc.hint or "Rewrite the malformed part.",
        )
        return ValidationReport("keywords", (issue,))
    return PASSED


def _check_params(draft: ActionDraft, hierarchy: TypeHierarchy, buckets) -> None:
    loc = f"action {draft.name}/parameters"
    seen = set()
    for var, typ in draft.params:
        if var in seen:
            buckets["parameter-types"].append(ValidationIssue(
                "duplicate-parameter", loc,
                f"Parameter '{var}' is declared more than once.",
                f"Rename one of the '{var}' parameters.",
            ))
        seen.add(var)
        if typ is None:
            buckets["parameter-types"].append(ValidationIssue(
                "missing-parameter-type", loc,
                f"Parameter '{var}' has no type.",
                f"Write '{var} - <type>' using a type from the hierarchy.",
            ))
        elif not hierarchy.has_type(typ):
            buckets["parameter-types"].append(ValidationIssue(
                "unknown-parameter-type", loc,
                f"Parameter '{var}' uses unknown type '{typ}'.",
                f"Use one of the declared types instead of '{typ}'.",
            ))


def _walk_action_expr(
    expr: SExpr,
    in_effect: bool,
    scope: dict[str, Optional[str]],
    pool: dict[str, PredicateDecl],
    news: dict[str, PredicateDraft],
    hierarchy: TypeHierarchy,
    loc: str,
    buckets,
) -> None:
    if isinstance(expr, SToken):
        buckets["keywords"].append(ValidationIssue(
            "misplaced-keyword", loc,
            f"Found the bare word '{expr.text}' where a parenthesized expression belongs.",
            "Wrap conditions and effects in parentheses.",
        ))
        return
    if not expr.items:
        return
    head = expr.items[0]
    if isinstance(head, SList):
        buckets["keywords"].append(ValidationIssue(
            "misplaced-keyword", loc,
            "An expression starts with a nested list instead of a keyword or predicate.",
            "Start every expression with 'and', 'or', 'not', a quantifier, or a predicate name.",
        ))
        return
    name = head.text
    args = expr.items[1:]

    if name.startswith(":") or name in ("define", "domain", "problem"):
        buckets["keywords"].append(ValidationIssue(
            "misplaced-keyword", loc,
            f"The keyword '{name}' cannot appear inside a {'n effect' if in_effect else ' condition'}.",
            f"Remove '{name}' from this expression.",
        ))
        return

    if name == "and":
        for a in args:
            _walk_action_expr(a, in_effect, scope, pool, news, hierarchy, loc, buckets)
        return
    if name == "or":
        if in_effect:
            buckets["effect-grammar"].append(ValidationIssue(
                "effect-grammar-violation", loc,
                "'or' is not allowed in effects.",
                "Effects must be deterministic: use 'and' of literals, 'forall', or 'when'.",
            ))
            return
        for a in args:
            _walk_action_expr(a, False, scope, pool, news, hierarchy, loc, buckets)
        return
    if name == "not":
        if len(args) != 1:
            _malformed(buckets, in_effect, loc, "'not' takes exactly one argument")
            return
        inner = args[0]
        if in_effect:
            if not isinstance(inner, SList) or head_of(inner) in (
                "and", "or", "not", "imply", "forall", "exists", "when", "increase", "=",
            ):
                buckets["effect-grammar"].append(ValidationIssue(
                    "effect-grammar-violation", loc,
                    "'not' in an effect must wrap a single predicate atom.",
                    "Write '(not (<predicate> ...))' with no nested connectives.",
                ))
                return
            _walk_atom(inner, scope, pool, news, hierarchy, loc, buckets)
            return
        _walk_action_expr(inner, False, scope, pool, news, hierarchy, loc, buckets)
        return
    if name == "imply":
        if in_effect:
            buckets["effect-grammar"].append(ValidationIssue(
                "effect-grammar-violation", loc,
                "'imply' is not allowed in effects.",
                "Move the implication into the precondition or use 'when'.",
            ))
            return
        if len(args) != 2:
            _malformed(buckets, in_effect, loc, "'imply' takes exactly two conditions")
            return
        for a in args:
            _walk_action_expr(a, False, scope, pool, news, hierarchy, loc, buckets)
        return
    if name in ("forall", "exists"):
        if name == "exists" and in_effect:
            buckets["effect-grammar"].append(ValidationIssue(
                "effect-grammar-violation", loc,
                "'exists' is not allowed in effects.",
                "Quantify effects with 'forall' only.",
            ))
            return
        if len(args) != 2 or not isinstance(args[0], SList):
            _malformed(buckets, in_effect, loc,
                       f"'{name}' takes a variable list and a body")
            return
        inner_scope = dict(scope)
        for var, typ in _lenient_var_list(args[0]):
            inner_scope[var] = typ or "object"
            if typ is not None and not hierarchy.has_type(typ):
                buckets["parameter-types"].append(ValidationIssue(
                    "unknown-parameter-type", loc,
                    f"Quantified variable '{var}' uses unknown type '{typ}'.",
                    f"Use one of the declared types instead of '{typ}'.",
                ))
        _walk_action_expr(args[1], in_effect, inner_scope, pool, news, hierarchy,
                          loc, buckets)
        return
    if name == "when":
        if not in_effect:
            buckets["keywords"].append(ValidationIssue(
                "misplaced-keyword", loc,
                "'when' is only allowed in effects.",
                "Express the condition inside the precondition instead.",
            ))
            return
        if len(args) != 2:
            _malformed(buckets, True, loc, "'when' takes a condition and an effect")
            return
        _walk_action_expr(args[0], False, scope, pool, news, hierarchy, loc, buckets)
        _walk_action_expr(args[1], True, scope, pool, news, hierarchy, loc, buckets)
        return
    if name == "increase":
        if not in_effect:
            buckets["keywords"].append(ValidationIssue(
                "misplaced-keyword", loc,
                "'increase' is only allowed in effects.",
                "Remove it from the condition.",
            ))
            return
        ok = (
            len(args) == 2
            and isinstance(args[0], SList)
            and head_of(args[0]) == "total-cost"
            and isinstance(args[1], SToken)
            and args[1].text.isdigit()
        )
        if not ok:
            buckets["effect-grammar"].append(ValidationIssue(
                "effect-grammar-violation", loc,
                "Malformed cost effect.",
                "Write '(increase (total-cost) <nonnegative integer>)'.",
            ))
        return
    if name == "=":
        if in_effect:
            buckets["effect-grammar"].append(ValidationIssue(
                "effect-grammar-violation", loc,
                "'=' is not allowed in effects.",
                "Equality may only be tested in conditions.",
            ))
            return
        if len(args) != 2 or not all(isinstance(a, SToken) for a in args):
            _malformed(buckets, False, loc, "'=' takes exactly two terms")
            return
        for a in args:
            _check_term(a, scope, loc, buckets)
        return

    _walk_atom(expr, scope, pool, news, hierarchy, loc, buckets)


def _malformed(buckets, in_effect: bool, loc: str, what: str) -> None:
    if in_effect:
        buckets["effect-grammar"].append(ValidationIssue(
            "effect-grammar-violation", loc, f"Malformed effect: {what}.",
            "Rewrite it to follow the effect grammar.",
        ))
    else:
        buckets["keywords"].append(ValidationIssue(
            "misplaced-keyword", loc, f"Malformed condition: {what}.",
            "Rewrite it to follow the condition grammar.",
        ))


def _walk_atom(expr: SList, scope, pool, news, hierarchy, loc, buckets) -> None:
    head = expr.items[0]
    if not isinstance(head, SToken) or head.text.startswith("?"):
        buckets["keywords"].append(ValidationIssue(
            "misplaced-keyword", loc,
            "An atom must start with a predicate name.",
            "Write '(<predicate> <terms...>)'.",
        ))
        return
    name = head.text
    signature: Optional[list[Optional[str]]] = None
    if name in pool:
        # The established signature is authoritative; a conflicting
        # redeclaration is reported by its own category.
        signature = [t for _, t in pool[name].params]
    elif name in news:
        signature = [t for _, t in news[name].params]
    else:
        buckets["predicates"].append(ValidationIssue(
            "undefined-predicate", loc,
            f"The predicate '{name}' is not defined.",
            f"Define predicate '{name}' under new predicates or use an existing one.",
        ))
        return
    if len(expr.items) - 1 != len(signature):
        buckets["signatures"].append(ValidationIssue(
            "predicate-arity-mismatch", loc,
            f"'{name}' takes {len(signature)} argument(s), got {len(expr.items) - 1}.",
            f"Pass exactly {len(signature)} argument(s) to '{name}'.",
        ))
        return
    for term, expected in zip(expr.items[1:], signature):
        term_type = _check_term(term, scope, loc, buckets)
        if term_type is None or expected is None:
            continue
        if not hierarchy.has_type(term_type) or not hierarchy.has_type(expected):
            continue
        if not (hierarchy.is_subtype(term_type, expected)
                or hierarchy.is_subtype(expected, term_type)):
            assert isinstance(term, SToken)
            buckets["signatures"].append(ValidationIssue(
                "argument-type-mismatch", loc,
                f"'{term.text}' has type '{term_type}', but '{name}' expects '{expected}' here.",
                f"Pass a term of type '{expected}' or adjust the predicate signature.",
            ))


def _check_term(term: SExpr, scope, loc, buckets) -> Optional[str]:
    """Returns the term's type when known; records binding issues."""
    if isinstance(term, SList):
        buckets["keywords"].append(ValidationIssue(
            "misplaced-keyword", loc,
            f"Found the nested expression {to_text(term)} where a term belongs.",
            "Arguments must be variables, not expressions.",
        ))
        return None
    if not term.text.startswith("?"):
        buckets["bindings"].append(ValidationIssue(
            "unbound-variable", loc,
            f"The term '{term.text}' is not a parameter or quantified variable.",
            f"Add a parameter for it or replace '{term.text}' with a variable.",
        ))
        return None
    if term.text not in scope:
        buckets["bindings"].append(ValidationIssue(
            "unbound-variable", loc,
            f"The variable '{term.text}' is not bound.",
            f"Add '{term.text}' to the parameters or bind it with forall/exists.",
        ))
        return None
    return scope[term.text]


def _check_redeclarations(draft: ActionDraft, pool, buckets) -> None:
    loc = f"action {draft.name}/new predicates"
    seen: dict[str, PredicateDraft] = {}
    for pred in draft.new_predicates:
        clash = pool.get(pred.name)
        if clash is not None and not _same_signature(pred, clash):
            buckets["redeclarations"].append(ValidationIssue(
                "conflicting-predicate-redeclaration", loc,
                f"'{pred.name}' is already defined with a different signature.",
                f"Reuse the existing '{pred.name}' signature or pick a new name.",
            ))
        prior = seen.get(pred.name)
        if prior is not None and [t for _, t in prior.params] != [t for _, t in pred.params]:
            buckets["redeclarations"].append(ValidationIssue(
                "conflicting-predicate-redeclaration", loc,
                f"'{pred.name}' is declared twice with different signatures.",
                f"Keep a single declaration for '{pred.name}'.",
            ))
        seen[pred.name] = pred


def _same_signature(draft: PredicateDraft, decl: PredicateDecl) -> bool:
    return [t or "object" for _, t in draft.params] == [t for _, t in decl.params]


def _check_names(draft: ActionDraft, ctx: DomainContext, pool, buckets) -> None:
    loc = f"action {draft.name}"
    if draft.name in RESERVED_WORDS or not is_identifier(draft.name):
        buckets["names"].append(ValidationIssue(
            "reserved-name-collision", loc,
            f"'{draft.name}' cannot be used as an action name.",
            "Rename the action to a fresh identifier.",
        ))
    if draft.name in pool:
        buckets["names"].append(ValidationIssue(
            "reserved-name-collision", loc,
            f"Action '{draft.name}' collides with a predicate of the same name.",
            "Rename the action.",
        ))
    for pred in draft.new_predicates:
        if pred.name in RESERVED_WORDS or not is_identifier(pred.name):
            buckets["names"].append(ValidationIssue(
                "reserved-name-collision", f"{loc}/new predicates",
                f"'{pred.name}' cannot be used as a predicate name.",
                "Rename the predicate to a fresh identifier.",
            ))
        if pred.name == draft.name or pred.name in ctx.action_names:
            buckets["names"].append(ValidationIssue(
                "reserved-name-collision", f"{loc}/new predicates",
                f"Predicate '{pred.name}' collides with an action name.",
                "Rename the predicate.",
            ))
        if ctx.hierarchy.has_type(pred.name):
            buckets["names"].append(ValidationIssue(
                "reserved-name-collision", f"{loc}/new predicates",
                f"Predicate '{pred.name}' collides with a type name.",
                "Rename the predicate.",
            ))


# ---------------------------------------------------------------------------
# Task validation


def validate_task(draft: TaskDraft, domain: DomainSpec) -> ValidationReport:
    object_issues = _check_objects(draft, domain)
    if object_issues:
        return ValidationReport("objects", tuple(object_issues))
    objects = {name: typ for name, typ in draft.objects if typ is not None}
    init_issues = _check_init(draft, domain, objects)
    if init_issues:
        return ValidationReport("init", tuple(init_issues))
    goal_issues = _check_goal(draft, domain, objects)
    if goal_issues:
        return ValidationReport("goal", tuple(goal_issues))
    return PASSED


def _check_objects(draft: TaskDraft, domain: DomainSpec) -> list[ValidationIssue]:
    issues = []
    seen = set()
    for name, typ in draft.objects:
        loc = f"objects/{name}"
        if domain.hierarchy.has_type(name):
            issues.append(ValidationIssue(
                "object-shadows-type", loc,
                f"The object '{name}' reuses the type name '{name}'.",
                f"Rename the object, e.g. '{name}1'.",
            ))
        if name in seen:
            issues.append(ValidationIssue(
                "duplicate-object-name", loc,
                f"The object '{name}' is declared more than once.",
                f"Keep a single declaration of '{name}'.",
            ))
        seen.add(name)
        if typ is None:
            issues.append(ValidationIssue(
                "missing-object-type", loc,
                f"The object '{name}' has no type.",
                f"Write '{name} - <type>' using a type from the domain.",
            ))
        elif not domain.hierarchy.has_type(typ):
            issues.append(ValidationIssue(
                "unknown-object-type", loc,
                f"The object '{name}' uses unknown type '{typ}'.",
                f"Use one of the domain's types instead of '{typ}'.",
            ))
    return issues


def _check_init(draft: TaskDraft, domain: DomainSpec, objects) -> list[ValidationIssue]:
    issues = []
    predicates = {p.name: p for p in domain.predicates}
    for expr in draft.init:
        loc = f"init/{to_text(expr)}"
        if isinstance(expr, SToken) or not expr.items:
            issues.append(ValidationIssue(
                "init-malformed", loc,
                "Initial-state entries must be parenthesized atoms.",
                "Write '(<predicate> <objects...>)'.",
            ))
            continue
        head = head_of(expr)
        if head == "=":
            continue  # optional (= (total-cost) 0); checked at build time
        if head == "not":
            issues.append(ValidationIssue(
                "init-negative-literal", loc,
                "Negation is not allowed in the initial state.",
                "List only the atoms that are true; everything else is false.",
            ))
            continue
        if head in ("and", "or", "imply", "forall", "exists", "when", "increase") or head.startswith(":"):
            issues.append(ValidationIssue(
                "init-malformed", loc,
                f"'{head}' cannot appear in the initial state.",
                "List plain ground atoms only.",
            ))
            continue
        decl = predicates.get(head)
        if decl is None:
            issues.append(ValidationIssue(
                "init-undefined-predicate", loc,
                f"The predicate '{head}' is not defined in the domain.",
                "Use a predicate from the domain definition.",
            ))
            continue
        if len(expr.items) - 1 != decl.arity:
            issues.append(ValidationIssue(
                "init-arity-mismatch", loc,
                f"'{head}' takes {decl.arity} argument(s), got {len(expr.items) - 1}.",
                f"Pass exactly {decl.arity} argument(s) to '{head}'.",
            ))
            continue
        for term, (_, expected) in zip(expr.items[1:], decl.params):
            if isinstance(term, SList) or term.text.startswith("?"):
                issues.append(ValidationIssue(
                    "init-not-ground", loc,
                    "Initial-state atoms must be fully ground.",
                    "Replace variables with declared object names.",
                ))
                continue
            obj_type = objects.get(term.text)
            if obj_type is None:
                issues.append(ValidationIssue(
                    "init-unknown-object", loc,
                    f"The object '{term.text}' is not declared.",
                    f"Add '{term.text}' to the objects section or fix the name.",
                ))
            elif not domain.hierarchy.is_subtype(obj_type, expected):
                issues.append(ValidationIssue(
                    "init-type-mismatch", loc,
                    f"'{term.text}' has type '{obj_type}', but '{head}' expects '{expected}' here.",
                    f"Use an object of type '{expected}'.",
                ))
    return issues


def _check_goal(draft: TaskDraft, domain: DomainSpec, objects) -> list[ValidationIssue]:
    if draft.goal is None:
        return [ValidationIssue(
            "goal-malformed", "goal",
            "No goal condition was provided.",
            "State the goal as a condition over domain predicates.",
        )]
    issues: list[ValidationIssue] = []
    predicates = {p.name: p for p in domain.predicates}
    _walk_goal(draft.goal, {}, predicates, domain.hierarchy, objects, issues)
    if issues:
        return issues
    try:
        build_goal(draft.goal, predicates, domain.hierarchy, objects)
    except PddlError as exc:
        issues.append(ValidationIssue(
            "goal-malformed", "goal",
            f"The goal does not follow the PDDL grammar: {exc.message}.",
            exc.hint or "Rewrite the malformed part.",
        ))
    return issues


def _walk_goal(expr, scope, predicates, hierarchy, objects, issues) -> None:
    loc = "goal"
    if isinstance(expr, SToken):
        issues.append(ValidationIssue(
            "goal-malformed", loc,
            f"Found the bare word '{expr.text}' where a condition belongs.",
            "Wrap conditions in parentheses.",
        ))
        return
    if not expr.items:
        return
    head = expr.items[0]
    if isinstance(head, SList):
        issues.append(ValidationIssue(
            "goal-malformed", loc,
            "A goal expression starts with a nested list instead of a keyword or predicate.",
            "Start every expression with 'and', 'or', 'not', a quantifier, or a predicate name.",
        ))
        return
    name = head.text
    args = expr.items[1:]
    if name in ("when", "increase") or name.startswith(":") or name in ("define", "domain", "problem"):
        issues.append(ValidationIssue(
            "goal-malformed", loc,
            f"'{name}' cannot appear in a goal condition.",
            f"Remove '{name}' from the goal.",
        ))
        return
    if name in ("and", "or"):
        for a in args:
            _walk_goal(a, scope, predicates, hierarchy, objects, issues)
        return
    if name == "not":
        if len(args) != 1:
            issues.append(ValidationIssue(
                "goal-malformed", loc, "'not' takes exactly one condition.",
                "Write '(not (<condition>))'.",
            ))
            return
        _walk_goal(args[0], scope, predicates, hierarchy, objects, issues)
        return
    if name == "imply":
        if len(args) != 2:
            issues.append(ValidationIssue(
                "goal-malformed", loc, "'imply' takes exactly two conditions.",
                "Write '(imply <condition> <condition>)'.",
            ))
            return
        for a in args:
            _walk_goal(a, scope, predicates, hierarchy, objects, issues)
        return
    if name in ("forall", "exists"):
        if len(args) != 2 or not isinstance(args[0], SList):
            issues.append(ValidationIssue(
                "goal-malformed", loc,
                f"'{name}' takes a variable list and a condition.",
                f"Write '({name} (?x - type) (...))'.",
            ))
            return
        inner = dict(scope)
        for var, typ in _lenient_var_list(args[0]):
            inner[var] = typ or "object"
        _walk_goal(args[1], inner, predicates, hierarchy, objects, issues)
        return
    if name == "=":
        return  # equality over objects is always well-formed if terms resolve
    decl = predicates.get(name)
    if decl is None:
        issues.append(ValidationIssue(
            "goal-undefined-predicate", loc,
            f"The predicate '{name}' is not defined in the domain.",
            "Use a predicate from the domain definition.",
        ))
        return
    if len(args) != decl.arity:
        issues.append(ValidationIssue(
            "goal-arity-mismatch", loc,
            f"'{name}' takes {decl.arity} argument(s), got {len(args)}.",
            f"Pass exactly {decl.arity} argument(s) to '{name}'.",
        ))
        return
    for term, (_, expected) in zip(args, decl.params):
        if isinstance(term, SList):
            issues.append(ValidationIssue(
                "goal-malformed", loc,
                f"Found the nested expression {to_text(term)} where a term belongs.",
                "Arguments must be objects or variables.",
            ))
            continue
        if term.text.startswith("?"):
            if term.text not in scope:
                issues.append(ValidationIssue(
                    "goal-unbound-variable", loc,
                    f"The variable '{term.text}' is not bound.",
                    "Bind it with forall/exists or use an object name.",
                ))
            continue
        obj_type = objects.get(term.text)
        if obj_type is None:
            issues.append(ValidationIssue(
                "goal-unknown-object", loc,
                f"The object '{term.text}' is not declared.",
                f"Add '{term.text}' to the objects section or fix the name.",
            ))
        elif not hierarchy.is_subtype(obj_type, expected):
            issues.append(ValidationIssue(
                "goal-type-mismatch", loc,
                f"'{term.text}' has type '{obj_type}', but '{name}' expects '{expected}' here.",
                f"Use an object of type '{expected}'.",
            ))


def _lenient_var_list(lst: SList) -> list[tuple[str, Optional[str]]]:
    """Parse '?a ?b - t ?c' tolerantly; unusable entries are skipped."""
    out: list[tuple[str, Optional[str]]] = []
    pending: list[str] = []
    items = list(lst.items)
    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, SToken) and item.text == "-":
            typ = None
            if i + 1 < len(items) and isinstance(items[i + 1], SToken):
                typ = items[i + 1].text
            out.extend((v, typ) for v in pending)
            pending = []
            i += 2
        elif isinstance(item, SToken) and item.text.startswith("?"):
            pending.append(item.text)
            i += 1
        else:
            i += 1
    out.extend((v, None) for v in pending)
    return out
