"""Validation catalog: mutation suite, category order, feedback rendering."""

import random

import pytest

from conftest import corpus_files, domain_problem_pairs, load_domain
from nl2plan.drafts import DomainContext, TaskDraft
from nl2plan.pddl import parse_domain, parse_problem
from nl2plan.pddl.printer import format_effect, format_formula
from nl2plan.pddl.sexpr import read_source
from nl2plan.pipeline.outputs import parse_action_block, parse_task_block
from nl2plan.validation import (
    ALL_PASSED,
    render_feedback,
    validate_action,
    validate_task,
)


def make_context(domain):
    return DomainContext(
        hierarchy=domain.hierarchy,
        predicates={p.name: p for p in domain.predicates},
        action_names=[a.name for a in domain.actions],
    )


def draft_from(block: str, name: str = "load"):
    draft = parse_action_block(block)
    draft.name = name
    return draft


LOAD_BLOCK = """Parameters:
?p - package
?v - vehicle
?l - location
Precondition:
(and (at ?p ?l) (at ?v ?l))
Effect:
(and (loaded ?p ?v) (not (at ?p ?l)))
New Predicates:
"""


@pytest.fixture(scope="module")
def logistics_ctx(logistics):
    return make_context(logistics)


def test_valid_load_passes(logistics_ctx):
    report = validate_action(draft_from(LOAD_BLOCK), logistics_ctx)
    assert report.checked_category == ALL_PASSED
    assert report.passed


# ---------------------------------------------------------------------------
# Action mutation suite: one single-fault fixture per catalog code, with the
# suggested fix applied yielding all-passed.

ACTION_MUTATIONS = [
    # (code, category, faulty block or name override, fixed block)
    (
        "misplaced-keyword", "keywords",
        LOAD_BLOCK.replace("(and (at ?p ?l) (at ?v ?l))",
                           "(and (at ?p ?l) (at ?v ?l) (when (at ?p ?l) (at ?v ?l)))"),
        LOAD_BLOCK,
    ),
    (
        "missing-parameter-type", "parameter-types",
        LOAD_BLOCK.replace("?p - package", "?p"),
        LOAD_BLOCK,
    ),
    (
        "unknown-parameter-type", "parameter-types",
        LOAD_BLOCK.replace("?p - package", "?p - parcel"),
        LOAD_BLOCK,
    ),
    (
        "duplicate-parameter", "parameter-types",
        LOAD_BLOCK.replace("?p - package", "?p - package\n?p - package"),
        LOAD_BLOCK,
    ),
    (
        "undefined-predicate", "predicates",
        LOAD_BLOCK.replace("(and (at ?p ?l) (at ?v ?l))",
                           "(and (at ?p ?l) (at ?v ?l) (gripper-free))"),
        LOAD_BLOCK.replace(
            "New Predicates:\n",
            "New Predicates:\n(gripper-free): the gripper is free\n",
        ).replace("(and (at ?p ?l) (at ?v ?l))",
                  "(and (at ?p ?l) (at ?v ?l) (gripper-free))"),
    ),
    (
        "predicate-arity-mismatch", "signatures",
        LOAD_BLOCK.replace("(at ?v ?l)", "(at ?v)"),
        LOAD_BLOCK,
    ),
    (
        "argument-type-mismatch", "signatures",
        LOAD_BLOCK.replace("(and (at ?p ?l) (at ?v ?l))",
                           "(and (at ?p ?l) (at ?v ?l) (in-city ?p ?l))"),
        LOAD_BLOCK,
    ),
    (
        "unbound-variable", "bindings",
        LOAD_BLOCK.replace("(at ?v ?l)", "(at ?v ?where)"),
        LOAD_BLOCK,
    ),
    (
        "conflicting-predicate-redeclaration", "redeclarations",
        LOAD_BLOCK.replace("New Predicates:\n",
                           "New Predicates:\n(at ?x - package): conflicting redeclaration\n"),
        LOAD_BLOCK,
    ),
    (
        "effect-grammar-violation", "effect-grammar",
        LOAD_BLOCK.replace("(and (loaded ?p ?v) (not (at ?p ?l)))",
                           "(and (loaded ?p ?v) (or (not (at ?p ?l))))"),
        LOAD_BLOCK,
    ),
]


@pytest.mark.parametrize("code,category,faulty,fixed", ACTION_MUTATIONS,
                         ids=[m[0] for m in ACTION_MUTATIONS])
def test_action_mutation(code, category, faulty, fixed, logistics_ctx):
    report = validate_action(draft_from(faulty), logistics_ctx)
    assert report.checked_category == category
    assert {i.code for i in report.issues} == {code}
    fixed_report = validate_action(draft_from(fixed), logistics_ctx)
    assert fixed_report.checked_category == ALL_PASSED


def test_reserved_name_collision(logistics_ctx):
    report = validate_action(draft_from(LOAD_BLOCK, name="forall"), logistics_ctx)
    assert report.checked_category == "names"
    assert {i.code for i in report.issues} == {"reserved-name-collision"}
    assert validate_action(draft_from(LOAD_BLOCK, name="load"), logistics_ctx).passed


def test_undefined_predicate_fix_mentions_name(logistics_ctx):
    faulty = LOAD_BLOCK.replace("(and (at ?p ?l) (at ?v ?l))",
                                "(and (at ?p ?l) (at ?v ?l) (gripper-free))")
    report = validate_action(draft_from(faulty), logistics_ctx)
    issue = report.issues[0]
    assert issue.code == "undefined-predicate"
    assert "gripper-free" in issue.message
    assert "gripper-free" in issue.suggested_fix


def test_or_in_effect_single_issue(logistics_ctx):
    faulty = LOAD_BLOCK.replace("(and (loaded ?p ?v) (not (at ?p ?l)))",
                                "(and (loaded ?p ?v) (or (not (at ?p ?l))))")
    report = validate_action(draft_from(faulty), logistics_ctx)
    assert report.checked_category == "effect-grammar"
    assert len(report.issues) == 1


# ---------------------------------------------------------------------------
# Category exclusivity on randomized double faults

INJECTORS = {
    "keywords": lambda b: b.replace(
        "(and (at ?p ?l) (at ?v ?l))",
        "(and (at ?p ?l) (at ?v ?l) (when (at ?p ?l) (at ?v ?l)))"),
    "parameter-types": lambda b: b.replace("?l - location", "?l - location\n?extra"),
    "predicates": lambda b: b.replace(
        "(and (at ?p ?l) (at ?v ?l))",
        "(and (at ?p ?l) (at ?v ?l) (gripper-free))"),
    "signatures": lambda b: b.replace(
        "(and (at ?p ?l) (at ?v ?l))",
        "(and (at ?p ?l) (at ?v ?l) (at ?p))"),
    "bindings": lambda b: b.replace(
        "(and (at ?p ?l) (at ?v ?l))",
        "(and (at ?p ?l) (at ?v ?l) (at ?p ?nowhere))"),
    "redeclarations": lambda b: b.replace(
        "New Predicates:\n",
        "New Predicates:\n(at ?x - package): conflicting redeclaration\n"),
    "effect-grammar": lambda b: b.replace(
        "(and (loaded ?p ?v) (not (at ?p ?l)))",
        "(and (loaded ?p ?v) (not (at ?p ?l)) (or (loaded ?p ?v)))"),
}

CATEGORY_ORDER = list(INJECTORS)


def test_category_exclusivity_randomized(logistics_ctx):
    rng = random.Random(20260810)
    for _ in range(50):
        first, second = sorted(
            rng.sample(range(len(CATEGORY_ORDER)), 2)
        )
        cat_i, cat_j = CATEGORY_ORDER[first], CATEGORY_ORDER[second]
        double = INJECTORS[cat_j](INJECTORS[cat_i](LOAD_BLOCK))
        report = validate_action(draft_from(double), logistics_ctx)
        assert report.checked_category == cat_i, (cat_i, cat_j)
        # Fixing the first fault surfaces the second category.
        repaired = INJECTORS[cat_j](LOAD_BLOCK)
        report2 = validate_action(draft_from(repaired), logistics_ctx)
        assert report2.checked_category == cat_j, (cat_i, cat_j)


# ---------------------------------------------------------------------------
# Task validation

TASK_BLOCK = """Objects:
p1 - package
t1 - truck
loc1 - location
loc2 - location
c1 - city
Init:
(at p1 loc1)
(at t1 loc1)
(in-city loc1 c1)
(in-city loc2 c1)
Goal:
(and (at p1 loc2))
"""


def task_draft(block: str) -> TaskDraft:
    return parse_task_block(block)


def test_valid_task_passes(logistics):
    report = validate_task(task_draft(TASK_BLOCK), logistics)
    assert report.checked_category == ALL_PASSED


TASK_MUTATIONS = [
    ("object-shadows-type", "objects", TASK_BLOCK.replace("t1 - truck", "truck - truck")),
    ("duplicate-object-name", "objects", TASK_BLOCK.replace("p1 - package", "p1 - package\np1 - package")),
    ("missing-object-type", "objects", TASK_BLOCK.replace("t1 - truck", "t1")),
    ("unknown-object-type", "objects", TASK_BLOCK.replace("t1 - truck", "t1 - lorry")),
    ("init-malformed", "init", TASK_BLOCK.replace("(at p1 loc1)", "(and (at p1 loc1))")),
    ("init-negative-literal", "init", TASK_BLOCK.replace("(at p1 loc1)", "(not (at p1 loc1))")),
    ("init-undefined-predicate", "init", TASK_BLOCK.replace("(at p1 loc1)", "(delivered p1)")),
    ("init-arity-mismatch", "init", TASK_BLOCK.replace("(at p1 loc1)", "(at p1)")),
    ("init-unknown-object", "init", TASK_BLOCK.replace("(at p1 loc1)", "(at p9 loc1)")),
    ("init-type-mismatch", "init", TASK_BLOCK.replace("(in-city loc1 c1)", "(in-city p1 c1)")),
    ("init-not-ground", "init", TASK_BLOCK.replace("(at p1 loc1)", "(at ?p loc1)")),
    ("goal-undefined-predicate", "goal", TASK_BLOCK.replace("(and (at p1 loc2))", "(and (delivered p1))")),
    ("goal-arity-mismatch", "goal", TASK_BLOCK.replace("(and (at p1 loc2))", "(and (at p1))")),
    ("goal-unknown-object", "goal", TASK_BLOCK.replace("(and (at p1 loc2))", "(and (at p9 loc2))")),
    ("goal-type-mismatch", "goal", TASK_BLOCK.replace("(and (at p1 loc2))", "(and (at p1 c1))")),
    ("goal-unbound-variable", "goal", TASK_BLOCK.replace("(and (at p1 loc2))", "(and (at ?x loc2))")),
    ("goal-malformed", "goal", TASK_BLOCK.replace("(and (at p1 loc2))",
                                                  "(and (when (at p1 loc1) (at p1 loc2)))")),
]


@pytest.mark.parametrize("code,section,faulty", TASK_MUTATIONS,
                         ids=[m[0] for m in TASK_MUTATIONS])
def test_task_mutation(code, section, faulty, logistics):
    report = validate_task(task_draft(faulty), logistics)
    assert report.checked_category == section
    assert {i.code for i in report.issues} == {code}
    assert validate_task(task_draft(TASK_BLOCK), logistics).passed


def test_sections_checked_in_order(logistics):
    faulty = TASK_BLOCK.replace("t1 - truck", "truck - truck").replace(
        "(at p1 loc1)", "(not (at p1 loc1))")
    report = validate_task(task_draft(faulty), logistics)
    assert report.checked_category == "objects"
    # Fixing the objects fault surfaces the init fault.
    init_only = TASK_BLOCK.replace("(at p1 loc1)", "(not (at p1 loc1))")
    assert validate_task(task_draft(init_only), logistics).checked_category == "init"


def test_first_section_reports_all_its_errors(logistics):
    faulty = TASK_BLOCK.replace("(at p1 loc1)", "(not (at p1 loc1))").replace(
        "(at t1 loc1)", "(delivered t1)")
    report = validate_task(task_draft(faulty), logistics)
    assert report.checked_category == "init"
    assert {i.code for i in report.issues} == {"init-negative-literal", "init-undefined-predicate"}


def test_not_allowed_in_goal(logistics):
    block = TASK_BLOCK.replace("(and (at p1 loc2))", "(and (not (at p1 loc1)))")
    assert validate_task(task_draft(block), logistics).passed


# ---------------------------------------------------------------------------
# Zero false positives on the whole corpus


def schema_to_draft(schema, domain):
    lines = ["Parameters:"]
    lines += [f"{v} - {t}" for v, t in schema.params]
    lines.append("Precondition:")
    lines.append(format_formula(schema.precondition))
    lines.append("Effect:")
    lines.append(format_effect(schema.effect))
    lines.append("New Predicates:")
    return draft_from("\n".join(lines), name=schema.name)


def test_no_false_positives_on_corpus():
    import re

    domains = {}
    for path in corpus_files():
        text = path.read_text()
        if "(define (domain" in text:
            domain = parse_domain(text)
            domains[domain.name] = domain
            ctx = make_context(domain)
            ctx.action_names = []  # an existing action may validate itself
            for schema in domain.actions:
                report = validate_action(schema_to_draft(schema, domain), ctx)
                assert report.passed, (path.name, schema.name, report.issues)
    for domain_path, problem_path in domain_problem_pairs():
        domain = parse_domain(domain_path.read_text())
        problem = parse_problem(problem_path.read_text(), domain)
        objects = list(problem.objects)
        init = [read_source(f"({a.predicate} " + " ".join(a.terms) + ")").exprs[0]
                if a.terms else read_source(f"({a.predicate})").exprs[0]
                for a in problem.init]
        goal = read_source(format_formula(problem.goal)).exprs[0]
        draft = TaskDraft(objects=objects, init=init, goal=goal)
        report = validate_task(draft, domain)
        assert report.passed, (problem_path.name, report.issues)


# ---------------------------------------------------------------------------
# Feedback rendering


def test_render_feedback_format(logistics_ctx):
    faulty = LOAD_BLOCK.replace("(at ?v ?l)", "(at ?v)")
    report = validate_action(draft_from(faulty), logistics_ctx)
    text = render_feedback(report)
    assert text.startswith("1. ")
    assert "Fix: " in text
    assert render_feedback(report) == text  # deterministic


def test_render_feedback_numbering(logistics):
    faulty = TASK_BLOCK.replace("(at p1 loc1)", "(not (at p1 loc1))").replace(
        "(at t1 loc1)", "(delivered t1)").replace("(in-city loc1 c1)", "(at ?x loc1)")
    report = validate_task(task_draft(faulty), logistics)
    lines = render_feedback(report).splitlines()
    assert len(lines) == len(report.issues) >= 3
    for n, line in enumerate(lines, start=1):
        assert line.startswith(f"{n}. ")


def test_render_feedback_empty_report_errors():
    from nl2plan.validation import PASSED

    with pytest.raises(ValueError):
        render_feedback(PASSED)
