"""Grounding, heuristics, search, and plan validation."""

import random
import time

import pytest

from conftest import load_domain, load_problem
from nl2plan.pddl import GroundStep, Plan, parse_domain, parse_problem
from nl2plan.planner import (
    PlannerConfig,
    UNREACHABLE,
    ground,
    make_heuristic,
    plan_task,
    solve,
    validate_plan,
)
from nl2plan.planner.ground import GroundingLimitError, applicable, successor
from oracles import (
    BlocksworldOracle,
    bfs_optimal_cost,
    count_reachable_states,
    enumerate_relaxed_reachable_actions,
    relaxed_bfs_plan_length,
)

SUSSMAN = """(define (problem sussman) (:domain blocksworld)
  (:objects a - block b - block c - block)
  (:init (= (total-cost) 0) (on-table a) (on-table b) (on c a)
         (clear b) (clear c) (arm-empty))
  (:goal (and (on a b) (on b c))))"""


@pytest.fixture(scope="module")
def sussman_task(blocksworld):
    return ground(blocksworld, parse_problem(SUSSMAN, blocksworld))


# ---------------------------------------------------------------------------
# Grounding


def test_ground_action_count_matches_enumeration(blocksworld):
    problem = load_problem("blocksworld_easy", blocksworld)
    task = ground(blocksworld, problem)
    produced = {(a.name, a.args) for a in task.actions}
    expected = enumerate_relaxed_reachable_actions(blocksworld, problem)
    assert produced == expected
    assert len(produced) == 8  # 2 pickup + 2 putdown + 2 stack + 2 unstack


@pytest.mark.parametrize("domain_name,problem_name", [
    ("blocksworld", "blocksworld_easy"),
    ("blocksworld", "blocksworld_medium"),
    ("isr", "isr_easy"),
])
def test_grounding_equivalence_brute_force(domain_name, problem_name):
    domain = load_domain(domain_name)
    problem = load_problem(problem_name, domain)
    task = ground(domain, problem)
    produced = {(a.name, a.args) for a in task.actions}
    assert produced == enumerate_relaxed_reachable_actions(domain, problem)


def test_forall_effect_expansion(warehouse):
    problem = load_problem("warehouse_easy", warehouse)
    task = ground(warehouse, problem)
    pushes = [a for a in task.actions if a.name == "push"]
    assert pushes
    for push in pushes:
        # One conditional entry per crate, each with one add and one delete.
        assert len(push.cond_effects) == 2
        for ce in push.cond_effects:
            assert len(ce.adds) == 1 and len(ce.dels) == 1


def test_goal_already_satisfied(blocksworld):
    text = """(define (problem done) (:domain blocksworld)
      (:objects b1 - block) (:init (on-table b1) (clear b1) (arm-empty))
      (:goal (and (on-table b1))))"""
    task = ground(blocksworld, parse_problem(text, blocksworld))
    assert task.satisfies_goal(task.init)
    result = solve(task)
    assert result.outcome == "plan"
    assert result.plan.steps == ()
    assert result.plan.cost == 0


def test_static_predicates_never_enter_atom_table(logistics):
    problem = load_problem("logistics_easy", logistics)
    task = ground(logistics, problem)
    predicates = {a.predicate for a in task.atoms}
    assert "in-city" not in predicates  # static: evaluated at ground time
    assert "at" in predicates


def test_grounding_caps(blocksworld):
    problem = load_problem("blocksworld_hard", blocksworld)
    with pytest.raises(GroundingLimitError):
        ground(blocksworld, problem, max_actions=10)


# ---------------------------------------------------------------------------
# Successor semantics


def find_action(task, name, *args):
    for action in task.actions:
        if action.name == name and action.args == tuple(args):
            return action
    raise AssertionError(f"no ground action ({name} {' '.join(args)})")


def test_successor_load_example(logistics):
    text = """(define (problem two) (:domain logistics)
      (:objects p1 - package t1 - truck l1 - location c1 - city)
      (:init (at p1 l1) (at t1 l1) (in-city l1 c1))
      (:goal (and (loaded p1 t1))))"""
    problem = parse_problem(text, logistics)
    task = ground(logistics, problem)
    load = find_action(task, "load", "p1", "t1", "l1")
    after = successor(load, task.init)
    names = {task.atoms[i] for i in after}
    from nl2plan.pddl import Atom

    assert names == {Atom("at", ("t1", "l1")), Atom("loaded", ("p1", "t1"))}


def test_successor_requires_applicability(sussman_task):
    pickup_a = find_action(sussman_task, "pickup", "a")  # a has c on top
    assert not applicable(pickup_a, sussman_task.init)
    with pytest.raises(ValueError):
        successor(pickup_a, sussman_task.init)


def test_empty_effect_is_identity(blocksworld):
    text = """(define (domain noop) (:types block - object)
      (:predicates (p ?b - block))
      (:action wait :parameters (?b - block) :precondition (p ?b) :effect (and )))"""
    domain = parse_domain(text)
    problem = parse_problem(
        """(define (problem x) (:domain noop) (:objects b1 - block)
           (:init (p b1)) (:goal (and (p b1))))""", domain)
    task = ground(domain, problem)
    wait = find_action(task, "wait", "b1")
    assert successor(wait, task.init) == task.init


def test_conditional_effect_uses_pre_state(warehouse):
    # Loading a crate and pushing in sequence moves it; pushing first does not.
    problem = load_problem("warehouse_easy", warehouse)
    task = ground(warehouse, problem)
    push = find_action(task, "push", "cart1", "bay", "aisle")
    load = find_action(task, "load", "crate1", "cart1", "bay")
    idx = task.atom_index
    from nl2plan.pddl import Atom

    crate_at_aisle = idx[Atom("crate-at", ("crate1", "aisle"))]
    # Condition false in pre-state: crate stays.
    after = successor(push, task.init)
    assert crate_at_aisle not in after
    # Condition true in pre-state: crate moves with the cart.
    loaded = successor(load, task.init)
    after2 = successor(push, loaded)
    assert crate_at_aisle in after2


# ---------------------------------------------------------------------------
# Heuristics


def test_heuristics_zero_iff_goal(sussman_task):
    ff = make_heuristic(sussman_task, "ff")
    gc = make_heuristic(sussman_task, "goal-count")
    result = solve(sussman_task, PlannerConfig(search="bfs"))
    # Recreate the goal state by running the optimal plan.
    state = sussman_task.init
    for step in result.plan.steps:
        state = successor(find_action(sussman_task, step.action, *step.args), state)
    assert ff(state) == 0 and gc(state) == 0
    assert ff(sussman_task.init) > 0 and gc(sussman_task.init) > 0


def test_goal_count_value(sussman_task):
    gc = make_heuristic(sussman_task, "goal-count")
    assert gc(sussman_task.init) == 2.0  # neither on(a,b) nor on(b,c) holds


def test_ff_equals_relaxed_bfs_oracle(sussman_task):
    ff = make_heuristic(sussman_task, "ff")
    oracle = relaxed_bfs_plan_length(sussman_task, sussman_task.init)
    assert oracle == 5
    assert ff(sussman_task.init) == 5.0


def test_unreachable_goal_gives_sentinel(blocksworld):
    text = """(define (problem stuck) (:domain blocksworld)
      (:objects b1 b2 - block)
      (:init (on b1 b2) (on b2 b1)) (:goal (and (clear b1))))"""
    # A cyclic tower: nothing is clear and the arm cannot act.
    task = ground(blocksworld, parse_problem(text, blocksworld))
    ff = make_heuristic(task, "ff")
    assert ff(task.init) == UNREACHABLE


# ---------------------------------------------------------------------------
# Search


@pytest.mark.parametrize("problem_name,minimum", [
    ("blocksworld_easy", 4),
    ("blocksworld_medium", 8),
    ("blocksworld_hard", 12),
])
def test_blocksworld_sizes(blocksworld, problem_name, minimum):
    problem = load_problem(problem_name, blocksworld)
    started = time.monotonic()
    result = plan_task(blocksworld, problem)
    elapsed = time.monotonic() - started
    assert result.outcome == "plan"
    assert len(result.plan.steps) >= minimum
    assert elapsed < 10.0
    assert validate_plan(blocksworld, problem, result.plan).valid


def test_uniform_cost_matches_bfs_oracle(blocksworld):
    for name in ("blocksworld_easy", "blocksworld_medium", "blocksworld_hard"):
        problem = load_problem(name, blocksworld)
        task = ground(blocksworld, problem)
        assert count_reachable_states(task) <= 10**5
        result = solve(task, PlannerConfig(search="bfs"))
        assert result.plan.cost == bfs_optimal_cost(task)


def test_unsolvable_contradictory_goal(blocksworld):
    problem = load_problem("blocksworld_impossible", blocksworld)
    task = ground(blocksworld, problem)
    started = time.monotonic()
    result = solve(task)
    assert result.outcome == "unsolvable"
    assert time.monotonic() - started < 5.0
    assert result.user_message == "No plan found"
    assert bfs_optimal_cost(task) is None  # oracle agrees: exhausted, no goal


def test_resource_limit_is_distinct(blocksworld):
    problem = load_problem("blocksworld_hard", blocksworld)
    task = ground(blocksworld, problem)
    result = solve(task, PlannerConfig(search="bfs", max_expansions=5))
    assert result.outcome == "resource-limit"
    assert "No plan" not in result.user_message


def test_determinism(blocksworld):
    problem = load_problem("blocksworld_medium", blocksworld)
    task = ground(blocksworld, problem)
    first = solve(task, PlannerConfig())
    second = solve(task, PlannerConfig())
    assert first.plan == second.plan
    assert first.stats.expansions == second.stats.expansions


def test_astar_and_goal_count_also_solve(blocksworld):
    problem = load_problem("blocksworld_medium", blocksworld)
    task = ground(blocksworld, problem)
    for config in (PlannerConfig(search="astar"), PlannerConfig(heuristic="goal-count")):
        result = solve(task, config)
        assert result.outcome == "plan"
        assert validate_plan(blocksworld, problem, result.plan).valid


def test_adl_corpus_tasks_solve():
    for domain_name, problem_name in (("isr", "isr_easy"), ("warehouse", "warehouse_easy"),
                                      ("logistics", "logistics_easy")):
        domain = load_domain(domain_name)
        problem = load_problem(problem_name, domain)
        result = plan_task(domain, problem)
        assert result.outcome == "plan", domain_name
        assert validate_plan(domain, problem, result.plan).valid


def test_isr_respects_adjacency(isr):
    problem = load_problem("isr_easy", isr)
    task = ground(isr, problem)
    # Replacing v1 with the neighbor of a set member must not be grounded
    # as applicable anywhere reachable: v2 borders v1 and v3 (both in set).
    result = solve(task)
    assert result.outcome == "plan"
    for step in result.plan.steps:
        assert step != GroundStep("reconfigure-set", ("v2", "v1"))


# ---------------------------------------------------------------------------
# Plan validation against the hand-coded simulator


def test_planner_output_always_validates(blocksworld):
    for name in ("blocksworld_easy", "blocksworld_medium", "blocksworld_hard"):
        problem = load_problem(name, blocksworld)
        result = plan_task(blocksworld, problem)
        assert validate_plan(blocksworld, problem, result.plan).valid


def test_verdict_names_failing_step(blocksworld):
    problem = load_problem("blocksworld_easy", blocksworld)
    # Step 2 stacks onto b1 while b1 is still under b2: precondition unmet.
    plan = Plan((
        GroundStep("unstack", ("b2", "b1")),
        GroundStep("stack", ("b2", "b2")),
    ), 2)
    verdict = validate_plan(blocksworld, problem, plan)
    assert not verdict.valid
    assert verdict.failed_step == 2
    assert "stack" in verdict.reason


def test_goal_failure_reported(blocksworld):
    problem = load_problem("blocksworld_easy", blocksworld)
    plan = Plan((GroundStep("unstack", ("b2", "b1")), GroundStep("putdown", ("b2",))), 2)
    verdict = validate_plan(blocksworld, problem, plan)
    assert not verdict.valid
    assert verdict.failed_step is None
    assert "goal" in verdict.reason


def test_unknown_action_and_arity(blocksworld):
    problem = load_problem("blocksworld_easy", blocksworld)
    assert validate_plan(blocksworld, problem, Plan((GroundStep("fly", ("b1",)),), 1)).failed_step == 1
    assert validate_plan(blocksworld, problem, Plan((GroundStep("pickup", ()),), 1)).failed_step == 1


def test_random_sequences_match_simulator(blocksworld):
    text = """(define (problem three) (:domain blocksworld)
      (:objects a b c - block)
      (:init (on-table a) (on-table b) (on c a) (clear b) (clear c) (arm-empty))
      (:goal (and (on a b) (on b c))))"""
    problem = parse_problem(text, blocksworld)
    goal_atoms = list(problem.goal.parts)
    blocks = ["a", "b", "c"]
    moves = (
        [("pickup", (b,)) for b in blocks]
        + [("putdown", (b,)) for b in blocks]
        + [("stack", (x, y)) for x in blocks for y in blocks if x != y]
        + [("unstack", (x, y)) for x in blocks for y in blocks if x != y]
    )
    rng = random.Random(42)
    for _ in range(1000):
        sequence = [rng.choice(moves) for _ in range(rng.randint(1, 6))]
        plan = Plan(tuple(GroundStep(n, a) for n, a in sequence), len(sequence))
        verdict = validate_plan(blocksworld, problem, plan)

        oracle = BlocksworldOracle(problem)
        failed_at = None
        for number, (name, args) in enumerate(sequence, start=1):
            if not oracle.apply(name, args):
                failed_at = number
                break
        if failed_at is not None:
            assert not verdict.valid
            assert verdict.failed_step == failed_at, sequence
        elif oracle.satisfies(goal_atoms):
            assert verdict.valid, sequence
        else:
            assert not verdict.valid
            assert verdict.failed_step is None, sequence
