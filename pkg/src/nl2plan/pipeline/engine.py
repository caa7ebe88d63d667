"""The six-step pipeline engine.

Steps run strictly in order; every completed step is persisted before
the next begins, so a killed process can always be restarted with
``execute`` and will continue from the last boundary. Runs configured
for human feedback park (status ``awaiting-human-feedback``) instead of
blocking a thread; ``apply_feedback`` consumes the pending review and
continues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..drafts import ActionDraft, DomainContext, TaskDraft
from ..llm.provider import ChatRequest, LlmProvider, ProviderError, make_provider
from ..llm.templates import load_template, render_template
from ..pddl.model import (
    ActionSchema,
    Atom,
    DomainSpec,
    EffectAnd,
    EffectExpr,
    EffectForall,
    EffectLiteral,
    Formula,
    PddlError,
    PredicateDecl,
    ProblemSpec,
    TypeHierarchy,
    When,
    And,
    Equality,
    Exists,
    Forall,
    Imply,
    IncreaseCost,
    Not,
    Or,
)
from ..pddl.parser import build_action, build_goal, build_init_atom, parse_domain, parse_problem
from ..pddl.printer import print_domain, print_plan, print_problem
from ..pddl.sexpr import head_of, to_text
from ..planner import GroundingLimitError, PlannerConfig, ground, solve, validate_plan
from ..validation import PASSED, ValidationReport, render_feedback, validate_action, validate_task
from .artifacts import NlAction, TypeList, TypeTree, nl_actions_to_text
from .config import RunConfig, STEP_IDS, step_id, step_number
from .outputs import (
    OutputParseError,
    parse_action_block,
    parse_actions_block,
    parse_hierarchy_block,
    parse_step_output,
    parse_task_block,
    parse_types_block,
    extract_block,
)
from .records import StepRecord, assert_budgets
from .store import RunManifest, RunStore

NO_FEEDBACK_SENTINEL = "No feedback."
FORMAT_RETRY_LINE = "Respond only in the required format."

GENERATED_DOMAIN_NAME = "generated-domain"
GENERATED_PROBLEM_NAME = "generated-task"


class StepFailure(Exception):
    def __init__(self, step: str, cause: str):
        self.step = step
        self.cause = cause
        super().__init__(f"step {step} failed: {cause}")


class Parked(Exception):
    """Internal signal: the run is waiting for human feedback."""


class EditError(ValueError):
    """An edited artifact violates the step's structural invariants."""


@dataclass
class EngineState:
    description: str
    type_list: Optional[TypeList] = None
    tree: Optional[TypeTree] = None
    nl_actions: list[NlAction] = field(default_factory=list)
    domain: Optional[DomainSpec] = None
    problem: Optional[ProblemSpec] = None


def _is_no_feedback(text: str) -> bool:
    lines = [l.strip() for l in text.strip().splitlines() if l.strip()]
    return bool(lines) and lines[-1].lower() in ("no feedback.", "no feedback")


def _reprompt(original: str, solution: str, feedback: str) -> str:
    return (
        f"{original}\n\nYour previous solution:\n{solution}\n\n"
        f"Feedback on that solution:\n{feedback}\n\n"
        "Take the feedback into account and provide a complete corrected "
        "solution in the same format."
    )


def _validator_reprompt(original: str, solution: str, feedback: str) -> str:
    return (
        f"{original}\n\nYour previous solution:\n{solution}\n\n"
        f"The automatic validator found problems:\n{feedback}\n\n"
        "Fix them and provide the complete corrected solution in the same format."
    )


class Engine:
    def __init__(self, store: RunStore, provider: Optional[LlmProvider] = None):
        self.store = store
        self.manifest = store.load_manifest()
        self.config = self.manifest.config
        self.provider = provider or make_provider(self.config.provider)
        self.state = EngineState(self.manifest.description)

    # ------------------------------------------------------------------
    # Gateway helpers

    def _complete(self, step: str, template_id: str, prompt: str, record: StepRecord) -> str:
        request = ChatRequest(
            step=step,
            template_id=template_id,
            messages=(("user", prompt),),
            temperature=self.config.provider.temperature,
            max_tokens=self.config.provider.max_tokens,
        )
        try:
            exchange = self.provider.complete(request)
        except ProviderError as exc:
            raise StepFailure(step, f"LLM provider failure: {exc}") from exc
        record.exchanges.append(exchange)
        return exchange.response

    def _complete_parsed(self, step, template_id, prompt, parse, record):
        """One retry with a format reminder; a second failure aborts the step."""
        response = self._complete(step, template_id, prompt, record)
        try:
            return prompt, response, parse(response)
        except OutputParseError as first_error:
            retry_prompt = f"{prompt}\n\n{FORMAT_RETRY_LINE}"
            response = self._complete(step, template_id, retry_prompt, record)
            try:
                return retry_prompt, response, parse(response)
            except OutputParseError as exc:
                raise StepFailure(
                    step, f"unparseable output after retry: {exc} (first error: {first_error})"
                ) from exc

    # ------------------------------------------------------------------
    # Feedback substep (shared by the simple steps)

    def _feedback_substep(
        self,
        step: str,
        record: StepRecord,
        bindings: dict[str, str],
        prompt: str,
        response: str,
        artifact_text: str,
        parse: Callable,
        pending_extra: Optional[dict] = None,
    ):
        """Returns the revised parse result or None to keep the artifact."""
        source = self.config.feedback_for(step)
        if source == "none":
            record.feedback = {"source": "none", "status": "skipped", "rounds": 0}
            return None
        if source == "human":
            record.pending = {
                "unit": "artifact",
                "prompt": prompt,
                "response": response,
                "artifact_text": artifact_text,
                **(pending_extra or {}),
            }
            self.store.save_record(record)
            raise Parked()
        template = load_template(f"{step}_feedback")
        fb_prompt = render_template(template, {**bindings, "candidate": artifact_text})
        fb_response = self._complete(step, template.id, fb_prompt, record)
        if _is_no_feedback(fb_response):
            record.feedback = {
                "source": "llm", "status": "accepted", "rounds": 0, "text": fb_response,
            }
            return None
        revised_prompt = _reprompt(prompt, response, fb_response)
        _, _, parsed = self._complete_parsed(
            step, f"{step}_main", revised_prompt, parse, record
        )
        record.feedback = {
            "source": "llm", "status": "revised", "rounds": 1, "text": fb_response,
        }
        return parsed

    def _apply_human_feedback_simple(self, step, record, body, parse):
        pending = record.pending
        record.pending = None
        if body.get("approve"):
            record.feedback = {"source": "human", "status": "approved", "rounds": 0}
            return None
        text = body.get("text", "").strip()
        if not text:
            raise EditError("feedback body must approve or carry non-empty text")
        revised_prompt = _reprompt(pending["prompt"], pending["response"], text)
        _, _, parsed = self._complete_parsed(
            step, f"{step}_main", revised_prompt, parse, record
        )
        record.feedback = {
            "source": "human", "status": "revised", "rounds": 1, "text": text,
        }
        return parsed

    # ------------------------------------------------------------------
    # Steps 1-3 (single LLM artifact each)

    def _run_type_extraction(self, record: StepRecord) -> None:
        bindings = {"description": self.state.description}
        prompt = render_template(load_template("type_extraction_main"), bindings)
        parse = lambda text: parse_types_block(extract_block(text, "types"))
        used_prompt, response, (types, warnings) = self._complete_parsed(
            "type_extraction", "type_extraction_main", prompt, parse, record
        )
        record.add_warning(*warnings)
        revised = self._feedback_substep(
            "type_extraction", record, bindings, used_prompt, response,
            types.to_text(), parse,
        )
        if revised is not None:
            types, warnings = revised
            record.add_warning(*warnings)
        self._finish_types(record, types)

    def _finish_types(self, record: StepRecord, types: TypeList) -> None:
        record.artifact = types.to_json()
        record.artifact_text = types.to_text()
        self.state.type_list = types

    def _run_hierarchy(self, record: StepRecord) -> None:
        types = self.state.type_list
        bindings = {"description": self.state.description, "types": types.to_text()}
        prompt = render_template(load_template("hierarchy_construction_main"), bindings)
        parse = lambda text: parse_hierarchy_block(extract_block(text, "hierarchy"), types)
        used_prompt, response, tree = self._complete_parsed(
            "hierarchy_construction", "hierarchy_construction_main", prompt, parse, record
        )
        revised = self._feedback_substep(
            "hierarchy_construction", record, bindings, used_prompt, response,
            tree.to_text(), parse,
        )
        if revised is not None:
            tree = revised
        self._finish_hierarchy(record, tree)

    def _finish_hierarchy(self, record: StepRecord, tree: TypeTree) -> None:
        record.artifact = tree.to_json()
        record.artifact_text = tree.to_text()
        self.state.tree = tree

    def _run_action_extraction(self, record: StepRecord) -> None:
        bindings = {
            "description": self.state.description,
            "hierarchy": self.state.tree.to_text(),
        }
        prompt = render_template(load_template("action_extraction_main"), bindings)
        parse = lambda text: parse_actions_block(extract_block(text, "actions"))
        used_prompt, response, (actions, warnings) = self._complete_parsed(
            "action_extraction", "action_extraction_main", prompt, parse, record
        )
        record.add_warning(*warnings)
        revised = self._feedback_substep(
            "action_extraction", record, bindings, used_prompt, response,
            nl_actions_to_text(actions), parse,
        )
        if revised is not None:
            actions, warnings = revised
            record.add_warning(*warnings)
        self._finish_nl_actions(record, actions)

    def _finish_nl_actions(self, record: StepRecord, actions: list[NlAction]) -> None:
        record.artifact = {"actions": [a.to_json() for a in actions]}
        record.artifact_text = nl_actions_to_text(actions)
        self.state.nl_actions = actions

    # ------------------------------------------------------------------
    # Step 4: action construction (two passes, validator loop, pruning)

    def _run_action_construction(self, record: StepRecord) -> None:
        construction = ActionConstruction(self, record)
        construction.run()

    # ------------------------------------------------------------------
    # Step 5: task extraction

    def _task_bindings(self) -> dict[str, str]:
        return {
            "description": self.state.description,
            "domain_summary": _domain_summary(self.state.domain),
        }

    def _run_task_extraction(self, record: StepRecord) -> None:
        domain = self.state.domain
        bindings = self._task_bindings()
        prompt = render_template(load_template("task_extraction_main"), bindings)
        parse = lambda text: parse_task_block(extract_block(text, "task"))
        used_prompt, response, draft = self._complete_parsed(
            "task_extraction", "task_extraction_main", prompt, parse, record
        )
        draft, used_prompt, response, validations = self._task_validation_loop(
            record, draft, used_prompt, response, parse, validations=0
        )
        record.flags["validations"] = validations
        revised = self._feedback_substep(
            "task_extraction", record, bindings, used_prompt, response,
            _task_draft_text(draft), parse,
            pending_extra={"validations": validations},
        )
        if revised is not None:
            draft = revised
            draft, _, _, validations = self._task_validation_loop(
                record, draft, used_prompt, response, parse, validations
            )
            record.flags["validations"] = validations
        self._finish_task(record, draft)

    def _task_validation_loop(self, record, draft, prompt, response, parse, validations):
        """Validate/regenerate until clean or the total budget is spent."""
        budget = self.config.max_task_validations
        while True:
            report = validate_task(draft, self.state.domain)
            validations += 1
            record.validator_rounds.append(report.to_json())
            if report.passed:
                return draft, prompt, response, validations
            if validations >= budget:
                record.flags["accepted_flawed"] = True
                self.manifest.degraded = True
                return draft, prompt, response, validations
            feedback = render_feedback(report)
            prompt = _validator_reprompt(prompt, response, feedback)
            prompt, response, draft = self._complete_parsed(
                "task_extraction", "task_extraction_main", prompt, parse, record
            )

    def _apply_task_feedback(self, record: StepRecord, body: dict) -> None:
        pending = record.pending
        validations = pending.get("validations", 0)
        parse = lambda text: parse_task_block(extract_block(text, "task"))
        revised = self._apply_human_feedback_simple("task_extraction", record, body, parse)
        if revised is not None:
            draft, _, _, validations = self._task_validation_loop(
                record, revised, pending["prompt"], pending["response"], parse, validations
            )
            record.flags["validations"] = validations
        else:
            draft = parse_task_block(pending["artifact_text"])
        self._finish_task(record, draft)

    def _finish_task(self, record: StepRecord, draft: TaskDraft) -> None:
        domain = self.state.domain
        try:
            problem = _build_problem(draft, domain)
        except PddlError as exc:
            record.flags["build_error"] = str(exc)
            record.artifact = {"problem_pddl": None, "draft_text": _task_draft_text(draft)}
            record.artifact_text = _task_draft_text(draft)
            self.state.problem = None
            return
        text = print_problem(problem)
        record.artifact = {"problem_pddl": text}
        record.artifact_text = text
        self.state.problem = problem
        self.store.write_text("problem.pddl", text)

    # ------------------------------------------------------------------
    # Step 6: planning

    def _run_planning(self, record: StepRecord) -> None:
        domain = self.state.domain
        problem = self.state.problem
        if domain is None:
            raise StepFailure("planning", "no domain available")
        if problem is None:
            raise StepFailure(
                "planning",
                "the task extraction output could not be built into a problem "
                "(see the step 5 record)",
            )
        try:
            task = ground(domain, problem)
        except GroundingLimitError as exc:
            raise StepFailure("planning", f"grounding blow-up: {exc}") from exc
        config = PlannerConfig(
            search=self.config.search,
            heuristic=self.config.heuristic,
            max_expansions=self.config.max_expansions,
            timeout_s=self.config.planner_timeout_s,
        )
        result = solve(task, config)
        if result.outcome == "resource-limit":
            raise StepFailure("planning", "planner resource exhaustion")
        if result.outcome == "plan":
            verdict = validate_plan(domain, problem, result.plan)
            if not verdict.valid:
                raise StepFailure("planning", f"planner produced an invalid plan: {verdict.reason}")
            plan_text = print_plan(result.plan)
            self.store.write_text("plan.txt", plan_text)
            self.store.remove("NO_PLAN")
            record.artifact = {
                "outcome": "plan",
                "plan": plan_text,
                "cost": result.plan.cost,
                "steps": len(result.plan.steps),
                "stats": {
                    "expansions": result.stats.expansions,
                    "generated": result.stats.generated,
                },
            }
            record.artifact_text = plan_text
        else:
            self.store.write_text("NO_PLAN", "No plan found\n")
            self.store.remove("plan.txt")
            record.artifact = {
                "outcome": "unsolvable",
                "message": "No plan found",
                "stats": {
                    "expansions": result.stats.expansions,
                    "generated": result.stats.generated,
                },
            }
            record.artifact_text = "No plan found"

    # ------------------------------------------------------------------
    # Execution loop

    def execute(self) -> RunManifest:
        runners = {
            1: self._run_type_extraction,
            2: self._run_hierarchy,
            3: self._run_action_extraction,
            4: self._run_action_construction,
            5: self._run_task_extraction,
            6: self._run_planning,
        }
        start = step_number(self.config.start_step)
        records = self.store.load_records()
        try:
            self._materialize(records, start)
        except (PddlError, ValueError) as exc:
            return self._fail(step_id(min(records, default=1)), f"corrupt run state: {exc}")

        for number in range(start, len(STEP_IDS) + 1):
            existing = records.get(number)
            if existing is not None and existing.complete and not existing.superseded:
                continue
            if existing is not None and existing.pending is not None:
                return self._park(number)
            record = StepRecord(step_id(number), number)
            self.manifest.status = "running"
            self.manifest.current_step = number
            self.store.save_manifest(self.manifest)
            try:
                runners[number](record)
            except Parked:
                return self._park(number)
            except StepFailure as exc:
                return self._fail(exc.step, exc.cause)
            self._complete_record(record)
        return self._finish()

    def _complete_record(self, record: StepRecord) -> None:
        record.complete = True
        assert_budgets(record, self.config.max_validator_messages, self.config.max_task_validations)
        self.store.save_record(record)

    def continue_after_feedback(self, number: int, body: dict) -> RunManifest:
        record = self.store.load_record(number)
        if record is None or record.pending is None:
            raise EditError(f"step {number} is not awaiting feedback")
        self._materialize(self.store.load_records(), step_number(self.config.start_step))
        pending_text = record.pending.get("artifact_text", "")
        try:
            if number == 4:
                construction = ActionConstruction(self, record)
                construction.apply_feedback(body)
            elif number == 5:
                self._apply_task_feedback(record, body)
            else:
                parse = {
                    1: lambda text: parse_types_block(extract_block(text, "types")),
                    2: lambda text: parse_hierarchy_block(
                        extract_block(text, "hierarchy"), self.state.type_list
                    ),
                    3: lambda text: parse_actions_block(extract_block(text, "actions")),
                }[number]
                block_parse = {
                    1: parse_types_block,
                    2: lambda text: parse_hierarchy_block(text, self.state.type_list),
                    3: parse_actions_block,
                }[number]
                revised = self._apply_human_feedback_simple(step_id(number), record, body, parse)
                value = revised if revised is not None else block_parse(pending_text)
                if number in (1, 3):
                    value, warnings = value
                    record.add_warning(*warnings)
                finish = {1: self._finish_types, 2: self._finish_hierarchy, 3: self._finish_nl_actions}
                finish[number](record, value)
        except Parked:
            return self._park(number)
        except StepFailure as exc:
            return self._fail(exc.step, exc.cause)
        if record.pending is None:
            self._complete_record(record)
        return self.execute()

    def _park(self, number: int) -> RunManifest:
        self.manifest.status = "awaiting-human-feedback"
        self.manifest.current_step = number
        self.store.save_manifest(self.manifest)
        return self.manifest

    def _fail(self, step: str, cause: str) -> RunManifest:
        self.manifest.status = "failed"
        self.manifest.error = f"{step}: {cause}"
        self.store.save_manifest(self.manifest)
        return self.manifest

    def _finish(self) -> RunManifest:
        self.store.write_usage()
        self.manifest.status = "done"
        self.manifest.current_step = len(STEP_IDS)
        self.store.save_manifest(self.manifest)
        return self.manifest

    # ------------------------------------------------------------------
    # State reconstruction

    def _materialize(self, records: dict[int, StepRecord], start: int) -> None:
        state = self.state
        for number, record in sorted(records.items()):
            if not record.complete or record.superseded or record.artifact is None:
                continue
            if number == 1:
                state.type_list = TypeList.from_json(record.artifact)
            elif number == 2:
                state.tree = TypeTree.from_json(record.artifact)
            elif number == 3:
                state.nl_actions = [NlAction.from_json(a) for a in record.artifact["actions"]]
            elif number == 4 and record.artifact.get("domain_pddl"):
                state.domain = parse_domain(record.artifact["domain_pddl"])
            elif number == 5 and record.artifact.get("problem_pddl"):
                state.problem = None  # rebuilt below once the domain is known
        if state.domain is None:
            text = self.store.read_text("domain.pddl")
            if text:
                state.domain = parse_domain(text)
        if state.domain is not None:
            record = records.get(5)
            if record and record.complete and not record.superseded and record.artifact:
                text = record.artifact.get("problem_pddl")
                if text:
                    state.problem = parse_problem(text, state.domain)
            if state.problem is None:
                text = self.store.read_text("problem.pddl")
                if text:
                    state.problem = parse_problem(text, state.domain)


# ---------------------------------------------------------------------------
# Step 4 implementation


class ActionConstruction:
    """Two-pass per-action construction with a validator loop and pruning.

    The whole loop position serializes into the step record so a run can
    park for human feedback after any action and continue later.
    """

    def __init__(self, engine: Engine, record: StepRecord):
        self.engine = engine
        self.record = record
        self.config = engine.config
        self.state = engine.state
        if record.construction is None:
            record.construction = {"passes": [{"actions": []}, {"actions": []}]}

    # -- prompt plumbing

    def _pool_text(self, pool: dict[str, PredicateDecl]) -> str:
        if not pool:
            return "(none yet)"
        lines = []
        for decl in pool.values():
            params = " ".join(f"{v} - {t}" for v, t in decl.params)
            inner = f"({decl.name} {params})" if params else f"({decl.name})"
            lines.append(f"{inner}: {decl.description}" if decl.description else inner)
        return "\n".join(lines)

    def _bindings(self, action: NlAction, pool) -> dict[str, str]:
        return {
            "description": self.state.description,
            "hierarchy": self.state.tree.to_text(),
            "action_name": action.name,
            "action_description": action.description,
            "action_usage": action.usage,
            "predicates": self._pool_text(pool),
        }

    def _context(self, pool: dict[str, PredicateDecl]) -> DomainContext:
        return DomainContext(
            hierarchy=self.state.tree.hierarchy,
            predicates=pool,
            action_names=[a.name for a in self.state.nl_actions],
        )

    # -- one action, one pass

    def _draft_action(self, action: NlAction, pool, entry: dict):
        """Generate + validator loop. Returns the accepted draft."""
        engine = self.engine
        bindings = self._bindings(action, pool)
        prompt = render_template(load_template("action_construction_main"), bindings)
        parse = lambda text: _named_draft(parse_action_block(extract_block(text, "action")), action.name)
        prompt, response, draft = engine._complete_parsed(
            "action_construction", "action_construction_main", prompt, parse, self.record
        )
        draft, prompt, response = self._validator_loop(draft, prompt, response, pool, entry, parse)
        entry["prompt"] = prompt
        entry["response"] = response
        return draft

    def _validator_loop(self, draft, prompt, response, pool, entry, parse):
        engine = self.engine
        budget = self.config.max_validator_messages
        while True:
            report = validate_action(draft, self._context(pool))
            entry["validator_reports"].append(report.to_json())
            if report.passed:
                return draft, prompt, response
            if entry["validator_messages"] >= budget:
                entry["accepted_flawed"] = True
                self.engine.manifest.degraded = True
                return draft, prompt, response
            entry["validator_messages"] += 1
            feedback = render_feedback(report)
            prompt = _validator_reprompt(prompt, response, feedback)
            prompt, response, draft = engine._complete_parsed(
                "action_construction", "action_construction_main", prompt, parse, self.record
            )

    def _feedback_for_action(self, action: NlAction, draft, pool, entry, progress):
        """Per-action feedback substep on the second pass."""
        engine = self.engine
        source = self.config.feedback_for("action_construction")
        if source == "none":
            entry["feedback"] = {"source": "none", "status": "skipped", "rounds": 0}
            return draft
        if source == "human":
            self.record.pending = {
                "unit": "action",
                "action_name": action.name,
                "prompt": entry["prompt"],
                "response": entry["response"],
                "artifact_text": _draft_text(draft),
                "progress": progress,
            }
            self.engine.store.save_record(self.record)
            raise Parked()
        template = load_template("action_construction_feedback")
        fb_prompt = render_template(
            template,
            {
                "description": self.state.description,
                "action_name": action.name,
                "predicates": self._pool_text(pool),
                "candidate": _draft_text(draft),
            },
        )
        fb_response = engine._complete("action_construction", template.id, fb_prompt, self.record)
        if _is_no_feedback(fb_response):
            entry["feedback"] = {"source": "llm", "status": "accepted", "rounds": 0, "text": fb_response}
            return draft
        parse = lambda text: _named_draft(parse_action_block(extract_block(text, "action")), action.name)
        revised_prompt = _reprompt(entry["prompt"], entry["response"], fb_response)
        prompt, response, revised = engine._complete_parsed(
            "action_construction", "action_construction_main", revised_prompt, parse, self.record
        )
        entry["feedback"] = {"source": "llm", "status": "revised", "rounds": 1, "text": fb_response}
        revised, prompt, response = self._validator_loop(revised, prompt, response, pool, entry, parse)
        entry["prompt"], entry["response"] = prompt, response
        return revised

    # -- the two passes

    def run(self) -> None:
        progress = {
            "pass": 1,
            "index": 0,
            "pool": [],
            "pass1_blocks": [],
            "final_blocks": [],
        }
        self._drive(progress)

    def apply_feedback(self, body: dict) -> None:
        pending = self.record.pending
        progress = pending["progress"]
        self.record.pending = None
        pool = _pool_from_json(progress["pool"])
        action = next(a for a in self.state.nl_actions if a.name == pending["action_name"])
        entry = self.record.construction["passes"][1]["actions"][-1]
        draft = _named_draft(parse_action_block(pending["artifact_text"]), action.name)
        if body.get("approve"):
            entry["feedback"] = {"source": "human", "status": "approved", "rounds": 0}
        else:
            text = body.get("text", "").strip()
            if not text:
                raise EditError("feedback body must approve or carry non-empty text")
            parse = lambda t: _named_draft(parse_action_block(extract_block(t, "action")), action.name)
            revised_prompt = _reprompt(pending["prompt"], pending["response"], text)
            prompt, response, draft = self.engine._complete_parsed(
                "action_construction", "action_construction_main", revised_prompt, parse, self.record
            )
            entry["feedback"] = {"source": "human", "status": "revised", "rounds": 1, "text": text}
            draft, prompt, response = self._validator_loop(draft, prompt, response, pool, entry, parse)
            entry["prompt"], entry["response"] = prompt, response
        self._accept(draft, pool, entry)
        progress["pool"] = _pool_to_json(pool)
        progress["final_blocks"].append({"name": action.name, "block": _draft_text(draft)})
        progress["index"] += 1
        self._drive(progress)

    def _drive(self, progress: dict) -> None:
        """Run from the saved loop position to completion (or next park)."""
        pool = _pool_from_json(progress["pool"])
        actions = self.state.nl_actions

        if progress["pass"] == 1:
            pass_entries = self.record.construction["passes"][0]["actions"]
            for i in range(progress["index"], len(actions)):
                action = actions[i]
                entry = _new_entry(action.name)
                pass_entries.append(entry)
                draft = self._draft_action(action, pool, entry)
                self._accept(draft, pool, entry)
                progress["pass1_blocks"].append({"name": action.name, "block": _draft_text(draft)})
                progress["index"] = i + 1
                progress["pool"] = _pool_to_json(pool)
            progress["pass"] = 2
            progress["index"] = 0

        pass_entries = self.record.construction["passes"][1]["actions"]
        for i in range(progress["index"], len(actions)):
            action = actions[i]
            entry = _new_entry(action.name)
            pass_entries.append(entry)
            draft = self._draft_action(action, pool, entry)
            progress["pool"] = _pool_to_json(pool)
            draft = self._feedback_for_action(action, draft, pool, entry, progress)
            self._accept(draft, pool, entry)
            progress["pool"] = _pool_to_json(pool)
            progress["final_blocks"].append({"name": action.name, "block": _draft_text(draft)})
            progress["index"] = i + 1

        self._finalize(pool, progress)

    def _accept(self, draft: ActionDraft, pool: dict[str, PredicateDecl], entry: dict) -> None:
        entry["block"] = _draft_text(draft)
        for pred in draft.new_predicates:
            if pred.name not in pool:
                pool[pred.name] = pred.as_decl()

    def _finalize(self, pool: dict[str, PredicateDecl], progress: dict) -> None:
        engine = self.engine
        tree = self.state.tree
        actions: list[ActionSchema] = []
        excluded: list[dict] = []
        for item in progress["final_blocks"]:
            draft = _named_draft(parse_action_block(item["block"]), item["name"])
            nl = next(a for a in self.state.nl_actions if a.name == item["name"])
            try:
                schema = build_action(
                    draft.name,
                    [(v, t or "object") for v, t in draft.params],
                    draft.precondition,
                    draft.effect,
                    pool,
                    tree.hierarchy,
                    description=nl.description,
                )
            except PddlError as exc:
                excluded.append({"name": item["name"], "error": str(exc)})
                continue
            actions.append(schema)
        if excluded:
            self.record.flags["excluded_actions"] = excluded
            engine.manifest.degraded = True
        if not actions:
            raise StepFailure("action_construction", "no action could be built into the domain")

        hierarchy, predicates = _prune(tree.hierarchy, pool, actions)
        domain = DomainSpec(
            GENERATED_DOMAIN_NAME,
            hierarchy,
            tuple(predicates),
            tuple(actions),
        )
        text = print_domain(domain)
        self.record.artifact = {"domain_pddl": text}
        self.record.artifact_text = text
        self.state.domain = parse_domain(text)
        engine.store.write_text("domain.pddl", text)


def _new_entry(name: str) -> dict:
    return {
        "name": name,
        "validator_messages": 0,
        "validator_reports": [],
        "accepted_flawed": False,
        "feedback": None,
        "block": "",
        "prompt": "",
        "response": "",
    }


def _named_draft(draft: ActionDraft, name: str) -> ActionDraft:
    draft.name = name
    return draft


def _draft_text(draft: ActionDraft) -> str:
    lines = ["Parameters:"]
    for var, typ in draft.params:
        lines.append(f"{var} - {typ}" if typ else var)
    lines.append("Precondition:")
    lines.append(to_text(draft.precondition) if draft.precondition is not None else "(and )")
    lines.append("Effect:")
    lines.append(to_text(draft.effect) if draft.effect is not None else "(and )")
    lines.append("New Predicates:")
    for pred in draft.new_predicates:
        params = " ".join(f"{v} - {t}" if t else v for v, t in pred.params)
        inner = f"({pred.name} {params})" if params else f"({pred.name})"
        lines.append(f"{inner}: {pred.description}" if pred.description else inner)
    return "\n".join(lines)


def _task_draft_text(draft: TaskDraft) -> str:
    lines = ["Objects:"]
    for name, typ in draft.objects:
        lines.append(f"{name} - {typ}" if typ else name)
    lines.append("Init:")
    for expr in draft.init:
        lines.append(to_text(expr))
    lines.append("Goal:")
    lines.append(to_text(draft.goal) if draft.goal is not None else "(and )")
    return "\n".join(lines)


def _pool_to_json(pool: dict[str, PredicateDecl]) -> list[dict]:
    return [
        {"name": d.name, "params": [list(p) for p in d.params], "description": d.description}
        for d in pool.values()
    ]


def _pool_from_json(data: list[dict]) -> dict[str, PredicateDecl]:
    pool = {}
    for item in data:
        pool[item["name"]] = PredicateDecl(
            item["name"], tuple((v, t) for v, t in item["params"]), item["description"]
        )
    return pool


def _build_problem(draft: TaskDraft, domain: DomainSpec) -> ProblemSpec:
    objects = []
    object_types: dict[str, str] = {}
    for name, typ in draft.objects:
        if typ is None or not domain.hierarchy.has_type(typ):
            raise PddlError(f"object '{name}' has no valid type")
        if name in object_types or domain.hierarchy.has_type(name):
            raise PddlError(f"object '{name}' is duplicated or shadows a type")
        object_types[name] = typ
        objects.append((name, typ))
    predicates = {p.name: p for p in domain.predicates}
    init = []
    for expr in draft.init:
        if head_of(expr) == "=":
            continue
        atom = build_init_atom(expr, predicates, object_types)
        decl = predicates[atom.predicate]
        for term, (_, typ) in zip(atom.terms, decl.params):
            if not domain.hierarchy.is_subtype(object_types[term], typ):
                raise PddlError(f"init atom argument '{term}' has incompatible type")
        init.append(atom)
    if draft.goal is None:
        raise PddlError("no goal condition")
    goal = build_goal(draft.goal, predicates, domain.hierarchy, object_types)
    return ProblemSpec(
        GENERATED_PROBLEM_NAME,
        domain.name,
        tuple(objects),
        tuple(init),
        goal,
        total_cost_init=0 if domain.uses_costs else None,
    )


def _domain_summary(domain: DomainSpec) -> str:
    lines = ["Types:"]
    for name in domain.hierarchy.parent:
        desc = domain.hierarchy.description.get(name, "")
        lines.append(f"{name} - {domain.hierarchy.parent[name]}" + (f": {desc}" if desc else ""))
    lines.append("Predicates:")
    for decl in domain.predicates:
        params = " ".join(f"{v} - {t}" for v, t in decl.params)
        inner = f"({decl.name} {params})" if params else f"({decl.name})"
        lines.append(f"{inner}: {decl.description}" if decl.description else inner)
    lines.append("Actions:")
    for action in domain.actions:
        lines.append(f"{action.name}: {action.description}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Pruning


def _formula_predicates(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.predicate}
    if isinstance(f, Equality):
        return set()
    if isinstance(f, Not):
        return _formula_predicates(f.body)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for p in f.parts:
            out |= _formula_predicates(p)
        return out
    if isinstance(f, Imply):
        return _formula_predicates(f.antecedent) | _formula_predicates(f.consequent)
    if isinstance(f, (Forall, Exists)):
        return _formula_predicates(f.body)
    raise TypeError(f"not a formula: {f!r}")


def _effect_predicates(e: EffectExpr) -> set[str]:
    if isinstance(e, EffectLiteral):
        return {e.atom.predicate}
    if isinstance(e, EffectAnd):
        out: set[str] = set()
        for p in e.parts:
            out |= _effect_predicates(p)
        return out
    if isinstance(e, EffectForall):
        return _effect_predicates(e.body)
    if isinstance(e, When):
        return _formula_predicates(e.condition) | _effect_predicates(e.effect)
    if isinstance(e, IncreaseCost):
        return set()
    raise TypeError(f"not an effect: {e!r}")


def _formula_types(f: Formula) -> set[str]:
    if isinstance(f, (Forall, Exists)):
        return {t for _, t in f.variables} | _formula_types(f.body)
    if isinstance(f, Not):
        return _formula_types(f.body)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for p in f.parts:
            out |= _formula_types(p)
        return out
    if isinstance(f, Imply):
        return _formula_types(f.antecedent) | _formula_types(f.consequent)
    return set()


def _effect_types(e: EffectExpr) -> set[str]:
    if isinstance(e, EffectForall):
        return {t for _, t in e.variables} | _effect_types(e.body)
    if isinstance(e, EffectAnd):
        out: set[str] = set()
        for p in e.parts:
            out |= _effect_types(p)
        return out
    if isinstance(e, When):
        return _formula_types(e.condition) | _effect_types(e.effect)
    return set()


def _prune(
    hierarchy: TypeHierarchy,
    pool: dict[str, PredicateDecl],
    actions: list[ActionSchema],
) -> tuple[TypeHierarchy, list[PredicateDecl]]:
    """Keep only predicates and types the final actions reference."""
    used_predicates: set[str] = set()
    for action in actions:
        used_predicates |= _formula_predicates(action.precondition)
        used_predicates |= _effect_predicates(action.effect)
    predicates = [d for d in pool.values() if d.name in used_predicates]

    used_types: set[str] = set()
    for action in actions:
        used_types |= {t for _, t in action.params}
        used_types |= _formula_types(action.precondition)
        used_types |= _effect_types(action.effect)
    for decl in predicates:
        used_types |= {t for _, t in decl.params}
    # Parents of kept types stay so the tree remains intact.
    closed: set[str] = set()
    for t in used_types:
        if hierarchy.has_type(t):
            closed.update(hierarchy.ancestors(t))
    parent = {t: p for t, p in hierarchy.parent.items() if t in closed}
    description = {t: d for t, d in hierarchy.description.items() if t in closed}
    return TypeHierarchy(parent, description), predicates


# ---------------------------------------------------------------------------
# Public run API


def prepare_run(
    runs_root,
    description: str,
    config: RunConfig,
    run_id: Optional[str] = None,
    domain_pddl: Optional[str] = None,
    problem_pddl: Optional[str] = None,
) -> RunStore:
    """Validate inputs and create the run directory, without executing."""
    if not description.strip():
        raise ValueError("the task description must not be empty")
    start = step_number(config.start_step)
    if start >= 5 and domain_pddl is None:
        raise ValueError("starting at task extraction requires a stored domain")
    if start == 6 and problem_pddl is None:
        raise ValueError("starting at planning requires a stored problem")
    if domain_pddl is not None:
        parse_domain(domain_pddl)  # reject broken input before creating the run
    store = RunStore.create(runs_root, description, config, run_id)
    if domain_pddl is not None:
        store.write_text("domain.pddl", domain_pddl)
    if problem_pddl is not None:
        store.write_text("problem.pddl", problem_pddl)
    return store


def start_run(
    runs_root,
    description: str,
    config: RunConfig,
    run_id: Optional[str] = None,
    domain_pddl: Optional[str] = None,
    problem_pddl: Optional[str] = None,
) -> RunManifest:
    """Create a run directory and execute the pipeline from its start step."""
    store = prepare_run(runs_root, description, config, run_id, domain_pddl, problem_pddl)
    return Engine(store).execute()


def continue_run(run_dir) -> RunManifest:
    """Pick a persisted run up from its last completed step boundary."""
    store = RunStore(run_dir)
    if not store.exists():
        raise FileNotFoundError(f"no run at {run_dir}")
    return Engine(store).execute()


def apply_feedback(run_dir, number: int, body: dict) -> RunManifest:
    """Feed an awaiting run: {"approve": true} or {"text": "..."}."""
    store = RunStore(run_dir)
    if not store.exists():
        raise FileNotFoundError(f"no run at {run_dir}")
    manifest = store.load_manifest()
    if manifest.status != "awaiting-human-feedback" or manifest.current_step != number:
        raise EditError(
            f"run is not awaiting feedback at step {number} "
            f"(status {manifest.status}, step {manifest.current_step})"
        )
    return Engine(store).continue_after_feedback(number, body)


def prepare_edit(run_dir, number: int, artifact) -> RunStore:
    """Validate an edited artifact and rewrite the run state, without executing.

    ``artifact`` is the step's block-grammar text (steps 1-3), PDDL text
    (steps 4-5), or a JSON dict for the hierarchy.
    """
    store = RunStore(run_dir)
    if not store.exists():
        raise FileNotFoundError(f"no run at {run_dir}")
    engine = Engine.__new__(Engine)
    engine.store = store
    engine.manifest = store.load_manifest()
    engine.config = engine.manifest.config
    engine.state = EngineState(engine.manifest.description)
    records = store.load_records()
    engine._materialize(records, 1)

    record = StepRecord(step_id(number), number)
    record.flags["edited"] = True
    try:
        if number == 1:
            types, warnings = parse_types_block(str(artifact))
            record.add_warning(*warnings)
            record.artifact = types.to_json()
            record.artifact_text = types.to_text()
        elif number == 2:
            tree = _parse_edited_tree(artifact, engine.state.type_list)
            record.artifact = tree.to_json()
            record.artifact_text = tree.to_text()
        elif number == 3:
            actions, warnings = parse_actions_block(str(artifact))
            record.add_warning(*warnings)
            record.artifact = {"actions": [a.to_json() for a in actions]}
            record.artifact_text = nl_actions_to_text(actions)
        elif number == 4:
            domain = parse_domain(str(artifact))
            text = print_domain(domain)
            record.artifact = {"domain_pddl": text}
            record.artifact_text = text
        elif number == 5:
            if engine.state.domain is None:
                raise EditError("no domain available to validate the problem against")
            problem = parse_problem(str(artifact), engine.state.domain)
            text = print_problem(problem)
            record.artifact = {"problem_pddl": text}
            record.artifact_text = text
        else:
            raise EditError("the planning step has no editable artifact")
    except (PddlError, OutputParseError, ValueError) as exc:
        raise EditError(str(exc)) from exc

    for n in range(number, len(STEP_IDS) + 1):
        store.supersede_record(n)
    store.remove("plan.txt")
    store.remove("NO_PLAN")
    if number <= 5:
        store.remove("problem.pddl")
    if number <= 4:
        store.remove("domain.pddl")
    if number == 4:
        store.write_text("domain.pddl", record.artifact["domain_pddl"])
    if number == 5:
        store.write_text("problem.pddl", record.artifact["problem_pddl"])

    record.complete = True
    store.save_record(record)
    manifest = store.load_manifest()
    manifest.status = "running"
    manifest.current_step = number
    store.save_manifest(manifest)
    return store


def resume_edit(run_dir, number: int, artifact) -> RunManifest:
    """Replace step ``number``'s artifact and re-run everything after it."""
    store = prepare_edit(run_dir, number, artifact)
    return Engine(store).execute()


def _parse_edited_tree(artifact, type_list: Optional[TypeList]) -> TypeTree:
    original = type_list or TypeList()
    if isinstance(artifact, dict):
        tree = TypeTree.from_json(artifact)
        tree.hierarchy.validate()
    else:
        names = []
        for line in str(artifact).splitlines():
            name = line.strip().partition(":")[0].strip().lower()
            if name:
                names.append(name)
        seen = dict(original.entries)
        augmented = list(original.entries) + [
            (n, "") for n in names if n not in seen
        ]
        tree = parse_hierarchy_block(str(artifact), TypeList(tuple(augmented)))
    missing = [n for n in original.names if n not in tree.hierarchy.parent]
    if missing:
        raise EditError(f"edited hierarchy lost type(s): {', '.join(missing)}")
    return tree


def prepare_rerun(run_dir, number: int, description: Optional[str] = None) -> RunStore:
    """Invalidate steps ``number``..6 so they re-execute, without executing.

    With a new ``description``, the rerun re-extracts against the kept
    domain (the domain-reuse workflow on an existing run).
    """
    store = RunStore(run_dir)
    if not store.exists():
        raise FileNotFoundError(f"no run at {run_dir}")
    manifest = store.load_manifest()
    if description is not None:
        if not description.strip():
            raise EditError("the new task description must not be empty")
        manifest.description = description
    for n in range(number, len(STEP_IDS) + 1):
        store.supersede_record(n)
    store.remove("plan.txt")
    store.remove("NO_PLAN")
    if number <= 5:
        store.remove("problem.pddl")
    if number <= 4:
        store.remove("domain.pddl")
    manifest.status = "running"
    manifest.current_step = number
    store.save_manifest(manifest)
    return store


def resume_rerun(run_dir, number: int, description: Optional[str] = None) -> RunManifest:
    """Invalidate steps ``number``..6 and re-execute them."""
    store = prepare_rerun(run_dir, number, description)
    return Engine(store).execute()


def baseline_cot(
    domain_description: str,
    task_description: str,
    provider: LlmProvider,
    temperature: float = 0.0,
):
    """Single zero-shot chain-of-thought planning call; output unvalidated."""
    if not domain_description.strip():
        raise ValueError("the domain description must not be empty")
    if not task_description.strip():
        raise ValueError("the task description must not be empty")
    template = load_template("baseline_cot")
    prompt = render_template(
        template,
        {
            "domain_description": domain_description.strip(),
            "task_description": task_description.strip(),
        },
    )
    request = ChatRequest(
        step="baseline_cot",
        template_id=template.id,
        messages=(("user", prompt),),
        temperature=temperature,
    )
    return provider.complete(request)
