"""Six-step pipeline: extraction, construction, task, planning."""

from .artifacts import NlAction, TypeList, TypeTree, nl_actions_to_text
from .config import LLM_STEPS, RunConfig, STEP_IDS, step_id, step_number
from .engine import (
    EditError,
    Engine,
    StepFailure,
    apply_feedback,
    baseline_cot,
    continue_run,
    prepare_edit,
    prepare_run,
    resume_edit,
    resume_rerun,
    start_run,
)
from .outputs import OutputParseError, parse_step_output
from .records import StepRecord, assert_budgets
from .store import RunManifest, RunStore, new_run_id

__all__ = [
    "EditError",
    "Engine",
    "LLM_STEPS",
    "NlAction",
    "OutputParseError",
    "RunConfig",
    "RunManifest",
    "RunStore",
    "STEP_IDS",
    "StepFailure",
    "StepRecord",
    "TypeList",
    "TypeTree",
    "apply_feedback",
    "assert_budgets",
    "baseline_cot",
    "continue_run",
    "new_run_id",
    "nl_actions_to_text",
    "parse_step_output",
    "prepare_edit",
    "prepare_run",
    "resume_edit",
    "resume_rerun",
    "start_run",
    "step_id",
    "step_number",
]
