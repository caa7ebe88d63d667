"""Persisted per-step records.

A StepRecord keeps everything needed to audit or replay a step: every
exchange (prompt, raw response, usage), the parsed artifact, the one
optional feedback round, validator rounds, warnings, and flags. Records
awaiting human feedback additionally carry a ``pending`` payload with
enough state to continue after the feedback arrives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from ..llm.provider import ChatExchange


@dataclass
class StepRecord:
    step: str
    number: int
    exchanges: list[ChatExchange] = field(default_factory=list)
    artifact: Optional[dict] = None
    artifact_text: str = ""  # block-grammar rendering, what humans edit
    feedback: Optional[dict] = None  # {source, status, text?, revised?}
    validator_rounds: list[dict] = field(default_factory=list)
    construction: Optional[dict] = None  # action-construction pass structure
    warnings: list[str] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    pending: Optional[dict] = None
    superseded: bool = False
    complete: bool = False

    @property
    def prompts(self) -> list[str]:
        return [ex.prompt for ex in self.exchanges]

    @property
    def responses(self) -> list[str]:
        return [ex.response for ex in self.exchanges]

    def add_warning(self, *warnings: str) -> None:
        self.warnings.extend(warnings)

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "number": self.number,
            "exchanges": [ex.to_json() for ex in self.exchanges],
            "artifact": self.artifact,
            "artifact_text": self.artifact_text,
            "feedback": self.feedback,
            "validator_rounds": self.validator_rounds,
            "construction": self.construction,
            "warnings": self.warnings,
            "flags": self.flags,
            "pending": self.pending,
            "superseded": self.superseded,
            "complete": self.complete,
        }

    @staticmethod
    def from_json(data: dict) -> "StepRecord":
        record = StepRecord(data["step"], data["number"])
        record.exchanges = [ChatExchange.from_json(e) for e in data["exchanges"]]
        record.artifact = data.get("artifact")
        record.artifact_text = data.get("artifact_text", "")
        record.feedback = data.get("feedback")
        record.validator_rounds = data.get("validator_rounds", [])
        record.construction = data.get("construction")
        record.warnings = data.get("warnings", [])
        record.flags = data.get("flags", {})
        record.pending = data.get("pending")
        record.superseded = data.get("superseded", False)
        record.complete = data.get("complete", False)
        return record


def assert_budgets(record: StepRecord, max_validator: int, max_task: int) -> None:
    """Raise AssertionError if the record violates a budget invariant."""
    if record.feedback is not None:
        rounds = record.feedback.get("rounds", 1 if record.feedback.get("text") else 0)
        assert rounds <= 1, f"step {record.step}: more than one feedback round"
    if record.construction is not None:
        passes = record.construction.get("passes", [])
        assert len(passes) == 2, (
            f"step {record.step}: expected exactly 2 construction passes, got {len(passes)}"
        )
        for p in passes:
            for entry in p.get("actions", []):
                messages = entry.get("validator_messages", 0)
                assert messages <= max_validator, (
                    f"action '{entry.get('name')}': {messages} validator messages "
                    f"exceed the budget of {max_validator}"
                )
                fb = entry.get("feedback")
                if fb is not None:
                    assert fb.get("rounds", 0) <= 1, (
                        f"action '{entry.get('name')}': more than one feedback round"
                    )
    if record.step == "task_extraction":
        validations = record.flags.get("validations", len(record.validator_rounds))
        assert validations <= max_task, (
            f"task extraction ran {validations} validations, budget {max_task}"
        )
