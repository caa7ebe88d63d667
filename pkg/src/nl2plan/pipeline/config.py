"""Run configuration and step identifiers."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..llm.provider import ProviderConfig

STEP_IDS = (
    "type_extraction",
    "hierarchy_construction",
    "action_extraction",
    "action_construction",
    "task_extraction",
    "planning",
)
LLM_STEPS = STEP_IDS[:5]

FEEDBACK_SOURCES = ("none", "llm", "human")

DEFAULT_BUDGET = 8


def step_number(step_id: str) -> int:
    return STEP_IDS.index(step_id) + 1


def step_id(number: int) -> str:
    return STEP_IDS[number - 1]


@dataclass(frozen=True)
class RunConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    feedback: dict[str, str] = field(default_factory=dict)  # step id -> source
    max_validator_messages: int = DEFAULT_BUDGET
    max_task_validations: int = DEFAULT_BUDGET
    start_step: str = "type_extraction"
    search: str = "gbfs"
    heuristic: str = "ff"
    max_expansions: int = 1_000_000
    planner_timeout_s: float = 60.0

    def __post_init__(self):
        if self.start_step not in STEP_IDS:
            raise ValueError(f"unknown start step '{self.start_step}'")
        for step, source in self.feedback.items():
            if step not in LLM_STEPS:
                raise ValueError(f"'{step}' is not an LLM step")
            if source not in FEEDBACK_SOURCES:
                raise ValueError(f"unknown feedback source '{source}'")
        if self.max_validator_messages <= 0 or self.max_task_validations <= 0:
            raise ValueError("budgets must be positive")

    @staticmethod
    def make(provider: ProviderConfig, feedback: str = "none", **kwargs) -> "RunConfig":
        """Uniform feedback source across all LLM steps."""
        if feedback not in FEEDBACK_SOURCES:
            raise ValueError(f"unknown feedback source '{feedback}'")
        sources = {step: feedback for step in LLM_STEPS}
        return RunConfig(provider=provider, feedback=sources, **kwargs)

    def feedback_for(self, step: str) -> str:
        return self.feedback.get(step, "none")

    def to_json(self) -> dict:
        return {
            "provider": self.provider.to_json(),
            "feedback": dict(self.feedback),
            "max_validator_messages": self.max_validator_messages,
            "max_task_validations": self.max_task_validations,
            "start_step": self.start_step,
            "search": self.search,
            "heuristic": self.heuristic,
            "max_expansions": self.max_expansions,
            "planner_timeout_s": self.planner_timeout_s,
        }

    @staticmethod
    def from_json(data: dict) -> "RunConfig":
        data = dict(data)
        data["provider"] = ProviderConfig.from_json(data["provider"])
        return RunConfig(**data)
