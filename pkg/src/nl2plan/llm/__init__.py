"""LLM gateway: providers, templates, usage accounting."""

from .provider import (
    ChatExchange,
    ChatRequest,
    LiveProvider,
    LlmProvider,
    ProviderConfig,
    ProviderError,
    RecordingProvider,
    ReplayMissError,
    ReplayProvider,
    UsageReport,
    load_transcript_dir,
    make_provider,
    read_transcript,
    usage_totals,
)
from .templates import PromptTemplate, TemplateError, load_template, render_template

__all__ = [
    "ChatExchange",
    "ChatRequest",
    "LiveProvider",
    "LlmProvider",
    "PromptTemplate",
    "ProviderConfig",
    "ProviderError",
    "RecordingProvider",
    "ReplayMissError",
    "ReplayProvider",
    "TemplateError",
    "UsageReport",
    "load_template",
    "load_transcript_dir",
    "make_provider",
    "read_transcript",
    "render_template",
    "usage_totals",
]
