"""Prompt templates loaded from editable text assets.

Template files live in ``prompts/``. Lines starting with ``#checklist:``
declare the ordered checklist of a feedback template; the remaining text
is the body. Placeholders use ``{{name}}``; rendering is strict in both
directions (every placeholder must be bound, every binding must be
used). ``{{checklist}}`` expands to the numbered checklist questions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

CHECKLIST_PREFIX = "#checklist:"
_PLACEHOLDER = re.compile(r"\{\{([a-z_]+)\}\}")


class TemplateError(Exception):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    kind: str  # "main" | "feedback" | "baseline"
    body: str
    checklist: tuple[str, ...] = ()

    @property
    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER.findall(self.body))


def load_template(template_id: str) -> PromptTemplate:
    """Load ``prompts/<template_id>.txt`` from the package assets."""
    try:
        text = (
            resources.files("nl2plan").joinpath(f"prompts/{template_id}.txt").read_text()
        )
    except FileNotFoundError:
        raise TemplateError(f"no template asset named '{template_id}'") from None
    if template_id.endswith("_feedback"):
        kind = "feedback"
    elif template_id.endswith("_main"):
        kind = "main"
    else:
        kind = "baseline"
    checklist = []
    body_lines = []
    for line in text.splitlines():
        if line.startswith(CHECKLIST_PREFIX):
            checklist.append(line[len(CHECKLIST_PREFIX):].strip())
        else:
            body_lines.append(line)
    body = "\n".join(body_lines).strip() + "\n"
    if kind == "feedback" and not checklist:
        raise TemplateError(f"feedback template '{template_id}' declares no checklist")
    return PromptTemplate(template_id, kind, body, tuple(checklist))


def render_template(template: PromptTemplate, bindings: dict[str, str]) -> str:
    bound = dict(bindings)
    if template.checklist:
        bound.setdefault(
            "checklist",
            "\n".join(f"{n}. {q}" for n, q in enumerate(template.checklist, start=1)),
        )
    needed = template.placeholders
    missing = needed - bound.keys()
    if missing:
        raise TemplateError(
            f"missing binding(s) for template '{template.id}': {', '.join(sorted(missing))}"
        )
    unknown = bound.keys() - needed
    if unknown:
        raise TemplateError(
            f"unknown placeholder(s) for template '{template.id}': {', '.join(sorted(unknown))}"
        )
    # Single-pass substitution: values containing '{{...}}' are not re-expanded.
    return _PLACEHOLDER.sub(lambda m: bound[m.group(1)], template.body)
