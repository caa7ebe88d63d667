"""Parsing of LLM step responses.

Every step instructs the model to end with exactly one fenced code block
tagged for the step (```types, ```hierarchy, ```actions, ```action,
```task). The reasoning before the block is ignored here but persisted
with the step record. Inner grammars are line-oriented ``name: text``
for natural-language artifacts and s-expressions for formal ones.
"""

from __future__ import annotations

import re

from ..drafts import ActionDraft, PredicateDraft, TaskDraft
from ..pddl.model import PddlError, ROOT_TYPE, TypeHierarchy, is_identifier
from ..pddl.sexpr import SList, SToken, read_source
from .artifacts import NlAction, TypeList, TypeTree

BLOCK_TAGS = {
    "type_extraction": "types",
    "hierarchy_construction": "hierarchy",
    "action_extraction": "actions",
    "action_construction": "action",
    "task_extraction": "task",
}

_FENCE = re.compile(r"^```([a-z_]*)[ \t]*\n(.*?)^```[ \t]*$", re.MULTILINE | re.DOTALL)


class OutputParseError(Exception):
    """The response does not follow the required output format."""


def extract_block(response: str, tag: str) -> str:
    matches = [m.group(2) for m in _FENCE.finditer(response) if m.group(1) == tag]
    if not matches:
        raise OutputParseError(
            f"the response must end with one fenced code block tagged '{tag}'"
        )
    if len(matches) > 1:
        raise OutputParseError(
            f"the response contains {len(matches)} '{tag}' blocks; exactly one is required"
        )
    return matches[0]


def parse_step_output(step: str, response: str):
    """Dispatch to the step's grammar; returns (artifact, warnings)."""
    tag = BLOCK_TAGS[step]
    block = extract_block(response, tag)
    if step == "type_extraction":
        return parse_types_block(block)
    if step == "hierarchy_construction":
        raise OutputParseError("hierarchy parsing needs the requested types")
    if step == "action_extraction":
        return parse_actions_block(block)
    if step == "action_construction":
        return parse_action_block(block), []
    return parse_task_block(block), []


def parse_types_block(block: str) -> tuple[TypeList, list[str]]:
    entries: list[tuple[str, str]] = []
    warnings: list[str] = []
    seen: set[str] = set()
    for line in block.splitlines():
        line = line.strip()
        if not line:
            continue
        name, _, desc = line.partition(":")
        name = name.strip().lower()
        desc = desc.strip()
        if not is_identifier(name):
            raise OutputParseError(f"'{name}' is not a valid type name")
        if name == ROOT_TYPE:
            warnings.append("dropped the built-in type 'object' from the list")
            continue
        if name in seen:
            warnings.append(f"dropped duplicate type '{name}'")
            continue
        seen.add(name)
        entries.append((name, desc))
    if not entries:
        raise OutputParseError("the types block is empty")
    return TypeList(tuple(entries)), warnings


def parse_hierarchy_block(block: str, requested: TypeList) -> TypeTree:
    parent: dict[str, str] = {}
    description: dict[str, str] = {}
    stack: list[tuple[int, str]] = []  # (depth, name)
    for raw in block.splitlines():
        if not raw.strip():
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % 2 != 0:
            raise OutputParseError("hierarchy indentation must use two spaces per level")
        depth = indent // 2
        line = raw.strip()
        name, _, desc = line.partition(":")
        name = name.strip().lower()
        if not is_identifier(name):
            raise OutputParseError(f"'{name}' is not a valid type name")
        if name == ROOT_TYPE:
            raise OutputParseError("'object' is built in; do not list it")
        if name in parent:
            raise OutputParseError(f"type '{name}' appears twice in the hierarchy")
        while stack and stack[-1][0] >= depth:
            stack.pop()
        if depth > 0 and not stack:
            raise OutputParseError(f"'{name}' is indented under no parent")
        parent[name] = stack[-1][1] if stack else ROOT_TYPE
        description[name] = desc.strip() or dict(requested.entries).get(name, "")
        stack.append((depth, name))
    if not parent:
        raise OutputParseError("the hierarchy block is empty")

    provenance = {
        name: ("requested" if name in requested.names else "synthesized-parent")
        for name in parent
    }
    tree = TypeTree(TypeHierarchy(parent, description), provenance)
    try:
        tree.validate_against(requested)
    except (ValueError, PddlError) as exc:
        raise OutputParseError(str(exc)) from None
    return tree


def parse_actions_block(block: str) -> tuple[list[NlAction], list[str]]:
    actions: list[NlAction] = []
    warnings: list[str] = []
    seen: set[str] = set()
    for group in re.split(r"\n\s*\n", block.strip()):
        if not group.strip():
            continue
        fields = {}
        for line in group.splitlines():
            key, _, value = line.partition(":")
            key = key.strip().lower()
            if key in ("name", "description", "usage"):
                fields[key] = value.strip()
        missing = {"name", "description", "usage"} - fields.keys()
        if missing:
            raise OutputParseError(
                f"an action group is missing: {', '.join(sorted(missing))}"
            )
        name = fields["name"].lower()
        if not is_identifier(name):
            raise OutputParseError(f"'{name}' is not a valid action name")
        if not fields["description"] or not fields["usage"]:
            raise OutputParseError(f"action '{name}' has an empty description or usage")
        if name in seen:
            warnings.append(f"dropped duplicate action '{name}'")
            continue
        seen.add(name)
        actions.append(NlAction(name, fields["description"], fields["usage"]))
    if not actions:
        raise OutputParseError("the actions block lists no actions")
    return actions, warnings


_SECTION = re.compile(r"^([a-z ]+):\s*$", re.IGNORECASE)


def _split_sections(block: str, expected: dict[str, str]) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in block.splitlines():
        m = _SECTION.match(line.strip())
        key = m.group(1).strip().lower() if m else None
        if key in expected:
            name = expected[key]
            if name in sections:
                raise OutputParseError(f"duplicate '{line.strip()}' section")
            sections[name] = current = []
        elif current is not None:
            current.append(line)
        elif line.strip():
            raise OutputParseError(f"unexpected text before the first section: '{line.strip()}'")
    return sections


def parse_action_block(block: str) -> ActionDraft:
    sections = _split_sections(
        block,
        {
            "parameters": "parameters",
            "precondition": "precondition",
            "effect": "effect",
            "new predicates": "new_predicates",
        },
    )
    if "parameters" not in sections:
        raise OutputParseError("the action block is missing the Parameters section")

    params: list[tuple[str, str | None]] = []
    for line in sections["parameters"]:
        line = line.strip()
        if not line:
            continue
        var, _, typ = line.partition("-")
        var = var.strip()
        typ = typ.strip() or None
        if not var.startswith("?"):
            raise OutputParseError(f"parameter '{line}' must start with '?'")
        params.append((var.lower(), typ.lower() if typ else None))

    precondition = _single_sexpr(sections.get("precondition", []), "Precondition")
    effect = _single_sexpr(sections.get("effect", []), "Effect")

    new_predicates: list[PredicateDraft] = []
    for line in sections.get("new_predicates", []):
        line = line.strip()
        if not line:
            continue
        head, sep, desc = line.partition("):")
        decl_text = head + ")" if sep else line
        new_predicates.append(_parse_predicate_draft(decl_text, desc.strip()))

    return ActionDraft(
        name="",
        params=params,
        precondition=precondition,
        effect=effect,
        new_predicates=new_predicates,
    )


def _single_sexpr(lines: list[str], what: str):
    text = "\n".join(lines).strip()
    if not text:
        return None
    try:
        unit = read_source(text)
    except PddlError as exc:
        raise OutputParseError(f"{what} is not a well-formed expression: {exc}") from None
    if len(unit.exprs) != 1:
        raise OutputParseError(f"{what} must contain exactly one expression")
    return unit.exprs[0]


def _parse_predicate_draft(decl_text: str, desc: str) -> PredicateDraft:
    try:
        unit = read_source(decl_text)
    except PddlError as exc:
        raise OutputParseError(f"malformed predicate declaration: {exc}") from None
    if len(unit.exprs) != 1:
        raise OutputParseError(f"malformed predicate declaration: '{decl_text.strip()}'")
    expr = unit.exprs[0]
    if not isinstance(expr, SList) or not expr.items or not isinstance(expr.items[0], SToken):
        raise OutputParseError(f"malformed predicate declaration: '{decl_text.strip()}'")
    name = expr.items[0].text
    params: list[tuple[str, str | None]] = []
    pending: list[str] = []
    items = list(expr.items[1:])
    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, SToken) and item.text == "-":
            if not pending or i + 1 >= len(items) or not isinstance(items[i + 1], SToken):
                raise OutputParseError(f"malformed typed list in predicate '{name}'")
            typ = items[i + 1].text
            params.extend((v, typ) for v in pending)
            pending = []
            i += 2
        elif isinstance(item, SToken) and item.text.startswith("?"):
            pending.append(item.text)
            i += 1
        else:
            raise OutputParseError(f"malformed parameter in predicate '{name}'")
    params.extend((v, None) for v in pending)
    return PredicateDraft(name, params, desc)


def parse_task_block(block: str) -> TaskDraft:
    sections = _split_sections(
        block, {"objects": "objects", "init": "init", "goal": "goal"}
    )
    for required in ("objects", "init", "goal"):
        if required not in sections:
            raise OutputParseError(f"the task block is missing the {required.title()} section")

    objects: list[tuple[str, str | None]] = []
    for line in sections["objects"]:
        line = line.strip()
        if not line:
            continue
        name, _, typ = line.partition("-")
        objects.append((name.strip().lower(), typ.strip().lower() or None))

    init_text = "\n".join(sections["init"]).strip()
    try:
        init_exprs = read_source(init_text).exprs if init_text else []
    except PddlError as exc:
        raise OutputParseError(f"Init is not well formed: {exc}") from None

    goal = _single_sexpr(sections["goal"], "Goal")
    return TaskDraft(objects=objects, init=list(init_exprs), goal=goal)
