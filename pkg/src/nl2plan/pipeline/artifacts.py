"""Intermediate artifacts produced by the LLM-driven steps.

Each artifact renders back to the line-oriented block text the model was
asked to produce, which is also the format humans edit through the
review endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..pddl.model import ROOT_TYPE, TypeHierarchy


@dataclass(frozen=True)
class TypeList:
    entries: tuple[tuple[str, str], ...] = ()  # (name, description)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    def to_text(self) -> str:
        return "\n".join(f"{name}: {desc}" for name, desc in self.entries)

    def to_json(self) -> dict:
        return {"entries": [list(e) for e in self.entries]}

    @staticmethod
    def from_json(data: dict) -> "TypeList":
        return TypeList(tuple((n, d) for n, d in data["entries"]))


@dataclass(frozen=True)
class TypeTree:
    hierarchy: TypeHierarchy
    provenance: dict[str, str] = field(default_factory=dict)  # requested | synthesized-parent

    def validate_against(self, requested: TypeList) -> None:
        self.hierarchy.validate()
        missing = [n for n in requested.names if n not in self.hierarchy.parent]
        if missing:
            raise ValueError(f"hierarchy lost requested type(s): {', '.join(missing)}")
        for name, origin in self.provenance.items():
            if origin == "synthesized-parent" and not self.hierarchy.children(name):
                raise ValueError(f"synthesized parent '{name}' has no children")

    def to_text(self) -> str:
        lines: list[str] = []

        def emit(parent: str, depth: int) -> None:
            for child in self.hierarchy.children(parent):
                desc = self.hierarchy.description.get(child, "")
                lines.append("  " * depth + (f"{child}: {desc}" if desc else f"{child}:"))
                emit(child, depth + 1)

        emit(ROOT_TYPE, 0)
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "parent": dict(self.hierarchy.parent),
            "description": dict(self.hierarchy.description),
            "provenance": dict(self.provenance),
        }

    @staticmethod
    def from_json(data: dict) -> "TypeTree":
        return TypeTree(
            TypeHierarchy(dict(data["parent"]), dict(data["description"])),
            dict(data["provenance"]),
        )


@dataclass(frozen=True)
class NlAction:
    name: str
    description: str
    usage: str

    def to_text(self) -> str:
        return (
            f"name: {self.name}\n"
            f"description: {self.description}\n"
            f"usage: {self.usage}"
        )

    def to_json(self) -> dict:
        return {"name": self.name, "description": self.description, "usage": self.usage}

    @staticmethod
    def from_json(data: dict) -> "NlAction":
        return NlAction(data["name"], data["description"], data["usage"])


def nl_actions_to_text(actions: list[NlAction]) -> str:
    return "\n\n".join(a.to_text() for a in actions)
