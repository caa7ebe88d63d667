"""Natural-language task descriptions to validated plans via generated PDDL."""

__version__ = "0.1.0"
