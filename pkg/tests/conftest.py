import re
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
REPO = TESTS.parent
CORPUS = REPO / "src" / "nl2plan" / "corpus"
FIXTURES = TESTS / "fixtures"

sys.path.insert(0, str(TESTS))

from nl2plan.pddl import parse_domain, parse_problem  # noqa: E402


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.pddl"))


def load_domain(name: str):
    return parse_domain(corpus_text(f"{name}.pddl"))


def load_problem(name: str, domain):
    return parse_problem(corpus_text(f"{name}.pddl"), domain)


@pytest.fixture(scope="session")
def blocksworld():
    return load_domain("blocksworld")


@pytest.fixture(scope="session")
def logistics():
    return load_domain("logistics")


@pytest.fixture(scope="session")
def warehouse():
    return load_domain("warehouse")


@pytest.fixture(scope="session")
def isr():
    return load_domain("isr")


def domain_problem_pairs():
    """(domain_file, problem_file) pairs derived from the :domain header."""
    domains = {}
    problems = []
    for path in corpus_files():
        text = path.read_text()
        if re.search(r"\(define \(domain ", text):
            domains[parse_domain(text).name] = path
        else:
            problems.append(path)
    pairs = []
    for path in problems:
        match = re.search(r"\(:domain ([\w-]+)\)", path.read_text())
        pairs.append((domains[match.group(1)], path))
    return pairs


from scripted_blocksworld import EASY_DESCRIPTION, MEDIUM_DESCRIPTION  # noqa: E402


def replay_config(fixture: str, feedback: str = "llm", **kwargs):
    from nl2plan.llm.provider import ProviderConfig
    from nl2plan.pipeline import RunConfig

    provider = ProviderConfig(
        kind="replay", transcript_dir=str(FIXTURES / "transcripts" / fixture)
    )
    return RunConfig.make(provider, feedback, **kwargs)
