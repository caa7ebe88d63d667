#!/usr/bin/env python3
"""Regenerate the replay transcript fixtures under tests/fixtures/.

Runs the real pipeline against the scripted responses in
tests/scripted_blocksworld.py, recording every exchange. Rerun whenever
prompt templates or prompt assembly change, then commit the refreshed
fixtures.
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from nl2plan.llm.provider import (  # noqa: E402
    ProviderConfig,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
)
from nl2plan.pipeline import Engine, RunConfig, RunStore, baseline_cot  # noqa: E402
from scripted_blocksworld import (  # noqa: E402
    EASY_DESCRIPTION,
    MEDIUM_DESCRIPTION,
    STACK_FEEDBACK_TEXT,
    baseline_responses,
    easy_responses,
    human_responses,
    medium_responses,
)

FIXTURES = REPO / "tests" / "fixtures"


def record_run(name: str, description: str, responses: dict, start_step: str = "type_extraction",
               domain_pddl: str | None = None) -> RunStore:
    transcript_dir = FIXTURES / "transcripts" / name
    if transcript_dir.exists():
        shutil.rmtree(transcript_dir)
    transcript_dir.mkdir(parents=True)

    provider_config = ProviderConfig(kind="replay", transcript_dir=str(transcript_dir))
    config = RunConfig.make(provider_config, feedback="llm", start_step=start_step)
    scripted = ScriptedProvider(responses)
    recorder = RecordingProvider(scripted, transcript_dir / "session.jsonl")

    workdir = Path(tempfile.mkdtemp(prefix=f"nl2plan-fixture-{name}-"))
    store = RunStore.create(workdir, description, config)
    if domain_pddl is not None:
        store.write_text("domain.pddl", domain_pddl)
    manifest = Engine(store, provider=recorder).execute()
    if manifest.status != "done":
        raise SystemExit(f"{name}: recording run ended {manifest.status}: {manifest.error}")

    # Sanity: the recorded transcript must replay to the same outcome.
    replay_store = RunStore.create(workdir, description, config)
    if domain_pddl is not None:
        replay_store.write_text("domain.pddl", domain_pddl)
    replay = Engine(replay_store, provider=ReplayProvider(transcript_dir)).execute()
    if replay.status != "done":
        raise SystemExit(f"{name}: replay verification ended {replay.status}: {replay.error}")
    print(f"{name}: recorded {transcript_dir / 'session.jsonl'}")
    return store


def record_human_run() -> None:
    """Record the human-reviewed run: approvals plus one text feedback."""
    transcript_dir = FIXTURES / "transcripts" / "blocksworld_human"
    if transcript_dir.exists():
        shutil.rmtree(transcript_dir)
    transcript_dir.mkdir(parents=True)

    provider_config = ProviderConfig(kind="replay", transcript_dir=str(transcript_dir))
    config = RunConfig.make(provider_config, feedback="human")
    recorder = RecordingProvider(
        ScriptedProvider(human_responses()), transcript_dir / "session.jsonl"
    )
    workdir = Path(tempfile.mkdtemp(prefix="nl2plan-fixture-human-"))
    store = RunStore.create(workdir, EASY_DESCRIPTION, config)
    manifest = Engine(store, provider=recorder).execute()
    while manifest.status == "awaiting-human-feedback":
        record = store.load_record(manifest.current_step)
        pending = record.pending or {}
        if pending.get("action_name") == "stack":
            body = {"text": STACK_FEEDBACK_TEXT}
        else:
            body = {"approve": True}
        manifest = Engine(store, provider=recorder).continue_after_feedback(
            manifest.current_step, body
        )
    if manifest.status != "done":
        raise SystemExit(f"human run ended {manifest.status}: {manifest.error}")
    print(f"blocksworld_human: recorded {transcript_dir / 'session.jsonl'}")


def main() -> None:
    easy_store = record_run("blocksworld_easy", EASY_DESCRIPTION, easy_responses())
    print("easy plan:\n" + easy_store.read_text("plan.txt"))

    domain = easy_store.read_text("domain.pddl")
    (FIXTURES / "stored_domain.pddl").write_text(domain)
    print(f"stored domain: {FIXTURES / 'stored_domain.pddl'}")

    medium_store = record_run(
        "blocksworld_medium", MEDIUM_DESCRIPTION, medium_responses(),
        start_step="task_extraction", domain_pddl=domain,
    )
    print("medium plan:\n" + medium_store.read_text("plan.txt"))

    record_human_run()

    transcript_dir = FIXTURES / "transcripts" / "baseline"
    if transcript_dir.exists():
        shutil.rmtree(transcript_dir)
    transcript_dir.mkdir(parents=True)
    recorder = RecordingProvider(
        ScriptedProvider(baseline_responses()), transcript_dir / "session.jsonl"
    )
    exchange = baseline_cot(
        "A robot arm stacks blocks on a table; it can hold one block at a time.",
        "b2 is on b1; restack so b1 is on b2.",
        recorder,
    )
    print(f"baseline: recorded ({len(exchange.response.split())} words)")


if __name__ == "__main__":
    main()
