"""Run directory persistence.

Layout:

    <run_dir>/
      manifest.json            run id, config snapshot, status, file index
      step_1.json .. step_6.json
      superseded/step_<n>.<k>.json   prior records kept after edits
      domain.pddl, problem.pddl
      plan.txt | NO_PLAN
      transcripts/step_<n>.jsonl     exchange echo per completed step
      usage.json

All writes go through an atomic temp-file + rename so a crash at any
step boundary leaves a loadable directory.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..llm.provider import usage_totals
from .config import RunConfig, STEP_IDS
from .records import StepRecord


def new_run_id() -> str:
    return uuid.uuid4().hex[:12]


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


@dataclass
class RunManifest:
    run_id: str
    created: str
    description: str
    config: RunConfig
    status: str = "running"  # running | awaiting-human-feedback | done | failed
    current_step: int = 1
    error: Optional[str] = None
    degraded: bool = False
    files: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "created": self.created,
            "description": self.description,
            "config": self.config.to_json(),
            "status": self.status,
            "current_step": self.current_step,
            "error": self.error,
            "degraded": self.degraded,
            "files": dict(self.files),
        }

    @staticmethod
    def from_json(data: dict) -> "RunManifest":
        return RunManifest(
            run_id=data["run_id"],
            created=data["created"],
            description=data["description"],
            config=RunConfig.from_json(data["config"]),
            status=data["status"],
            current_step=data["current_step"],
            error=data.get("error"),
            degraded=data.get("degraded", False),
            files=data.get("files", {}),
        )


class RunStore:
    """One run's on-disk state."""

    def __init__(self, run_dir: str | Path):
        self.dir = Path(run_dir)

    # -- creation / loading

    @staticmethod
    def create(
        runs_root: str | Path,
        description: str,
        config: RunConfig,
        run_id: Optional[str] = None,
    ) -> "RunStore":
        run_id = run_id or new_run_id()
        store = RunStore(Path(runs_root) / run_id)
        store.dir.mkdir(parents=True, exist_ok=False)
        (store.dir / "transcripts").mkdir()
        (store.dir / "superseded").mkdir()
        manifest = RunManifest(run_id, _now(), description, config)
        store.save_manifest(manifest)
        return store

    def exists(self) -> bool:
        return (self.dir / "manifest.json").is_file()

    def load_manifest(self) -> RunManifest:
        data = json.loads((self.dir / "manifest.json").read_text())
        return RunManifest.from_json(data)

    def save_manifest(self, manifest: RunManifest) -> None:
        manifest.files = self._file_index()
        _atomic_write(self.dir / "manifest.json", json.dumps(manifest.to_json(), indent=2))

    def _file_index(self) -> dict[str, str]:
        index = {}
        for name in (
            "domain.pddl", "problem.pddl", "plan.txt", "NO_PLAN", "usage.json",
        ):
            if (self.dir / name).is_file():
                index[name] = name
        for number in range(1, len(STEP_IDS) + 1):
            name = f"step_{number}.json"
            if (self.dir / name).is_file():
                index[name] = name
        return index

    # -- step records

    def save_record(self, record: StepRecord) -> None:
        path = self.dir / f"step_{record.number}.json"
        _atomic_write(path, json.dumps(record.to_json(), indent=2))
        if record.complete:
            self._write_step_transcript(record)

    def load_record(self, number: int) -> Optional[StepRecord]:
        path = self.dir / f"step_{number}.json"
        if not path.is_file():
            return None
        return StepRecord.from_json(json.loads(path.read_text()))

    def load_records(self) -> dict[int, StepRecord]:
        records = {}
        for number in range(1, len(STEP_IDS) + 1):
            record = self.load_record(number)
            if record is not None:
                records[number] = record
        return records

    def supersede_record(self, number: int) -> None:
        path = self.dir / f"step_{number}.json"
        if not path.is_file():
            return
        record = StepRecord.from_json(json.loads(path.read_text()))
        record.superseded = True
        k = 0
        while (self.dir / "superseded" / f"step_{number}.{k}.json").exists():
            k += 1
        _atomic_write(
            self.dir / "superseded" / f"step_{number}.{k}.json",
            json.dumps(record.to_json(), indent=2),
        )
        path.unlink()
        transcript = self.dir / "transcripts" / f"step_{number}.jsonl"
        if transcript.is_file():
            transcript.unlink()

    def _write_step_transcript(self, record: StepRecord) -> None:
        path = self.dir / "transcripts" / f"step_{record.number}.jsonl"
        lines = [json.dumps(ex.to_json()) for ex in record.exchanges]
        _atomic_write(path, "\n".join(lines) + ("\n" if lines else ""))

    # -- artifacts

    def write_text(self, name: str, text: str) -> None:
        _atomic_write(self.dir / name, text)

    def read_text(self, name: str) -> Optional[str]:
        path = self.dir / name
        return path.read_text() if path.is_file() else None

    def remove(self, name: str) -> None:
        path = self.dir / name
        if path.is_file():
            path.unlink()

    def write_usage(self) -> dict:
        exchanges = []
        for record in self.load_records().values():
            if record.complete and not record.superseded:
                exchanges.extend(record.exchanges)
        report = usage_totals(exchanges).to_json()
        _atomic_write(self.dir / "usage.json", json.dumps(report, indent=2))
        return report
