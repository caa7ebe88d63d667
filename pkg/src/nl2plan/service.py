"""HTTP front door: run management, step inspection, feedback, resumption.

Every GET reads the persisted JSON straight from disk, so responses
always match what a restart would reconstruct. Mutations serialize on a
per-run lock and drive the pipeline on a background thread; clients
observe progress by polling.

Error codes (ApiError.code): empty-description, invalid-config,
missing-domain, missing-problem, unknown-run, unknown-step,
step-not-reached, not-awaiting-feedback, invalid-feedback,
invalid-artifact, provider-unavailable.
"""

from __future__ import annotations

import json
import threading
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .llm.provider import ProviderConfig, ProviderError
from .pipeline import (
    EditError,
    Engine,
    RunConfig,
    RunStore,
    STEP_IDS,
    prepare_edit,
    prepare_run,
    step_id,
)
from .pipeline.engine import prepare_rerun


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class CreateRunBody(BaseModel):
    description: str = ""
    feedback: Any = "none"  # uniform source or per-step map
    start_step: str = "type_extraction"
    domain_pddl: Optional[str] = None
    problem_pddl: Optional[str] = None
    provider: Optional[dict] = None
    search: str = "gbfs"
    heuristic: str = "ff"


class FeedbackBody(BaseModel):
    approve: bool = False
    text: str = ""


class ResumeBody(BaseModel):
    step: int = Field(ge=1, le=6)
    artifact: Optional[Any] = None
    description: Optional[str] = None


class ServiceState:
    def __init__(self, runs_root: Path, provider: ProviderConfig):
        self.runs_root = runs_root
        self.provider = provider
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock_for(self, run_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(run_id, threading.Lock())

    def store(self, run_id: str) -> RunStore:
        store = RunStore(self.runs_root / run_id)
        if not store.exists():
            raise ApiError(404, "unknown-run", f"no run named '{run_id}'")
        return store

    def spawn(self, run_id: str, work) -> None:
        lock = self.lock_for(run_id)

        def driver():
            with lock:
                work()

        threading.Thread(target=driver, daemon=True).start()

    def resume_interrupted(self) -> None:
        """Restart pipelines that were mid-flight when the process died."""
        if not self.runs_root.is_dir():
            return
        for manifest_path in sorted(self.runs_root.glob("*/manifest.json")):
            data = json.loads(manifest_path.read_text())
            if data.get("status") == "running":
                run_id = data["run_id"]
                store = RunStore(manifest_path.parent)
                self.spawn(run_id, lambda s=store: Engine(s).execute())


def _manifest_json(store: RunStore) -> dict:
    manifest = store.load_manifest()
    data = manifest.to_json()
    if manifest.status == "awaiting-human-feedback":
        record = store.load_record(manifest.current_step)
        if record is not None and record.pending is not None:
            pending = dict(record.pending)
            pending.pop("progress", None)  # internal loop state, not for clients
            data["pending_review"] = {
                "step": manifest.current_step,
                "unit": pending.get("unit", "artifact"),
                "action_name": pending.get("action_name"),
                "artifact_text": pending.get("artifact_text", ""),
            }
    return data


def create_app(
    runs_root: str | Path,
    provider: Optional[ProviderConfig] = None,
    static_dir: Optional[str | Path] = None,
) -> FastAPI:
    state = ServiceState(Path(runs_root), provider or ProviderConfig())

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        state.runs_root.mkdir(parents=True, exist_ok=True)
        state.resume_interrupted()
        yield

    app = FastAPI(title="nl2plan", version="0.1.0", lifespan=lifespan)
    app.state.service = state

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.post("/runs", status_code=202)
    def create_run(body: CreateRunBody):
        if not body.description.strip():
            raise ApiError(400, "empty-description", "the task description must not be empty")
        provider_config = state.provider
        if body.provider:
            try:
                provider_config = ProviderConfig.from_json({**state.provider.to_json(), **body.provider})
            except (TypeError, ValueError) as exc:
                raise ApiError(400, "invalid-config", str(exc))
        try:
            if isinstance(body.feedback, str):
                config = RunConfig.make(
                    provider_config, body.feedback, start_step=body.start_step,
                    search=body.search, heuristic=body.heuristic,
                )
            else:
                config = RunConfig(
                    provider=provider_config, feedback=dict(body.feedback),
                    start_step=body.start_step, search=body.search, heuristic=body.heuristic,
                )
        except ValueError as exc:
            raise ApiError(400, "invalid-config", str(exc))
        if config.start_step in ("task_extraction", "planning") and not body.domain_pddl:
            raise ApiError(400, "missing-domain",
                           f"starting at {config.start_step} requires domain_pddl")
        if config.start_step == "planning" and not body.problem_pddl:
            raise ApiError(400, "missing-problem", "starting at planning requires problem_pddl")
        try:
            store = prepare_run(
                state.runs_root, body.description, config,
                domain_pddl=body.domain_pddl, problem_pddl=body.problem_pddl,
            )
        except ValueError as exc:
            raise ApiError(400, "invalid-config", str(exc))
        except ProviderError as exc:
            raise ApiError(503, "provider-unavailable", str(exc))
        run_id = store.load_manifest().run_id
        state.spawn(run_id, lambda: Engine(store).execute())
        return _manifest_json(store)

    @app.get("/runs")
    def list_runs():
        runs = []
        if state.runs_root.is_dir():
            for manifest_path in sorted(state.runs_root.glob("*/manifest.json")):
                runs.append(_manifest_json(RunStore(manifest_path.parent)))
        return {"runs": runs}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return _manifest_json(state.store(run_id))

    @app.get("/runs/{run_id}/steps/{number}")
    def get_step(run_id: str, number: int):
        store = state.store(run_id)
        if not 1 <= number <= len(STEP_IDS):
            raise ApiError(404, "unknown-step", f"steps are numbered 1..{len(STEP_IDS)}")
        record = store.load_record(number)
        superseded = []
        for path in sorted((store.dir / "superseded").glob(f"step_{number}.*.json")):
            superseded.append(json.loads(path.read_text()))
        if record is None and not superseded:
            raise ApiError(409, "step-not-reached",
                           f"step {number} ({step_id(number)}) has not been reached")
        data = record.to_json() if record is not None else None
        return {"step": data, "superseded": superseded}

    @app.post("/runs/{run_id}/steps/{number}/feedback")
    def submit_feedback(run_id: str, number: int, body: FeedbackBody):
        store = state.store(run_id)
        manifest = store.load_manifest()
        if manifest.status != "awaiting-human-feedback" or manifest.current_step != number:
            raise ApiError(
                409, "not-awaiting-feedback",
                f"run is not awaiting feedback at step {number} "
                f"(status {manifest.status}, current step {manifest.current_step})",
            )
        if not body.approve and not body.text.strip():
            raise ApiError(422, "invalid-feedback", "approve or provide non-empty feedback text")
        payload = {"approve": True} if body.approve else {"text": body.text}
        # Flip to running before the worker starts so a double submission
        # hits the 409 above even if the worker has not been scheduled yet.
        manifest.status = "running"
        store.save_manifest(manifest)
        state.spawn(
            manifest.run_id,
            lambda: Engine(store).continue_after_feedback(number, payload),
        )
        return _manifest_json(store)

    @app.post("/runs/{run_id}/resume")
    def resume_run(run_id: str, body: ResumeBody):
        store = state.store(run_id)
        manifest = store.load_manifest()
        if manifest.status == "running":
            raise ApiError(409, "not-awaiting-feedback", "the run is still executing")
        lock = state.lock_for(manifest.run_id)
        with lock:
            try:
                if body.artifact is not None:
                    store = prepare_edit(store.dir, body.step, body.artifact)
                elif body.description is not None:
                    store = prepare_rerun(store.dir, body.step, body.description)
                else:
                    raise ApiError(422, "invalid-artifact", "provide an artifact or a description")
            except EditError as exc:
                raise ApiError(422, "invalid-artifact", str(exc))
        state.spawn(manifest.run_id, lambda: Engine(store).execute())
        return _manifest_json(store)

    @app.get("/runs/{run_id}/plan")
    def get_plan(run_id: str):
        store = state.store(run_id)
        manifest = store.load_manifest()
        plan = store.read_text("plan.txt")
        if plan is not None:
            return {"outcome": "plan", "plan": plan}
        if store.read_text("NO_PLAN") is not None:
            return {"outcome": "unsolvable", "message": "No plan found"}
        raise ApiError(409, "step-not-reached",
                       f"planning has not finished (status {manifest.status})")

    @app.get("/runs/{run_id}/usage")
    def get_usage(run_id: str):
        store = state.store(run_id)
        usage = store.read_text("usage.json")
        if usage is None:
            report = store.write_usage()
            return report
        return json.loads(usage)

    @app.get("/runs/{run_id}/files/{name}")
    def get_file(run_id: str, name: str):
        store = state.store(run_id)
        if name not in ("domain.pddl", "problem.pddl", "plan.txt"):
            raise ApiError(404, "unknown-step", f"file '{name}' is not served")
        text = store.read_text(name)
        if text is None:
            raise ApiError(409, "step-not-reached", f"'{name}' does not exist yet")
        return {"name": name, "text": text}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
