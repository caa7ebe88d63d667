"""Command-line front door.

Provider defaults may come from a key/value config file (see
``--config``); the API key itself is only ever read from the environment
variable the config names.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .llm.provider import ProviderConfig, ReplayMissError, make_provider
from .pddl import PddlError, parse_domain, parse_problem, print_plan
from .pddl.model import GroundStep, Plan
from .pipeline import (
    EditError,
    RunConfig,
    RunStore,
    apply_feedback,
    baseline_cot,
    continue_run,
    resume_edit,
    resume_rerun,
    start_run,
    step_id,
)
from .planner import PlannerConfig, ground, plan_task, solve, validate_plan


def load_provider_file(path: Optional[str]) -> dict:
    """Parse a flat ``key = value`` config file for provider defaults."""
    if not path:
        return {}
    values: dict[str, object] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise click.ClickException(f"malformed config line: '{raw}'")
        value = value.strip().strip('"').strip("'")
        key = key.strip()
        if key in ("temperature",):
            values[key] = float(value)
        elif key in ("max_tokens",):
            values[key] = int(value)
        else:
            values[key] = value
    return values


def _provider_config(config_file, provider, transcripts, endpoint, model) -> ProviderConfig:
    values = load_provider_file(config_file)
    if provider:
        values["kind"] = provider
    if transcripts:
        values["transcript_dir"] = transcripts
    if endpoint:
        values["endpoint"] = endpoint
    if model:
        values["model"] = model
    try:
        return ProviderConfig(**values)
    except (TypeError, ValueError) as exc:
        raise click.ClickException(str(exc))


def _read_input(input_path: Optional[str], description: Optional[str]) -> str:
    if description:
        return description
    if input_path == "-" or input_path is None:
        return sys.stdin.read()
    return Path(input_path).read_text()


provider_options = [
    click.option("--config", "config_file", type=click.Path(exists=True), default=None,
                 help="Provider defaults file (key = value lines)."),
    click.option("--provider", type=click.Choice(["live", "replay", "record"]), default=None),
    click.option("--transcripts", type=click.Path(), default=None,
                 help="Transcript directory for replay/record."),
    click.option("--endpoint", default=None, help="OpenAI-compatible base URL."),
    click.option("--model", default=None),
]


def with_provider_options(fn):
    for option in reversed(provider_options):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Turn natural-language task descriptions into validated plans."""


@main.command()
@click.option("--input", "input_path", type=str, default=None,
              help="File with the task description ('-' for stdin).")
@click.option("--description", default=None, help="Task description given inline.")
@click.option("--out", "out_dir", type=click.Path(), default="runs",
              help="Directory that will hold the run directory.")
@click.option("--feedback", type=click.Choice(["none", "llm", "human"]), default="none")
@click.option("--start-step", type=click.Choice(["type_extraction", "hierarchy_construction",
                                                 "action_extraction", "action_construction",
                                                 "task_extraction", "planning"]),
              default="type_extraction")
@click.option("--domain", "domain_file", type=click.Path(exists=True), default=None,
              help="Stored domain PDDL (required when starting at task extraction).")
@click.option("--problem", "problem_file", type=click.Path(exists=True), default=None,
              help="Stored problem PDDL (required when starting at planning).")
@click.option("--search", type=click.Choice(["gbfs", "astar", "bfs"]), default="gbfs")
@click.option("--heuristic", type=click.Choice(["ff", "goal-count"]), default="ff")
@with_provider_options
def run(input_path, description, out_dir, feedback, start_step, domain_file, problem_file,
        search, heuristic, config_file, provider, transcripts, endpoint, model):
    """Run the full pipeline on a task description."""
    text = _read_input(input_path, description)
    provider_config = _provider_config(config_file, provider, transcripts, endpoint, model)
    config = RunConfig.make(
        provider_config, feedback, start_step=start_step, search=search, heuristic=heuristic,
    )
    domain_pddl = Path(domain_file).read_text() if domain_file else None
    problem_pddl = Path(problem_file).read_text() if problem_file else None
    try:
        manifest = start_run(out_dir, text, config,
                             domain_pddl=domain_pddl, problem_pddl=problem_pddl)
    except (ValueError, ReplayMissError) as exc:
        raise click.ClickException(str(exc))
    manifest = _drive_interactive(out_dir, manifest)
    _report_run(out_dir, manifest)


def _drive_interactive(out_dir, manifest):
    """TTY loop for runs configured with human feedback."""
    while manifest.status == "awaiting-human-feedback":
        store = RunStore(Path(out_dir) / manifest.run_id)
        record = store.load_record(manifest.current_step)
        pending = record.pending or {}
        unit = pending.get("action_name") or step_id(manifest.current_step)
        click.echo(f"\n--- review {unit} (step {manifest.current_step}) ---")
        click.echo(pending.get("artifact_text", ""))
        answer = click.prompt(
            "Feedback (empty line approves)", default="", show_default=False
        )
        body = {"approve": True} if not answer.strip() else {"text": answer}
        manifest = apply_feedback(store.dir, manifest.current_step, body)
    return manifest


def _report_run(out_dir, manifest):
    click.echo(f"run {manifest.run_id}: {manifest.status}")
    if manifest.status == "failed":
        raise click.ClickException(manifest.error or "unknown failure")
    store = RunStore(Path(out_dir) / manifest.run_id)
    plan = store.read_text("plan.txt")
    if plan is not None:
        click.echo("plan:")
        click.echo(plan.rstrip())
    elif store.read_text("NO_PLAN") is not None:
        click.echo("No plan found")


@main.command()
@click.argument("run_dir", type=click.Path(exists=True))
@click.option("--step", "step_n", type=int, default=None, help="Step to edit or re-run (1-6).")
@click.option("--artifact", "artifact_file", type=click.Path(exists=True), default=None,
              help="Edited artifact file for --step.")
@click.option("--description", default=None, help="New task description for a re-run.")
def resume(run_dir, step_n, artifact_file, description):
    """Continue an interrupted run, or edit an artifact and re-run from it."""
    try:
        if artifact_file is not None:
            if step_n is None:
                raise click.ClickException("--artifact requires --step")
            manifest = resume_edit(run_dir, step_n, Path(artifact_file).read_text())
        elif step_n is not None:
            manifest = resume_rerun(run_dir, step_n, description)
        else:
            manifest = continue_run(run_dir)
    except (EditError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))
    manifest = _drive_interactive(Path(run_dir).parent, manifest)
    _report_run(Path(run_dir).parent, manifest)


@main.command()
@click.argument("domain_file", type=click.Path(exists=True))
@click.argument("problem_file", type=click.Path(exists=True), required=False)
def validate(domain_file, problem_file):
    """Parse and check a domain (and optionally a problem)."""
    try:
        domain = parse_domain(Path(domain_file).read_text())
        click.echo(f"domain '{domain.name}': {len(domain.actions)} action(s), "
                   f"{len(domain.predicates)} predicate(s)")
        if problem_file:
            problem = parse_problem(Path(problem_file).read_text(), domain)
            click.echo(f"problem '{problem.name}': {len(problem.objects)} object(s), "
                       f"{len(problem.init)} init atom(s)")
    except PddlError as exc:
        raise click.ClickException(str(exc))
    click.echo("ok")


@main.command(name="plan")
@click.argument("domain_file", type=click.Path(exists=True))
@click.argument("problem_file", type=click.Path(exists=True))
@click.option("--search", type=click.Choice(["gbfs", "astar", "bfs"]), default="gbfs")
@click.option("--heuristic", type=click.Choice(["ff", "goal-count"]), default="ff")
@click.option("--max-expansions", type=int, default=1_000_000)
@click.option("--timeout", type=float, default=60.0)
@click.option("--validate-file", "plan_file", type=click.Path(exists=True), default=None,
              help="Validate this plan file instead of searching.")
def plan_command(domain_file, problem_file, search, heuristic, max_expansions, timeout, plan_file):
    """Solve a PDDL task (or validate an existing plan with --validate-file)."""
    try:
        domain = parse_domain(Path(domain_file).read_text())
        problem = parse_problem(Path(problem_file).read_text(), domain)
    except PddlError as exc:
        raise click.ClickException(str(exc))
    if plan_file:
        plan = _read_plan_file(Path(plan_file).read_text())
        verdict = validate_plan(domain, problem, plan)
        if verdict.valid:
            click.echo("plan valid")
        else:
            where = f"step {verdict.failed_step}" if verdict.failed_step else "goal"
            raise click.ClickException(f"invalid at {where}: {verdict.reason}")
        return
    config = PlannerConfig(search=search, heuristic=heuristic,
                           max_expansions=max_expansions, timeout_s=timeout)
    result = plan_task(domain, problem, config)
    click.echo(result.user_message)
    if result.outcome == "plan":
        click.echo(print_plan(result.plan).rstrip())
    elif result.outcome == "resource-limit":
        sys.exit(2)


def _read_plan_file(text: str) -> Plan:
    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        parts = line.strip("()").split()
        if parts:
            steps.append(GroundStep(parts[0].lower(), tuple(p.lower() for p in parts[1:])))
    return Plan(tuple(steps), len(steps))


@main.command(name="baseline-cot")
@click.option("--domain-desc", "domain_desc", required=True,
              help="Domain description text or @file.")
@click.option("--task-desc", "task_desc", required=True,
              help="Task description text or @file.")
@with_provider_options
def baseline_command(domain_desc, task_desc, config_file, provider, transcripts, endpoint, model):
    """Ask the model for a plan directly (zero-shot chain of thought)."""
    provider_config = _provider_config(config_file, provider, transcripts, endpoint, model)
    domain_text = Path(domain_desc[1:]).read_text() if domain_desc.startswith("@") else domain_desc
    task_text = Path(task_desc[1:]).read_text() if task_desc.startswith("@") else task_desc
    try:
        exchange = baseline_cot(domain_text, task_text, make_provider(provider_config),
                                temperature=provider_config.temperature)
    except (ValueError, ReplayMissError) as exc:
        raise click.ClickException(str(exc))
    click.echo(exchange.response)


@main.command()
@click.option("--runs", "runs_root", type=click.Path(), default="runs")
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory with the review UI bundle.")
@click.option("--keep", type=int, default=None,
              help="Keep only the N newest runs at startup.")
@with_provider_options
def serve(runs_root, port, host, static_dir, keep, config_file, provider, transcripts,
          endpoint, model):
    """Serve the HTTP API (and the review UI when --static is given)."""
    import uvicorn

    from .service import create_app

    provider_config = _provider_config(config_file, provider, transcripts, endpoint, model)
    if keep is not None:
        _prune_runs(Path(runs_root), keep)
    if static_dir is None:
        bundled = Path(__file__).parent / "static"
        static_dir = bundled if bundled.is_dir() else None
    app = create_app(runs_root, provider_config, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def _prune_runs(runs_root: Path, keep: int) -> None:
    if not runs_root.is_dir():
        return
    manifests = sorted(
        runs_root.glob("*/manifest.json"),
        key=lambda p: json.loads(p.read_text())["created"],
    )
    import shutil

    for manifest in manifests[: max(0, len(manifests) - keep)]:
        shutil.rmtree(manifest.parent)


@main.command(name="report-usage")
@click.argument("run_dir", type=click.Path(exists=True))
def report_usage(run_dir):
    """Print per-step and total token usage for a run."""
    store = RunStore(run_dir)
    if not store.exists():
        raise click.ClickException(f"no run at {run_dir}")
    report = store.write_usage()
    for step, bucket in report["steps"].items():
        click.echo(f"{step}: input={bucket['input']} output={bucket['output']} "
                   f"total={bucket['total']}")
    click.echo(f"grand total: {report['grand_total']}")


if __name__ == "__main__":
    main()
