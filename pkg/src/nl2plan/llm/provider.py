"""Provider-abstracted LLM access with deterministic record/replay.

Transcripts are JSON-lines files, one exchange per line. Replay keys
digest the template id, the fully rendered prompt, and the temperature;
the model name is deliberately excluded so transcripts survive model
renames. API keys come from an environment variable only.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import httpx


class ProviderError(Exception):
    """Network, auth, or malformed-response failure on a live call."""


class ReplayMissError(ProviderError):
    """The transcript has no entry for this request; the fixture is stale."""

    def __init__(self, key: str, prompt: str):
        self.key = key
        preview = " ".join(prompt.split())[:120]
        super().__init__(f"no transcript entry for digest {key} (prompt: {preview}...)")


@dataclass(frozen=True)
class ChatRequest:
    step: str
    template_id: str
    messages: tuple[tuple[str, str], ...]  # (role, content)
    temperature: float = 0.0
    max_tokens: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")

    @property
    def prompt(self) -> str:
        return "\n".join(content for _, content in self.messages)

    @property
    def digest(self) -> str:
        payload = "\x1e".join((self.template_id, self.prompt, f"{self.temperature:.6f}"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class ChatExchange:
    step: str
    template_id: str
    key: str
    model: str
    temperature: float
    messages: tuple[tuple[str, str], ...]
    response: str
    usage_input: int
    usage_output: int
    timestamp: str

    def __post_init__(self):
        if self.usage_input < 0 or self.usage_output < 0:
            raise ValueError("token counts must be nonnegative")

    @property
    def prompt(self) -> str:
        return "\n".join(content for _, content in self.messages)

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "template_id": self.template_id,
            "key": self.key,
            "model": self.model,
            "temperature": self.temperature,
            "messages": [list(m) for m in self.messages],
            "response": self.response,
            "usage": {"input": self.usage_input, "output": self.usage_output},
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_json(data: dict) -> "ChatExchange":
        return ChatExchange(
            step=data["step"],
            template_id=data["template_id"],
            key=data["key"],
            model=data["model"],
            temperature=data["temperature"],
            messages=tuple((role, content) for role, content in data["messages"]),
            response=data["response"],
            usage_input=data["usage"]["input"],
            usage_output=data["usage"]["output"],
            timestamp=data["timestamp"],
        )


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "replay"  # "live" | "replay" | "record"
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4"
    api_key_env: str = "NL2PLAN_API_KEY"
    transcript_dir: Optional[str] = None
    temperature: float = 0.0
    max_tokens: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("live", "replay", "record"):
            raise ValueError(f"unknown provider kind '{self.kind}'")
        if self.kind in ("replay", "record") and not self.transcript_dir:
            raise ValueError(f"provider kind '{self.kind}' requires a transcript directory")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model": self.model,
            "api_key_env": self.api_key_env,
            "transcript_dir": self.transcript_dir,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }

    @staticmethod
    def from_json(data: dict) -> "ProviderConfig":
        return ProviderConfig(**data)


class LlmProvider(Protocol):
    def complete(self, request: ChatRequest) -> ChatExchange: ...


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


class LiveProvider:
    """OpenAI-compatible chat-completions client."""

    def __init__(self, config: ProviderConfig):
        self.config = config
        api_key = os.environ.get(config.api_key_env, "")
        if not api_key:
            raise ProviderError(
                f"no API key: set the {config.api_key_env} environment variable"
            )
        self._client = httpx.Client(
            base_url=config.endpoint.rstrip("/"),
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=120.0,
        )

    def complete(self, request: ChatRequest) -> ChatExchange:
        body = {
            "model": self.config.model,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": request.temperature,
        }
        if request.max_tokens:
            body["max_tokens"] = request.max_tokens
        try:
            response = self._client.post("/chat/completions", json=body)
            response.raise_for_status()
            data = response.json()
            text = data["choices"][0]["message"]["content"]
            usage = data.get("usage", {})
        except httpx.HTTPError as exc:
            raise ProviderError(f"LLM request failed: {exc}") from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"malformed LLM response: {exc}") from exc
        return ChatExchange(
            step=request.step,
            template_id=request.template_id,
            key=request.digest,
            model=self.config.model,
            temperature=request.temperature,
            messages=request.messages,
            response=text,
            usage_input=int(usage.get("prompt_tokens", 0)),
            usage_output=int(usage.get("completion_tokens", 0)),
            timestamp=_now(),
        )


def read_transcript(path: Path) -> list[ChatExchange]:
    exchanges = []
    with path.open() as handle:
        for line in handle:
            line = line.strip()
            if line:
                exchanges.append(ChatExchange.from_json(json.loads(line)))
    return exchanges


def load_transcript_dir(directory: Path) -> list[ChatExchange]:
    exchanges: list[ChatExchange] = []
    for path in sorted(directory.glob("*.jsonl")):
        exchanges.extend(read_transcript(path))
    return exchanges


class ReplayProvider:
    """Serves stored responses byte-identically, keyed by request digest.

    Repeated identical requests consume stored entries in order; once a
    key's entries run out, the last one is served again.
    """

    def __init__(self, transcript_dir: str | Path):
        directory = Path(transcript_dir)
        if not directory.is_dir():
            raise ProviderError(f"transcript directory not found: {directory}")
        self._by_key: dict[str, list[ChatExchange]] = {}
        for exchange in load_transcript_dir(directory):
            self._by_key.setdefault(exchange.key, []).append(exchange)
        self._cursor: dict[str, int] = {}
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatExchange:
        key = request.digest
        entries = self._by_key.get(key)
        if not entries:
            raise ReplayMissError(key, request.prompt)
        with self._lock:
            index = self._cursor.get(key, 0)
            self._cursor[key] = index + 1
        stored = entries[min(index, len(entries) - 1)]
        return ChatExchange(
            step=request.step,
            template_id=request.template_id,
            key=key,
            model=stored.model,
            temperature=request.temperature,
            messages=request.messages,
            response=stored.response,
            usage_input=stored.usage_input,
            usage_output=stored.usage_output,
            timestamp=stored.timestamp,
        )


class RecordingProvider:
    """Wraps another provider and appends each exchange to a transcript."""

    def __init__(self, base: LlmProvider, transcript_path: str | Path):
        self.base = base
        self.path = Path(transcript_path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatExchange:
        exchange = self.base.complete(request)
        with self._lock:
            with self.path.open("a") as handle:
                handle.write(json.dumps(exchange.to_json()) + "\n")
        return exchange


class ScriptedProvider:
    """Deterministic canned provider for tests and fixture generation.

    Responses are FIFO queues per pipeline step; token usage is a
    whitespace word count so accounting stays reproducible.
    """

    def __init__(self, responses: dict[str, list[str]]):
        self._queues = {step: list(texts) for step, texts in responses.items()}

    def complete(self, request: ChatRequest) -> ChatExchange:
        queue = self._queues.get(request.step)
        if not queue:
            raise ProviderError(
                f"scripted provider has no response left for step '{request.step}'"
            )
        response = queue.pop(0)
        return ChatExchange(
            step=request.step,
            template_id=request.template_id,
            key=request.digest,
            model="scripted",
            temperature=request.temperature,
            messages=request.messages,
            response=response,
            usage_input=len(request.prompt.split()),
            usage_output=len(response.split()),
            timestamp="1970-01-01T00:00:00+00:00",
        )


def make_provider(config: ProviderConfig) -> LlmProvider:
    if config.kind == "live":
        return LiveProvider(config)
    if config.kind == "replay":
        return ReplayProvider(config.transcript_dir)
    base = LiveProvider(config)
    path = Path(config.transcript_dir) / "session.jsonl"
    return RecordingProvider(base, path)


# ---------------------------------------------------------------------------
# Usage accounting


@dataclass
class UsageReport:
    steps: dict[str, dict[str, int]] = field(default_factory=dict)
    grand_total: int = 0

    def to_json(self) -> dict:
        return {"steps": self.steps, "grand_total": self.grand_total}


def usage_totals(exchanges: list[ChatExchange]) -> UsageReport:
    """Per-step input+output token sums; the grand total sums everything."""
    report = UsageReport()
    for ex in exchanges:
        bucket = report.steps.setdefault(
            ex.step, {"input": 0, "output": 0, "total": 0}
        )
        bucket["input"] += ex.usage_input
        bucket["output"] += ex.usage_output
        bucket["total"] += ex.usage_input + ex.usage_output
        report.grand_total += ex.usage_input + ex.usage_output
    return report
