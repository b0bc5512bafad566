"""Backend-neutral chat completion: request/response types, transcript log, backends."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import httpx

from thoughtprop.errors import (
    BackendError,
    BackendRejectedError,
    BackendUnavailableError,
    InvalidArgumentError,
)
from thoughtprop.oracle import PERFECT, OracleErrorModel, simulate_oracle_reply

logger = logging.getLogger(__name__)

TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512
    request_tag: str = ""

    def __post_init__(self):
        if not self.prompt:
            raise InvalidArgumentError("prompt must be nonempty")
        if self.max_tokens < 1:
            raise InvalidArgumentError("max_tokens must be positive")
        if self.temperature < 0:
            raise InvalidArgumentError("temperature must be nonnegative")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: int = 0


def word_count(text: str) -> int:
    return len(text.split())


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class TranscriptLog:
    """Serialized, append-only record of every successful call.

    Kept in memory and, when ``path`` is given, mirrored to a JSONL file.
    """

    def __init__(self, path=None):
        self.path = path
        self.entries: list[dict] = []
        self._lock = threading.Lock()

    def append(self, request: ChatRequest, response: ChatResponse) -> None:
        entry = {
            "request_tag": request.request_tag,
            "prompt": request.prompt,
            "text": response.text,
            "prompt_tokens": response.prompt_tokens,
            "completion_tokens": response.completion_tokens,
            "latency_ms": response.latency_ms,
        }
        with self._lock:
            self.entries.append(entry)
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry) + "\n")


class ChatBackend:
    """Base class. Subclasses implement ``_complete``; logging and the
    in-flight limit live here."""

    def __init__(self, model_id="model", temperature=0.0, max_tokens=512, max_concurrency=8, transcript=None):
        self.model_id = model_id
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.transcript = transcript if transcript is not None else TranscriptLog()
        self._slots = threading.BoundedSemaphore(max(1, int(max_concurrency)))
        self.calls = 0
        self._count_lock = threading.Lock()

    def request(self, prompt: str, tag: str = "", temperature=None) -> ChatRequest:
        return ChatRequest(
            self.model_id,
            prompt,
            self.temperature if temperature is None else temperature,
            self.max_tokens,
            tag,
        )

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._slots:
            response = self._complete(request)
        with self._count_lock:
            self.calls += 1
        self.transcript.append(request, response)
        return response

    def ask(self, prompt: str, tag: str = "", temperature=None) -> ChatResponse:
        return self.complete(self.request(prompt, tag, temperature))

    def _complete(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class ScriptedBackend(ChatBackend):
    """Replays canned replies, keyed by prompt hash or taken in order.

    ``script`` maps a prompt's sha256 (or the raw prompt) to either reply text
    or a dict with ``text`` and optional token counts. ``responses`` is an
    ordered fallback consumed one reply per call.
    """

    def __init__(self, script: Mapping | None = None, responses: Sequence | None = None, **kwargs):
        super().__init__(**kwargs)
        self.script = dict(script or {})
        self._queue = list(responses or [])
        self._queue_lock = threading.Lock()

    @classmethod
    def from_transcript(cls, path, **kwargs) -> "ScriptedBackend":
        script = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    continue
                script.setdefault(prompt_key(entry["prompt"]), {
                    "text": entry["text"],
                    "prompt_tokens": entry.get("prompt_tokens"),
                    "completion_tokens": entry.get("completion_tokens"),
                })
        return cls(script=script, **kwargs)

    def _complete(self, request):
        entry = self.script.get(prompt_key(request.prompt), self.script.get(request.prompt))
        if entry is None:
            with self._queue_lock:
                if not self._queue:
                    raise BackendRejectedError(404, f"no scripted reply for prompt {prompt_key(request.prompt)[:12]}")
                entry = self._queue.pop(0)
        if isinstance(entry, str):
            entry = {"text": entry}
        text = entry["text"]
        prompt_tokens = entry.get("prompt_tokens")
        completion_tokens = entry.get("completion_tokens")
        return ChatResponse(
            text,
            word_count(request.prompt) if prompt_tokens is None else prompt_tokens,
            word_count(text) if completion_tokens is None else completion_tokens,
        )


class CallableBackend(ChatBackend):
    """Wraps ``fn(prompt) -> text``; handy for ad-hoc fakes."""

    def __init__(self, fn: Callable[[str], str], **kwargs):
        super().__init__(**kwargs)
        self.fn = fn

    def _complete(self, request):
        text = self.fn(request.prompt)
        return ChatResponse(text, word_count(request.prompt), word_count(text))


class OracleBackend(ChatBackend):
    """Answers with exact graph algorithms, optionally with injected errors.

    Each call draws from its own stream seeded by ``(seed, request_tag, prompt)``,
    so replies do not depend on call scheduling.
    """

    def __init__(self, error_model: OracleErrorModel = PERFECT, seed: int = 0, registry=None, **kwargs):
        kwargs.setdefault("model_id", "oracle")
        super().__init__(**kwargs)
        self.error_model = error_model
        self.seed = seed
        self.registry = list(registry) if registry is not None else None

    def _complete(self, request):
        rng = random.Random(f"{self.seed}|{request.request_tag}|{prompt_key(request.prompt)}")
        text = simulate_oracle_reply(request.prompt, self.registry, self.error_model, rng)
        return ChatResponse(text, word_count(request.prompt), word_count(text))


@dataclass
class RetryPolicy:
    max_retries: int = 5
    base_delay: float = 1.0
    factor: float = 2.0

    def delay(self, attempt: int, rng: random.Random) -> float:
        # full jitter
        return rng.uniform(0, self.base_delay * self.factor**attempt)


class HttpChatBackend(ChatBackend):
    """Chat endpoint over HTTP with retry on transient failures.

    ``provider`` picks the wire format: ``openai`` (any OpenAI-compatible
    ``/chat/completions`` server) or ``anthropic`` (``/v1/messages``).
    """

    DEFAULT_KEY_ENV = {"openai": "OPENAI_API_KEY", "anthropic": "ANTHROPIC_API_KEY"}
    DEFAULT_ENDPOINT = {"openai": "https://api.openai.com/v1", "anthropic": "https://api.anthropic.com"}

    def __init__(
        self,
        provider="openai",
        endpoint=None,
        api_key_env=None,
        retry: RetryPolicy | None = None,
        timeout=60.0,
        client: httpx.Client | None = None,
        sleep=time.sleep,
        seed=None,
        **kwargs,
    ):
        if provider not in self.DEFAULT_KEY_ENV:
            raise InvalidArgumentError(f"unknown provider {provider!r}")
        super().__init__(**kwargs)
        self.provider = provider
        self.endpoint = (endpoint or self.DEFAULT_ENDPOINT[provider]).rstrip("/")
        self.api_key_env = api_key_env or self.DEFAULT_KEY_ENV[provider]
        self.retry = retry or RetryPolicy()
        self._client = client or httpx.Client(timeout=timeout)
        self._sleep = sleep
        self._rng = random.Random(seed)

    def _payload(self, request):
        key = os.environ.get(self.api_key_env, "")
        messages = [{"role": "user", "content": request.prompt}]
        body = {
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if self.provider == "openai":
            headers = {"Authorization": f"Bearer {key}"} if key else {}
            return f"{self.endpoint}/chat/completions", headers, body
        headers = {"x-api-key": key, "anthropic-version": "2023-06-01"}
        return f"{self.endpoint}/v1/messages", headers, body

    def _parse(self, request, data, latency_ms):
        try:
            if self.provider == "openai":
                text = data["choices"][0]["message"]["content"] or ""
                usage = data.get("usage") or {}
                pt, ct = usage.get("prompt_tokens"), usage.get("completion_tokens")
            else:
                text = "".join(block.get("text", "") for block in data["content"])
                usage = data.get("usage") or {}
                pt, ct = usage.get("input_tokens"), usage.get("output_tokens")
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendRejectedError(200, f"malformed response body: {exc!r}") from None
        return ChatResponse(
            text,
            word_count(request.prompt) if pt is None else int(pt),
            word_count(text) if ct is None else int(ct),
            latency_ms,
        )

    def _complete(self, request):
        url, headers, body = self._payload(request)
        last = None
        for attempt in range(self.retry.max_retries + 1):
            if attempt:
                self._sleep(self.retry.delay(attempt - 1, self._rng))
            start = time.monotonic()
            try:
                resp = self._client.post(url, headers=headers, json=body)
            except httpx.TransportError as exc:
                last = f"transport error: {exc!r}"
                logger.warning("%s (attempt %d) for %s", last, attempt + 1, request.request_tag)
                continue
            if resp.status_code in TRANSIENT_STATUS:
                last = f"status {resp.status_code}"
                logger.warning("%s (attempt %d) for %s", last, attempt + 1, request.request_tag)
                continue
            if resp.status_code >= 400:
                raise BackendRejectedError(resp.status_code, resp.text[:500])
            try:
                data = resp.json()
            except ValueError:
                raise BackendRejectedError(resp.status_code, resp.text[:500]) from None
            return self._parse(request, data, int((time.monotonic() - start) * 1000))
        raise BackendUnavailableError(f"gave up after {self.retry.max_retries} retries: {last}")


@dataclass
class UsageTotals:
    totals: dict = field(default_factory=dict)
    skipped: int = 0

    @property
    def overall(self) -> tuple[int, int]:
        return (
            sum(p for p, _ in self.totals.values()),
            sum(c for _, c in self.totals.values()),
        )


def split_tag(tag: str):
    """``instance/method/shots/encoding/layers/step...`` -> ``(method, shots, layers)``."""
    parts = tag.split("/")
    if len(parts) < 5:
        return ("untagged", None, None)
    try:
        return (parts[1], int(parts[2]), int(parts[4]))
    except ValueError:
        return ("untagged", None, None)


def usage_totals(log: os.PathLike | str | Iterable) -> UsageTotals:
    """Sum prompt and completion tokens per ``(method, shots, layers)``.

    ``log`` is a transcript path, an iterable of JSONL lines, or of entry dicts.
    Unreadable lines are skipped and counted.
    """
    if isinstance(log, (str, os.PathLike)):
        with open(log, encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(log)
    sums = defaultdict(lambda: [0, 0])
    skipped = 0
    for line in lines:
        if isinstance(line, str) and not line.strip():
            continue
        try:
            entry = json.loads(line) if isinstance(line, str) else line
            pt, ct = int(entry["prompt_tokens"]), int(entry["completion_tokens"])
            key = split_tag(entry.get("request_tag", ""))
        except (ValueError, KeyError, TypeError):
            skipped += 1
            continue
        sums[key][0] += pt
        sums[key][1] += ct
    if skipped:
        logger.warning("skipped %d unreadable transcript lines", skipped)
    return UsageTotals({k: tuple(v) for k, v in sums.items()}, skipped)


def make_backend(config: Mapping, transcript: TranscriptLog | None = None, registry=None) -> ChatBackend:
    """Build a backend from a config mapping (see README for the fields)."""
    kind = config.get("provider", "oracle")
    common = {
        "temperature": config.get("temperature", 0.0),
        "max_tokens": config.get("max_tokens", 512),
        "max_concurrency": config.get("max_concurrency", 8),
        "transcript": transcript,
    }
    if "model_id" in config:
        common["model_id"] = config["model_id"]
    if kind == "oracle":
        em = config.get("error_model") or {}
        model = OracleErrorModel(
            em.get("p_suboptimal", 0.0), em.get("p_invalid", 0.0), em.get("suboptimal_strategy", "greedy-nearest")
        )
        return OracleBackend(model, seed=config.get("seed", 0), registry=registry, **common)
    if kind == "scripted":
        if "script" not in config:
            raise InvalidArgumentError("scripted backend needs a 'script' transcript path")
        return ScriptedBackend.from_transcript(config["script"], **common)
    if kind in HttpChatBackend.DEFAULT_KEY_ENV:
        retry = RetryPolicy(
            config.get("max_retries", 5), config.get("base_delay", 1.0), config.get("backoff_factor", 2.0)
        )
        return HttpChatBackend(
            kind, config.get("endpoint"), config.get("api_key_env"), retry, config.get("timeout", 60.0), **common
        )
    raise InvalidArgumentError(f"unknown provider {kind!r}")


__all__ = [
    "BackendError",
    "CallableBackend",
    "ChatBackend",
    "ChatRequest",
    "ChatResponse",
    "HttpChatBackend",
    "OracleBackend",
    "RetryPolicy",
    "ScriptedBackend",
    "TranscriptLog",
    "UsageTotals",
    "make_backend",
    "usage_totals",
]
