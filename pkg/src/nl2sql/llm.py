"""Chat-completion transports: live HTTP, deterministic replay, recording.

Requests use the de-facto hosted-LLM wire shape: a JSON body with ``model``,
``messages`` (role/content pairs) and sampling fields, answered by a body
whose first choice carries the assistant message. Each request body is
digested (sha256 of its canonical JSON); the digest keys the replay store,
so any prompt change invalidates stale fixtures loudly instead of silently
replaying the wrong answer.

Replay store layout: one ``<digest>.json`` file per request holding the
response body. ``RecordingTransport`` writes that layout while passing
through to a live transport, which is how fixture sets are built.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import requests

from .errors import ConfigError, ReplayMissError, RetriesExhaustedError, TransportError

API_KEY_ENV = "NL2SQL_API_KEY"
FALLBACK_API_KEY_ENV = "OPENAI_API_KEY"

Message = dict[str, str]  # {"role": ..., "content": ...}


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.0
    max_tokens: int = 512


def build_request(model: str, messages: list[Message], sampling: Sampling) -> dict:
    return {
        "model": model,
        "messages": messages,
        "temperature": sampling.temperature,
        "max_tokens": sampling.max_tokens,
    }


def request_digest(request: dict) -> str:
    canonical = json.dumps(request, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def reply_text(response_body: dict) -> str:
    try:
        return response_body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed chat-completion response: {exc}") from exc


class Transport(Protocol):
    def send(self, request: dict) -> dict:
        """Return the response body for one chat-completion request."""


class HttpChatTransport:
    """Live transport with bounded exponential-backoff retry.

    Retries cover connection errors, HTTP 5xx and 429; other statuses fail
    immediately. ``sleeper`` is injectable so tests do not wait.
    """

    RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        max_retries: int = 3,
        backoff_seconds: float = 1.0,
        timeout_seconds: float = 120.0,
        sleeper: Callable[[float], None] = time.sleep,
        session: requests.Session | None = None,
    ):
        if api_key is None:
            api_key = os.environ.get(API_KEY_ENV) or os.environ.get(FALLBACK_API_KEY_ENV)
        if not api_key:
            raise ConfigError(
                f"no API key: set {API_KEY_ENV} (or {FALLBACK_API_KEY_ENV}) or use replay mode"
            )
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.api_key = api_key
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.timeout_seconds = timeout_seconds
        self.sleeper = sleeper
        # No shared Session by default: module-level post is safe under
        # concurrent pipeline workers.
        self.session = session

    def send(self, request: dict) -> dict:
        headers = {
            "Authorization": f"Bearer {self.api_key}",
            "Content-Type": "application/json",
        }
        post = self.session.post if self.session is not None else requests.post
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self.sleeper(self.backoff_seconds * (2 ** (attempt - 1)))
            try:
                resp = post(
                    self.url, json=request, headers=headers, timeout=self.timeout_seconds
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code == 200:
                try:
                    return resp.json()
                except ValueError as exc:
                    raise TransportError(f"non-JSON response body: {exc}") from exc
            if resp.status_code in self.RETRYABLE_STATUSES:
                last_error = TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        raise RetriesExhaustedError(
            f"gave up after {self.max_retries + 1} attempts: {last_error}"
        )


class ReplayTransport:
    """Offline transport backed by a directory of digest-keyed responses."""

    def __init__(self, store_dir: Path | str):
        self.store_dir = Path(store_dir)

    def send(self, request: dict) -> dict:
        digest = request_digest(request)
        path = self.store_dir / f"{digest}.json"
        if not path.is_file():
            head = ""
            messages = request.get("messages", [])
            if messages:
                head = repr(messages[-1].get("content", ""))[:120]
            raise ReplayMissError(digest, hint=f"last message starts {head}")
        return json.loads(path.read_text(encoding="utf-8"))


class RecordingTransport:
    """Pass-through transport that persists every response for later replay."""

    def __init__(self, inner: Transport, store_dir: Path | str):
        self.inner = inner
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)

    def send(self, request: dict) -> dict:
        body = self.inner.send(request)
        digest = request_digest(request)
        path = self.store_dir / f"{digest}.json"
        path.write_text(json.dumps(body, ensure_ascii=False, indent=1), encoding="utf-8")
        return body


def store_reply(store_dir: Path | str, request: dict, text: str) -> str:
    """Write a minimal response body for ``request``; returns the digest.

    This is the fixture-building primitive: tests script assistant replies
    and persist them in the exact layout ReplayTransport reads.
    """
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    digest = request_digest(request)
    body = {"choices": [{"message": {"role": "assistant", "content": text}}]}
    (store_dir / f"{digest}.json").write_text(
        json.dumps(body, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    return digest


@dataclass
class ModelEndpoint:
    """One model in the pipeline: who it is and how to reach it."""

    role: str  # "generator" | "corrector"
    transport: Transport
    model_name: str
    sampling: Sampling = field(default_factory=Sampling)

    def complete(self, messages: list[Message]) -> tuple[str, str]:
        """Send one request; returns (assistant text, request digest)."""
        request = build_request(self.model_name, messages, self.sampling)
        body = self.transport.send(request)
        return reply_text(body), request_digest(request)
