"""Chat-completion gateways: a remote OpenAI-style client and a scripted mock.

Anything with ``complete(request) -> str`` works as a gateway.  The remote
gateway speaks the common chat wire shape (model, messages, temperature,
max_tokens in; choices[0].message.content out) and retries transient
failures.  The scripted mock replays canned responses keyed by substring
match on the user prompt, so pipelines run deterministic and offline.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import httpx

from ._retry import TransientFailure, with_retries
from .errors import MockUnmatched, ProviderUnreachable

DEFAULT_TIMEOUT_MS = 30_000
_RETRYABLE_STATUSES = frozenset({429}) | frozenset(range(500, 600))


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = 0.0
    max_tokens: int = 512

    def __post_init__(self):
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("system_prompt and user_prompt must be non-empty")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


class ChatGateway(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


@dataclass(frozen=True)
class LlmProviderConfig:
    endpoint_url: str
    model_name: str = "default"
    api_key: str = ""
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def __post_init__(self):
        if not self.endpoint_url:
            raise ValueError("endpoint_url must be non-empty")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be positive")


def post_json(
    client: httpx.Client,
    url: str,
    payload: dict,
    headers: dict[str, str],
    *,
    sleep: Callable[[float], None],
) -> dict:
    """POST JSON with the shared retry policy and return the parsed body.

    5xx and 429 responses and transport errors are retried; any other
    non-2xx status fails immediately.
    """

    def attempt() -> dict:
        try:
            resp = client.post(url, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            raise TransientFailure(f"transport error: {exc}") from exc
        if resp.status_code in _RETRYABLE_STATUSES:
            raise TransientFailure(f"HTTP {resp.status_code}")
        if not 200 <= resp.status_code < 300:
            raise ProviderUnreachable(
                f"provider returned HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderUnreachable(f"provider returned invalid JSON: {exc}") from exc

    return with_retries(attempt, sleep=sleep)


def _noop_close():
    pass


class RemoteChatGateway:
    """Gateway for an OpenAI-style /chat/completions endpoint."""

    def __init__(
        self,
        config: LlmProviderConfig,
        *,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] | None = None,
    ):
        self.config = config
        self._sleep = sleep if sleep is not None else time.sleep
        if client is not None:
            self._client = client
            self._close = _noop_close
        else:
            self._client = httpx.Client(timeout=config.timeout_ms / 1000.0)
            self._close = self._client.close

    def complete(self, request: CompletionRequest) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        body = post_json(
            self._client, self.config.endpoint_url, payload, headers, sleep=self._sleep
        )
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnreachable(
                f"provider response missing choices[0].message.content: {exc}"
            ) from exc
        if not isinstance(content, str):
            raise ProviderUnreachable("provider returned non-string message content")
        return content

    def close(self) -> None:
        self._close()


class ScriptedMock:
    """Deterministic gateway replaying canned responses.

    Rules are (matcher, response) pairs tried in order; the first matcher
    contained in the request's user prompt wins.  With no match the default
    response is returned, or MockUnmatched raised when none is set.
    """

    def __init__(
        self,
        rules: list[tuple[str, str]] | None = None,
        default_response: str | None = None,
    ):
        self.rules = list(rules or [])
        self.default_response = default_response
        self.call_count = 0

    def complete(self, request: CompletionRequest) -> str:
        self.call_count += 1
        for matcher, response in self.rules:
            if matcher in request.user_prompt:
                return response
        if self.default_response is not None:
            return self.default_response
        excerpt = request.user_prompt[:80]
        raise MockUnmatched(f"no scripted rule matches prompt: {excerpt!r}")

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ScriptedMock":
        """Load rules from JSON: {"rules": [[matcher, response], ...], "default_response": ...}."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [(str(m), str(r)) for m, r in data.get("rules", [])]
        return cls(rules=rules, default_response=data.get("default_response"))


class CountingGateway:
    """Wrap a gateway and count complete() calls; useful in tests and audits."""

    def __init__(self, inner: ChatGateway):
        self.inner = inner
        self.calls: list[CompletionRequest] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, request: CompletionRequest) -> str:
        self.calls.append(request)
        return self.inner.complete(request)


_FENCE = re.compile(r"^```[^\n]*\n(.*?)\n?```\s*$", re.DOTALL)


def strip_code_fences(text: str) -> str:
    """Peel one surrounding markdown code fence off a model reply, if present."""
    s = text.strip()
    m = _FENCE.match(s)
    if m:
        return m.group(1).strip()
    return s
