"""Model backends: a live chat-completion endpoint and deterministic replay.

Requests are always sent in the user role with temperature 0. Models that
expect the role inside the prompt (Solar-style) get the prompt wrapped
before sending. Every request/response pair lands in a JSON Lines run log
keyed by a portable fingerprint; a finished log doubles as a replay store,
so a recorded run can be re-executed byte-identically with no network.

Fingerprint: SHA-256 over UTF-8 prompt, model id and wrapper tag, joined
with NUL bytes — stores are portable across implementations.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests

from .errors import IoError, ReplayMiss, TransportError

WRAPPER_NONE = "none"
WRAPPER_SOLAR = "solar"

API_KEY_ENV = "LAYOUTPROMPT_API_KEY"
API_BASE_ENV = "LAYOUTPROMPT_API_BASE"


@dataclass(frozen=True)
class LlmRequest:
    """One prompt for one model. Role and temperature are fixed by design."""

    prompt: str
    model_id: str
    json_mode: bool = False
    wrapper: str = WRAPPER_NONE
    role: str = field(default="user", init=False)
    temperature: float = field(default=0.0, init=False)

    def __post_init__(self) -> None:
        if self.wrapper not in (WRAPPER_NONE, WRAPPER_SOLAR):
            raise ValueError(f"unknown wrapper {self.wrapper!r}")


def wrap_solar(prompt: str) -> str:
    """Embed the user role in the prompt the way Solar expects."""
    return f"### User:{prompt}\n\n\n### Assistant:"


def wire_prompt(req: LlmRequest) -> str:
    """The prompt text actually sent, after any wrapper."""
    return wrap_solar(req.prompt) if req.wrapper == WRAPPER_SOLAR else req.prompt


def fingerprint(prompt: str, model_id: str, wrapper: str = WRAPPER_NONE) -> str:
    digest = hashlib.sha256(
        prompt.encode("utf-8")
        + b"\x00"
        + model_id.encode("utf-8")
        + b"\x00"
        + wrapper.encode("utf-8")
    )
    return digest.hexdigest()


def request_fingerprint(req: LlmRequest) -> str:
    return fingerprint(req.prompt, req.model_id, req.wrapper)


class ReplayStore:
    """Exact fingerprint -> recorded response lookups; misses are errors."""

    def __init__(self, responses: dict[str, str] | None = None) -> None:
        self._responses = dict(responses or {})

    @classmethod
    def load(cls, path: str | Path) -> "ReplayStore":
        responses: dict[str, str] = {}
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoError(f"cannot read replay store {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                responses[record["fingerprint"]] = record["response"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise IoError(f"{path}:{lineno}: corrupted run log line") from exc
        return cls(responses)

    def __len__(self) -> int:
        return len(self._responses)

    def __contains__(self, fp: str) -> bool:
        return fp in self._responses

    def get(self, fp: str) -> str:
        if fp not in self._responses:
            raise ReplayMiss(f"no recorded response for fingerprint {fp}")
        return self._responses[fp]


class ReplayBackend:
    """Serves responses from a ReplayStore; purely deterministic."""

    def __init__(self, store: ReplayStore) -> None:
        self.store = store

    def complete(self, req: LlmRequest) -> str:
        return self.store.get(request_fingerprint(req))


class TokenBucket:
    """Simple requests-per-minute limiter (clock injectable for tests)."""

    def __init__(
        self,
        per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._interval = 60.0 / per_minute if per_minute > 0 else 0.0
        self._clock = clock
        self._sleep = sleep
        self._next_at = 0.0

    def acquire(self) -> None:
        if self._interval == 0.0:
            return
        now = self._clock()
        if now < self._next_at:
            self._sleep(self._next_at - now)
            now = self._next_at
        self._next_at = now + self._interval


class HttpBackend:
    """Chat-completion HTTP transport (OpenAI-style wire contract).

    Credentials come from the environment only. Transient failures
    (connection errors, 429, 5xx) are retried with bounded exponential
    backoff; anything else fails immediately.
    """

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
        max_attempts: int = 3,
        requests_per_minute: float = 0.0,
        session=None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.base_url = (base_url or os.environ.get(API_BASE_ENV, "")).rstrip("/")
        if not self.base_url:
            raise TransportError(f"no endpoint configured (set {API_BASE_ENV})")
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.max_attempts = max_attempts
        self._session = session or requests.Session()
        self._sleep = sleep
        self._bucket = TokenBucket(requests_per_minute, sleep=sleep)

    def payload(self, req: LlmRequest) -> dict:
        body = {
            "model": req.model_id,
            "messages": [{"role": req.role, "content": wire_prompt(req)}],
            "temperature": req.temperature,
        }
        if req.json_mode:
            body["response_format"] = {"type": "json_object"}
        return body

    def complete(self, req: LlmRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        url = f"{self.base_url}/chat/completions"
        delay = 1.0
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt > 0:
                self._sleep(delay)
                delay *= 2
            self._bucket.acquire()
            try:
                response = self._session.post(
                    url, json=self.payload(req), headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport failure: {exc}"
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"HTTP {response.status_code}: {response.text[:500]}"
                )
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed completion response: {exc}") from exc
        raise TransportError(
            f"gave up after {self.max_attempts} attempts; last error: {last_error}"
        )


class RunLog:
    """Append-only JSON Lines record of request/response pairs.

    Responses carry a timestamp for bookkeeping; the log is the only
    artifact where wall-clock time appears. A finished log loads straight
    back as a ReplayStore. Appends are serialized through a lock so
    concurrent workers share one log safely.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()

    def seen_fingerprints(self) -> set[str]:
        if not self.path.exists():
            return set()
        return set(ReplayStore.load(self.path)._responses)

    def append(self, req: LlmRequest, response: str) -> None:
        record = {
            "fingerprint": request_fingerprint(req),
            "model_id": req.model_id,
            "wrapper": req.wrapper,
            "json_mode": req.json_mode,
            "prompt": req.prompt,
            "response": response,
            "timestamp": time.time(),
        }
        try:
            with self._lock, self.path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise IoError(f"cannot append to run log {self.path}: {exc}") from exc


def complete(req: LlmRequest, backend, log: RunLog | None = None) -> str:
    """Run one request through a backend, recording it when a log is given."""
    response = backend.complete(req)
    if log is not None:
        log.append(req, response)
    return response


def record_run(
    requests_: list[LlmRequest], responses: list[str], path: str | Path
) -> Path:
    """Write paired requests/responses as a run log usable for replay."""
    if len(requests_) != len(responses):
        raise ValueError("requests and responses must pair up")
    log = RunLog(path)
    log.path.write_text("", encoding="utf-8")
    for req, response in zip(requests_, responses):
        log.append(req, response)
    return log.path
