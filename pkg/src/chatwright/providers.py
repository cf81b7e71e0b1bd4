"""Chat-completion providers: live API, recorded replay, deterministic mock.

All providers share one interface: ``complete(request, progress)`` returns
the response text, emitting at least one progress update (with strictly
increasing ordinals) before it returns.  A process-wide in-flight limit
(default 4) serializes excess concurrent calls.

Requests are fingerprinted for the cassette: SHA-256 over a canonical JSON
encoding of (purpose, system prompt, messages, temperature) with trailing
whitespace stripped per line.  ``max_tokens`` is deliberately excluded so
output-length tuning never invalidates recordings.

Cassette file format (append-oriented, UTF-8):

    <fingerprint-hex> <payload-bytes>\\n
    <response payload>\\n

The payload length prefix lets responses span lines; when a fingerprint is
recorded twice, the later entry wins.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Protocol, Sequence


class Purpose(Enum):
    DEV_UPDATE = "DEV_UPDATE"
    CONSISTENCY = "CONSISTENCY"
    TEST_REPLY = "TEST_REPLY"
    SUMMARY = "SUMMARY"


DEFAULT_TEMPERATURE = 0.3


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = 1024
    purpose_tag: Purpose = Purpose.DEV_UPDATE

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 1]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class ProgressUpdate:
    request_id: str
    stage: str
    ordinal: int


@dataclass(frozen=True)
class Transcript:
    fingerprint: str
    response_text: str


ProgressSink = Callable[[ProgressUpdate], None]


class ProviderError(Exception):
    """Base class for provider failures."""


class ProviderAuthError(ProviderError):
    pass


class ProviderRateLimitError(ProviderError):
    pass


class ProviderTimeoutError(ProviderError):
    pass


class CassetteMissError(ProviderError):
    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        super().__init__(f"no recorded response for fingerprint {fingerprint}")


def _normalize(text: str) -> str:
    return "\n".join(line.rstrip() for line in text.split("\n"))


def fingerprint(req: CompletionRequest) -> str:
    payload = json.dumps(
        {
            "messages": [[role, _normalize(text)] for role, text in req.messages],
            "purpose": req.purpose_tag.value,
            "system": _normalize(req.system_prompt),
            "temperature": req.temperature,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Cassettes
# ---------------------------------------------------------------------------

def record(cassette_path: str | Path, req: CompletionRequest,
           response_text: str) -> Transcript:
    """Append one fingerprinted response to a cassette file."""
    transcript = Transcript(fingerprint(req), response_text)
    payload = response_text.encode("utf-8")
    path = Path(cassette_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "ab") as fh:
        fh.write(f"{transcript.fingerprint} {len(payload)}\n".encode("ascii"))
        fh.write(payload)
        fh.write(b"\n")
    return transcript


def load_cassette(cassette_path: str | Path) -> dict[str, str]:
    """Read a cassette into {fingerprint: response}; later entries win."""
    entries: dict[str, str] = {}
    data = Path(cassette_path).read_bytes()
    pos = 0
    while pos < len(data):
        eol = data.index(b"\n", pos)
        header = data[pos:eol].decode("ascii")
        fp, length = header.split(" ")
        start = eol + 1
        end = start + int(length)
        entries[fp] = data[start:end].decode("utf-8")
        if data[end:end + 1] != b"\n":
            raise ValueError(f"corrupt cassette near byte {end}")
        pos = end + 1
    return entries


def iter_cassette(cassette_path: str | Path) -> list[Transcript]:
    return [Transcript(fp, text)
            for fp, text in load_cassette(cassette_path).items()]


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

class _Emitter:
    def __init__(self, sink: ProgressSink | None):
        self.request_id = uuid.uuid4().hex
        self._sink = sink
        self._ordinal = 0

    def emit(self, stage: str) -> None:
        update = ProgressUpdate(self.request_id, stage, self._ordinal)
        self._ordinal += 1
        if self._sink is not None:
            self._sink(update)


class CompletionProvider:
    """Shared concurrency-limit and progress plumbing for all modes."""

    mode = "base"

    def __init__(self, max_in_flight: int = 4):
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def complete(self, req: CompletionRequest,
                 progress: ProgressSink | None = None) -> str:
        emitter = _Emitter(progress)
        with self._slots:
            emitter.emit(f"{req.purpose_tag.value.lower().replace('_', ' ')} call started")
            text = self._complete(req, emitter)
            emitter.emit("response received")
            return text

    def _complete(self, req: CompletionRequest, emitter: _Emitter) -> str:
        raise NotImplementedError


class MockPolicy(Protocol):
    def __call__(self, req: CompletionRequest) -> str: ...


def echo_policy(req: CompletionRequest) -> str:
    """Respond with the last message's text."""
    return req.messages[-1][1] if req.messages else ""


@dataclass(frozen=True)
class ScriptRule:
    """One table entry: fires when the request matches purpose + substrings.

    ``when_contains`` searches the whole request (system prompt plus every
    message); ``when_last_contains`` searches only the newest message, which
    is what conversation-style requests need once history accumulates.
    """

    respond: str
    purpose: Purpose | None = None
    when_contains: tuple[str, ...] = ()
    when_last_contains: tuple[str, ...] = ()

    def matches(self, req: CompletionRequest) -> bool:
        if self.purpose is not None and req.purpose_tag is not self.purpose:
            return False
        haystack = req.system_prompt + "\n" + "\n".join(t for _, t in req.messages)
        if not all(needle in haystack for needle in self.when_contains):
            return False
        last = req.messages[-1][1] if req.messages else ""
        return all(needle in last for needle in self.when_last_contains)


class ScriptedPolicy:
    """Rule-scripted mock: a lookup table with purpose-aware defaults.

    Unmatched requests fall back per purpose: updates echo the fenced
    representation back unchanged, consistency audits report nothing,
    summaries produce a fixed line, and test replies echo the user.
    """

    def __init__(self, rules: Sequence[ScriptRule] = (),
                 default_summary: str = "Understood."):
        self.rules = tuple(rules)
        self.default_summary = default_summary

    def __call__(self, req: CompletionRequest) -> str:
        for rule in self.rules:
            if rule.matches(req):
                return rule.respond
        from chatwright.promptlib import extract_fenced

        if req.purpose_tag is Purpose.DEV_UPDATE:
            prompt = req.messages[-1][1] if req.messages else ""
            return extract_fenced(prompt)
        if req.purpose_tag is Purpose.CONSISTENCY:
            return "[]"
        if req.purpose_tag is Purpose.SUMMARY:
            return self.default_summary
        return echo_policy(req)

    @staticmethod
    def from_file(path: str | Path) -> "ScriptedPolicy":
        raw = json.loads(Path(path).read_text("utf-8"))
        rules = [
            ScriptRule(
                respond=item["respond"],
                purpose=Purpose(item["purpose"]) if "purpose" in item else None,
                when_contains=tuple(item.get("when_contains", ())),
                when_last_contains=tuple(item.get("when_last_contains", ())),
            )
            for item in raw.get("rules", ())
        ]
        return ScriptedPolicy(rules, raw.get("default_summary", "Understood."))


MOCK_POLICIES: dict[str, Callable[[], MockPolicy]] = {
    "echo": lambda: echo_policy,
    # Table-less scripted policy: every utterance is a no-change update.
    "no-change": ScriptedPolicy,
}


class MockProvider(CompletionProvider):
    mode = "mock"

    def __init__(self, policy: MockPolicy = echo_policy, max_in_flight: int = 4):
        super().__init__(max_in_flight)
        self.policy = policy

    def _complete(self, req: CompletionRequest, emitter: _Emitter) -> str:
        return self.policy(req)


class ReplayProvider(CompletionProvider):
    mode = "replay"

    def __init__(self, cassette_path: str | Path, max_in_flight: int = 4):
        super().__init__(max_in_flight)
        self.cassette_path = Path(cassette_path)
        self._entries = load_cassette(cassette_path)

    def _complete(self, req: CompletionRequest, emitter: _Emitter) -> str:
        fp = fingerprint(req)
        try:
            return self._entries[fp]
        except KeyError:
            raise CassetteMissError(fp) from None


class RecordingProvider(CompletionProvider):
    """Wraps another provider and appends every exchange to a cassette."""

    mode = "recording"

    def __init__(self, inner: CompletionProvider, cassette_path: str | Path):
        super().__init__()
        self.inner = inner
        self.cassette_path = Path(cassette_path)

    def complete(self, req: CompletionRequest,
                 progress: ProgressSink | None = None) -> str:
        text = self.inner.complete(req, progress)
        record(self.cassette_path, req, text)
        return text


RETRY_SLEEPS = (0.5, 1.0, 2.0)
MAX_ATTEMPTS = 3


class LiveProvider(CompletionProvider):
    """OpenAI-style chat-completions backend over HTTP.

    Transient failures (timeouts, 429, 5xx) are retried with the capped
    backoff schedule; auth failures surface immediately.  The API key is
    read from the environment and never logged or echoed in errors.
    """

    mode = "live"

    def __init__(self, base_url: str, api_key: str, model: str = "gpt-4",
                 max_in_flight: int = 4, transport=None, timeout: float = 60.0,
                 sleeper: Callable[[float], None] = time.sleep):
        super().__init__(max_in_flight)
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model = model
        self._sleep = sleeper
        self._client = httpx.Client(
            transport=transport,
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}"},
        )

    def _complete(self, req: CompletionRequest, emitter: _Emitter) -> str:
        import httpx

        body = {
            "model": self.model,
            "messages": [{"role": "system", "content": req.system_prompt}]
            + [{"role": role, "content": text} for role, text in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        last_error: ProviderError | None = None
        for attempt in range(MAX_ATTEMPTS):
            if attempt:
                self._sleep(RETRY_SLEEPS[attempt - 1])
                emitter.emit(f"retrying (attempt {attempt + 1})")
            try:
                response = self._client.post(
                    f"{self.base_url}/chat/completions", json=body)
            except httpx.TimeoutException:
                last_error = ProviderTimeoutError("request timed out")
                continue
            except httpx.HTTPError as exc:
                last_error = ProviderError(f"transport failure: {type(exc).__name__}")
                continue
            if response.status_code in (401, 403):
                raise ProviderAuthError("authentication rejected")
            if response.status_code == 429:
                last_error = ProviderRateLimitError("rate limited")
                continue
            if response.status_code >= 500:
                last_error = ProviderError(f"server error {response.status_code}")
                continue
            if response.status_code != 200:
                raise ProviderError(f"unexpected status {response.status_code}")
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        assert last_error is not None
        raise last_error
