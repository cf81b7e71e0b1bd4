"""Test-bot runtime: executes one representation version as a live chatbot.

A session binds to one immutable version for its whole life; newer commits
never hot-swap a running conversation.  Variable state is threaded through
the provider as a structured trailer on every reply:

    STATE:
    name=value
    ...

The trailer starts at the last line that is exactly ``STATE:`` and runs to
the end of the reply.  It is stripped before the reply is shown.  A trailer
that fails to parse, or that names an unknown variable, leaves the state
untouched (the reply is still delivered and a warning is logged).  The
variable key set therefore never changes during a session.
"""

from __future__ import annotations

import logging
import re
import threading
import time
import uuid
from dataclasses import dataclass, field

from chatwright.promptlib import PromptLibrary
from chatwright.providers import (
    CompletionProvider,
    CompletionRequest,
    ProgressSink,
    Purpose,
)
from chatwright.representation import serialize_document
from chatwright.versions import VersionStore

logger = logging.getLogger("chatwright.runtime")

_STATE_LINE_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)=(.*)\Z")


class UnknownSession(KeyError):
    pass


class SessionClosed(RuntimeError):
    pass


@dataclass
class TestSession:
    session_id: str
    project_id: str
    version_index: int
    history: list[tuple[str, str]] = field(default_factory=list)
    variable_state: dict[str, str] = field(default_factory=dict)
    started_at: float = field(default_factory=time.time)
    closed: bool = False


def parse_state_trailer(text: str) -> tuple[str, dict[str, str] | None, bool]:
    """Split a provider reply into (display_text, state or None, malformed)."""
    lines = text.split("\n")
    marker = None
    for i, line in enumerate(lines):
        if line.rstrip() == "STATE:":
            marker = i
    if marker is None:
        return text.rstrip(), None, False

    display = "\n".join(lines[:marker]).rstrip()
    state: dict[str, str] = {}
    for line in lines[marker + 1:]:
        line = line.rstrip()
        if not line:
            continue
        m = _STATE_LINE_RE.match(line)
        if not m:
            return display, None, True
        state[m.group(1)] = m.group(2)
    return display, state, False


class SessionManager:
    def __init__(self, store: VersionStore, provider: CompletionProvider,
                 prompts: PromptLibrary, history_window: int | None = None):
        self.store = store
        self.provider = provider
        self.prompts = prompts
        # None sends the full history; an integer keeps only the most
        # recent turns when the conversation outgrows the context budget.
        self.history_window = history_window
        self._sessions: dict[str, TestSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()

    def _get(self, session_id: str) -> TestSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry:
            return self._locks.setdefault(session_id, threading.Lock())

    def start(self, project_id: str, version_index: int | None = None) -> TestSession:
        if version_index is None:
            version_index = self.store.head(project_id)
        rep = self.store.snapshot(project_id, version_index)
        session = TestSession(
            session_id=uuid.uuid4().hex,
            project_id=project_id,
            version_index=version_index,
            variable_state={v.name: v.initial_value for v in rep.variables},
        )
        with self._registry:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> TestSession:
        return self._get(session_id)

    def handle_message(self, session_id: str, user_text: str,
                       progress: ProgressSink | None = None) -> str:
        with self._lock(session_id):
            session = self._get(session_id)
            if session.closed:
                raise SessionClosed(session_id)

            rep = self.store.snapshot(session.project_id, session.version_index)
            state_text = "\n".join(
                f"{name}={value}"
                for name, value in session.variable_state.items()) or "(none)"
            system = self.prompts.render(
                "test_reply",
                representation=serialize_document(rep), state=state_text)
            window = session.history
            if self.history_window is not None:
                window = window[-self.history_window:]
            req = CompletionRequest(
                system_prompt=system,
                messages=tuple(window) + (("user", user_text),),
                purpose_tag=Purpose.TEST_REPLY)

            # Provider errors propagate before any session mutation.
            reply = self.provider.complete(req, progress)

            display, new_state, malformed = parse_state_trailer(reply)
            if malformed:
                logger.warning("session %s: malformed STATE trailer ignored",
                               session.session_id)
            elif new_state is not None:
                unknown = set(new_state) - set(session.variable_state)
                if unknown:
                    logger.warning(
                        "session %s: STATE trailer names unknown variables %s; ignored",
                        session.session_id, sorted(unknown))
                else:
                    session.variable_state.update(new_state)
            session.history.append(("user", user_text))
            session.history.append(("bot", display))
            return display

    def restart(self, session_id: str) -> TestSession:
        """Close the session and open a clean one on the same version."""
        with self._lock(session_id):
            old = self._get(session_id)
            old.closed = True
        return self.start(old.project_id, old.version_index)
