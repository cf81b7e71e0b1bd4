"""Project service: the one façade the HTTP API and the CLI both drive.

Owns project records, template instantiation, attachment ingestion, event
logging and analytics scopes, and delegates representation work to the
dev-bot engine, execution to the session manager, and history to the
version store.  Everything lives under one data directory and survives
process restarts.
"""

from __future__ import annotations

import json
import re
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from chatwright.events import EventKind, EventLog, UsageStats, compute_stats
from chatwright.pipeline import DevBotEngine, DevResponse, UtteranceRejected
from chatwright.promptlib import PromptLibrary
from chatwright.providers import CompletionProvider, ProgressSink
from chatwright.representation import (
    ComponentId,
    DirectEdit,
    Representation,
    serialize,
)
from chatwright.runtime import SessionManager, TestSession
from chatwright.templates import Template, get_template, list_templates
from chatwright.versions import (
    Provenance,
    ProvenanceKind,
    UnknownProject,
    VersionInfo,
    VersionStore,
)

DEFAULT_ATTACHMENT_LIMIT = 1_000_000  # bytes

_HEADING_RE = re.compile(r"(#{1,6})\s+(.+)")


@dataclass(frozen=True)
class Project:
    id: str
    name: str
    description: str
    template: str
    owner: str
    created_at: float


class DuplicateProjectName(ValueError):
    pass


class AttachmentRejected(ValueError):
    pass


def chunk_document(text: str, filename: str) -> list[tuple[str, str]]:
    """Split an attached document into KB sections.

    One section per markdown-style heading; text before the first heading
    (or a document with no headings at all) becomes a single section named
    after the file.  Blank lines inside a section body are dropped so the
    result stays representable in the canonical KB grammar.
    """
    fallback_key = _sanitize_key(Path(filename).stem) or "Attachment"
    sections: list[tuple[str, list[str]]] = []
    current_key = fallback_key
    current_body: list[str] = []

    def push():
        if current_body or sections:
            sections.append((current_key, current_body))

    for raw in text.split("\n"):
        line = raw.rstrip()
        m = _HEADING_RE.fullmatch(line)
        if m:
            push()
            current_key = _sanitize_key(m.group(2)) or fallback_key
            current_body = []
        elif line.strip():
            if line in ("[KB]", "[Logic]", "[Variables]"):
                line = " " + line
            current_body.append(line)
    push()

    out: list[tuple[str, str]] = []
    seen: dict[str, int] = {}
    for key, body in sections:
        if not body:
            continue
        count = seen.get(key, 0) + 1
        seen[key] = count
        if count > 1:
            key = f"{key} ({count})"
        out.append((key, "\n".join(body)))
    return out


def _sanitize_key(title: str) -> str:
    return " ".join(title.replace(":", " ").split())


class Workbench:
    def __init__(self, data_dir: str | Path, provider: CompletionProvider,
                 attachment_limit: int = DEFAULT_ATTACHMENT_LIMIT):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.provider = provider
        self.attachment_limit = attachment_limit

        self.store = VersionStore(self.data_dir)
        self.events = EventLog(self.data_dir)
        self.prompts = PromptLibrary()
        self.engine = DevBotEngine(self.store, provider, self.prompts,
                                   self._template_of)
        self.sessions = SessionManager(self.store, provider, self.prompts)
        self._projects: dict[str, Project] = {}
        self._load_projects()

    # -- projects ------------------------------------------------------------

    def _project_file(self, project_id: str) -> Path:
        return self.data_dir / "projects" / project_id / "project.json"

    def _load_projects(self) -> None:
        projects_dir = self.data_dir / "projects"
        if not projects_dir.exists():
            return
        for path in sorted(projects_dir.glob("*/project.json")):
            raw = json.loads(path.read_text("utf-8"))
            project = Project(**raw)
            self._projects[project.id] = project

    def _template_of(self, project_id: str) -> Template:
        return get_template(self.get_project(project_id).template)

    def create_project(self, owner: str, template_name: str, name: str,
                       description: str = "") -> Project:
        template = get_template(template_name)
        if any(p.owner == owner and p.name == name
               for p in self._projects.values()):
            raise DuplicateProjectName(f"{owner} already has a project {name!r}")
        project = Project(
            id=uuid.uuid4().hex[:12],
            name=name,
            description=description,
            template=template.name,
            owner=owner,
            created_at=time.time(),
        )
        self.store.init_project(project.id)
        self._project_file(project.id).write_text(
            json.dumps(project.__dict__, ensure_ascii=False, indent=2), "utf-8")
        self.store.commit(project.id, template.initial_representation,
                          Provenance(ProvenanceKind.TEMPLATE_INIT))
        self._projects[project.id] = project
        return project

    def get_project(self, project_id: str) -> Project:
        try:
            return self._projects[project_id]
        except KeyError:
            raise UnknownProject(project_id) from None

    def find_project(self, ref: str) -> Project:
        """Look a project up by id, falling back to its name."""
        if ref in self._projects:
            return self._projects[ref]
        matches = [p for p in self._projects.values() if p.name == ref]
        if not matches:
            raise UnknownProject(ref)
        return matches[0]

    def list_projects(self, owner: str | None = None) -> list[Project]:
        projects = [p for p in self._projects.values()
                    if owner is None or p.owner == owner]
        return sorted(projects, key=lambda p: p.created_at)

    def templates(self) -> list[Template]:
        return list_templates()

    # -- representation mutations ----------------------------------------------

    def utter(self, project_id: str, text: str,
              progress: ProgressSink | None = None) -> DevResponse:
        project = self.get_project(project_id)
        if not text.strip():
            raise UtteranceRejected("utterance is empty")
        event = self.events.append(project_id, EventKind.DEV_MSG, text,
                                   user=project.owner)
        return self.engine.handle_utterance(
            project_id, text, event_id=event.event_id, progress=progress)

    def direct_edit(self, project_id: str, component: ComponentId, text: str,
                    progress: ProgressSink | None = None) -> DevResponse:
        project = self.get_project(project_id)
        event = self.events.append(
            project_id, EventKind.REP_EDIT, f"{component.value}\n{text}",
            user=project.owner)
        return self.engine.propagate_edit(
            project_id, DirectEdit(component, text),
            event_id=event.event_id, progress=progress)

    def attach_document(self, project_id: str, data: bytes, filename: str,
                        progress: ProgressSink | None = None) -> DevResponse:
        project = self.get_project(project_id)
        if len(data) > self.attachment_limit:
            raise AttachmentRejected(
                f"attachment exceeds {self.attachment_limit} bytes")
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            raise AttachmentRejected("attachment is not UTF-8 text") from None
        sections = chunk_document(text, filename)
        if not sections:
            raise AttachmentRejected("attachment has no text content")
        event = self.events.append(
            project_id, EventKind.REP_EDIT, f"attachment {filename}",
            user=project.owner)
        return self.engine.attach_sections(
            project_id, sections, event_id=event.event_id, progress=progress)

    # -- versions ---------------------------------------------------------------

    def versions(self, project_id: str) -> list[VersionInfo]:
        return self.store.list(project_id)

    def checkout(self, project_id: str, index: int) -> Representation:
        project = self.get_project(project_id)
        rep = self.store.checkout(project_id, index)
        self.events.append(project_id, EventKind.VERSION_SELECT, str(index),
                           user=project.owner)
        return rep

    def representation(self, project_id: str) -> tuple[int, Representation, dict]:
        self.get_project(project_id)
        head = self.store.head(project_id)
        rep = self.store.snapshot(project_id, head)
        texts = {c.value: t for c, t in serialize(rep).items()}
        return head, rep, texts

    # -- test sessions ------------------------------------------------------------

    def start_session(self, project_id: str,
                      version_index: int | None = None) -> TestSession:
        self.get_project(project_id)
        return self.sessions.start(project_id, version_index)

    def send_test_message(self, session_id: str, text: str,
                          progress: ProgressSink | None = None) -> str:
        session = self.sessions.get(session_id)
        project = self.get_project(session.project_id)
        self.events.append(session.project_id, EventKind.TEST_MSG, text,
                           user=project.owner)
        return self.sessions.handle_message(session_id, text, progress)

    def restart_session(self, session_id: str) -> TestSession:
        session = self.sessions.get(session_id)
        project = self.get_project(session.project_id)
        self.events.append(session.project_id, EventKind.RESTART, "",
                           user=project.owner)
        return self.sessions.restart(session_id)

    # -- events & analytics ----------------------------------------------------

    def log_event(self, project_id: str, kind: EventKind, payload: str,
                  user: str | None = None):
        project = self.get_project(project_id)
        return self.events.append(project_id, kind, payload,
                                  user=user or project.owner)

    def stats(self, scope: str = "global") -> UsageStats:
        """Usage statistics for ``global``, ``project:<id>`` or ``user:<owner>``."""
        if scope == "global":
            ids = [p.id for p in self._projects.values()]
        elif scope.startswith("project:"):
            ids = [self.find_project(scope.split(":", 1)[1]).id]
        elif scope.startswith("user:"):
            owner = scope.split(":", 1)[1]
            ids = [p.id for p in self._projects.values() if p.owner == owner]
        else:
            raise ValueError(f"bad scope {scope!r}")
        return compute_stats({pid: self.events.events(pid) for pid in ids}, scope)
