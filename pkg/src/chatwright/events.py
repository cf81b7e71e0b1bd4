"""Interaction event log and the usage statistics computed over it.

Every user-visible interaction lands here as one line-delimited JSON record
per event, one log file per project (``projects/<id>/events.log``).  The
log is the source of truth for analytics; note that it can only contain
what clients report - looking at a pane without clicking leaves no trace.

Events are totally ordered per project by (timestamp, event id); ids are
contiguous integers assigned at append time and stable across restarts.
"""

from __future__ import annotations

import json
import statistics
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class EventKind(Enum):
    DEV_MSG = "DEV_MSG"
    DEV_RESP = "DEV_RESP"
    TEST_MSG = "TEST_MSG"
    TEST_RESP = "TEST_RESP"
    REP_EDIT = "REP_EDIT"
    REP_CLICK = "REP_CLICK"
    RESTART = "RESTART"
    VERSION_SELECT = "VERSION_SELECT"


# Kinds that participate in consecutive-interaction pair counts.
PAIR_KINDS = (EventKind.DEV_MSG, EventKind.REP_CLICK, EventKind.TEST_MSG)


@dataclass(frozen=True)
class SessionEvent:
    event_id: str
    project_id: str
    kind: EventKind
    payload: str
    word_count: int
    timestamp: float
    user: str = "dev"


class UnknownProject(KeyError):
    pass


class EventLog:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._next_ids: dict[str, int] = {}

    def _path(self, project_id: str) -> Path:
        return self.root / "projects" / project_id / "events.log"

    def _ensure_known(self, project_id: str) -> Path:
        path = self._path(project_id)
        if not path.parent.exists():
            raise UnknownProject(project_id)
        return path

    def append(self, project_id: str, kind: EventKind, payload: str,
               user: str = "dev", timestamp: float | None = None) -> SessionEvent:
        path = self._ensure_known(project_id)
        with self._lock:
            if project_id not in self._next_ids:
                self._next_ids[project_id] = (
                    sum(1 for _ in open(path, encoding="utf-8"))
                    if path.exists() else 0)
            seq = self._next_ids[project_id]
            self._next_ids[project_id] = seq + 1
            event = SessionEvent(
                event_id=f"{seq:08d}",
                project_id=project_id,
                kind=kind,
                payload=payload,
                word_count=len(payload.split()),
                timestamp=timestamp if timestamp is not None else time.time(),
                user=user,
            )
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "id": event.event_id,
                    "kind": kind.value,
                    "payload": payload,
                    "words": event.word_count,
                    "ts": event.timestamp,
                    "user": user,
                }, ensure_ascii=False) + "\n")
        return event

    def events(self, project_id: str, kinds: set[EventKind] | None = None,
               start: float | None = None, end: float | None = None,
               ) -> list[SessionEvent]:
        """Events in append order, optionally filtered by kind and time range."""
        path = self._ensure_known(project_id)
        out: list[SessionEvent] = []
        if not path.exists():
            return out
        for line in open(path, encoding="utf-8"):
            if not line.strip():
                continue
            raw = json.loads(line)
            event = SessionEvent(
                event_id=raw["id"], project_id=project_id,
                kind=EventKind(raw["kind"]), payload=raw["payload"],
                word_count=raw["words"], timestamp=raw["ts"],
                user=raw.get("user", "dev"))
            if kinds is not None and event.kind not in kinds:
                continue
            if start is not None and event.timestamp < start:
                continue
            if end is not None and event.timestamp > end:
                continue
            out.append(event)
        return out

    def project_ids(self) -> list[str]:
        projects_dir = self.root / "projects"
        if not projects_dir.exists():
            return []
        return sorted(p.name for p in projects_dir.iterdir() if p.is_dir())


@dataclass(frozen=True)
class UsageStats:
    """Descriptive statistics over a scope of the event log.

    ``word_mean``/``word_sd`` carry entries only for kinds that actually
    occurred (population statistics); absent is absent, never zero.
    """

    scope: str
    message_counts: dict[str, int]
    word_mean: dict[str, float]
    word_sd: dict[str, float]
    direct_edit_count: int
    tab_click_count: int
    pair_counts: dict[str, int]


def compute_stats(events_by_project: dict[str, list[SessionEvent]],
                  scope: str) -> UsageStats:
    message_counts = {kind.value: 0 for kind in EventKind}
    words: dict[str, list[int]] = {kind.value: [] for kind in EventKind}
    pair_counts = {f"{a.value}->{b.value}": 0
                   for a in PAIR_KINDS for b in PAIR_KINDS}

    for events in events_by_project.values():
        for event in events:
            message_counts[event.kind.value] += 1
            words[event.kind.value].append(event.word_count)
        # Consecutive-pair counts run over each project's own event order,
        # restricted to the dev-message / tab-click / test-message stream.
        stream = [e.kind for e in events if e.kind in PAIR_KINDS]
        for a, b in zip(stream, stream[1:]):
            pair_counts[f"{a.value}->{b.value}"] += 1

    word_mean = {}
    word_sd = {}
    for kind, counts in words.items():
        if counts:
            word_mean[kind] = statistics.fmean(counts)
            word_sd[kind] = statistics.pstdev(counts)

    return UsageStats(
        scope=scope,
        message_counts=message_counts,
        word_mean=word_mean,
        word_sd=word_sd,
        direct_edit_count=message_counts[EventKind.REP_EDIT.value],
        tab_click_count=message_counts[EventKind.REP_CLICK.value],
        pair_counts=pair_counts,
    )
