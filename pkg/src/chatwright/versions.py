"""Append-only version history for project representations.

Every mutation of a project's representation lands here as an immutable,
contiguously indexed snapshot with provenance.  Selecting an old version
never rewrites history: it only moves the project's head, and the next
commit appends the forked state as a brand-new latest version.

On disk (one directory per project, everything survives restarts):

    <root>/projects/<project_id>/
        versions/v00000.rep     snapshot in canonical document form
        versions.idx            one line per version:
                                "<index>\\t<kind>\\t<event_id|->\\t<unix_ts>"
        HEAD                    index the project is currently pointed at

Reads go against an in-memory index; snapshots are loaded per request.
Commits take a per-project lock, reads are lock-free.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from chatwright.representation import (
    Representation,
    parse_document,
    require_valid,
    serialize_document,
)


class ProvenanceKind(Enum):
    TEMPLATE_INIT = "TEMPLATE_INIT"
    DEV_UTTERANCE = "DEV_UTTERANCE"
    DIRECT_EDIT = "DIRECT_EDIT"
    ATTACHMENT = "ATTACHMENT"


@dataclass(frozen=True)
class Provenance:
    kind: ProvenanceKind
    event_id: str | None = None


@dataclass(frozen=True)
class VersionInfo:
    index: int
    provenance: Provenance
    created_at: float


@dataclass(frozen=True)
class Version:
    index: int
    snapshot: Representation
    provenance: Provenance
    created_at: float


class UnknownProject(KeyError):
    pass


class UnknownVersion(KeyError):
    pass


class VersionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._index: dict[str, list[VersionInfo]] = {}
        self._heads: dict[str, int] = {}

    # -- layout ------------------------------------------------------------

    def _project_dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def _version_path(self, project_id: str, index: int) -> Path:
        return self._project_dir(project_id) / "versions" / f"v{index:05d}.rep"

    def _lock_for(self, project_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(project_id, threading.Lock())

    def _load(self, project_id: str) -> list[VersionInfo]:
        cached = self._index.get(project_id)
        if cached is not None:
            return cached
        idx_path = self._project_dir(project_id) / "versions.idx"
        if not idx_path.exists():
            raise UnknownProject(project_id)
        infos: list[VersionInfo] = []
        for line in idx_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            index, kind, event_id, ts = line.split("\t")
            infos.append(VersionInfo(
                index=int(index),
                provenance=Provenance(ProvenanceKind(kind),
                                      None if event_id == "-" else event_id),
                created_at=float(ts),
            ))
        head_path = self._project_dir(project_id) / "HEAD"
        head = int(head_path.read_text("utf-8")) if head_path.exists() else len(infos) - 1
        self._index[project_id] = infos
        self._heads[project_id] = head
        return infos

    def _write_head(self, project_id: str, index: int) -> None:
        (self._project_dir(project_id) / "HEAD").write_text(str(index), "utf-8")
        self._heads[project_id] = index

    # -- operations ----------------------------------------------------------

    def init_project(self, project_id: str) -> None:
        (self._project_dir(project_id) / "versions").mkdir(parents=True, exist_ok=True)
        idx = self._project_dir(project_id) / "versions.idx"
        if not idx.exists():
            idx.write_text("", "utf-8")
        self._index[project_id] = []

    def has_project(self, project_id: str) -> bool:
        try:
            self._load(project_id)
            return True
        except UnknownProject:
            return False

    def commit(self, project_id: str, rep: Representation,
               provenance: Provenance) -> Version:
        require_valid(rep)
        with self._lock_for(project_id):
            infos = self._load(project_id)
            index = len(infos)
            created_at = time.time()
            self._version_path(project_id, index).write_text(
                serialize_document(rep), "utf-8")
            event_id = provenance.event_id or "-"
            line = f"{index}\t{provenance.kind.value}\t{event_id}\t{created_at}\n"
            with open(self._project_dir(project_id) / "versions.idx", "a",
                      encoding="utf-8") as fh:
                fh.write(line)
            infos.append(VersionInfo(index, provenance, created_at))
            self._write_head(project_id, index)
        return Version(index, rep, provenance, created_at)

    def snapshot(self, project_id: str, index: int) -> Representation:
        """Load one version's representation; does not move the head."""
        infos = self._load(project_id)
        if not 0 <= index < len(infos):
            raise UnknownVersion(f"{project_id}@{index}")
        return parse_document(
            self._version_path(project_id, index).read_text("utf-8"))

    def checkout(self, project_id: str, index: int) -> Representation:
        """Point the project at an older version and return its content.

        History is untouched; the next commit forks from here as a new
        latest version.
        """
        rep = self.snapshot(project_id, index)
        with self._lock_for(project_id):
            self._write_head(project_id, index)
        return rep

    def head(self, project_id: str) -> int:
        self._load(project_id)
        return self._heads[project_id]

    def current(self, project_id: str) -> Representation:
        return self.snapshot(project_id, self.head(project_id))

    def list(self, project_id: str) -> list[VersionInfo]:
        return list(self._load(project_id))

    def latest_index(self, project_id: str) -> int:
        return len(self._load(project_id)) - 1
