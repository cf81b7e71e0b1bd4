"""HTTP API over the workbench.

All bodies are JSON (schemas in docs/api.md).  The two long-running
endpoints - dev utterances and test messages - stream progress as
server-sent events (``event: progress`` items followed by one
``event: result`` or ``event: error``).  Provider credentials never appear
in error responses.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import asdict

from fastapi import Depends, FastAPI, Header, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from chatwright.diffing import delta_to_json
from chatwright.events import EventKind
from chatwright.pipeline import (
    DevResponse,
    EditRejected,
    PipelineError,
    UtteranceRejected,
)
from chatwright.providers import ProgressUpdate
from chatwright.representation import (
    GRAMMAR,
    ComponentId,
    ParseError,
    ValidationFailure,
)
from chatwright.runtime import SessionClosed, TestSession, UnknownSession
from chatwright.service import (
    AttachmentRejected,
    DuplicateProjectName,
    Project,
    Workbench,
)
from chatwright.templates import UnknownTemplate
from chatwright.versions import UnknownProject, UnknownVersion


class CreateProjectBody(BaseModel):
    template: str
    name: str
    description: str = ""
    owner: str = "dev"


class TextBody(BaseModel):
    text: str


class SessionBody(BaseModel):
    version_index: int | None = None


class EventBody(BaseModel):
    project_id: str
    kind: str
    payload: str = ""


def _project_json(p: Project) -> dict:
    return asdict(p)


def _session_json(s: TestSession) -> dict:
    return {
        "session_id": s.session_id,
        "project_id": s.project_id,
        "version_index": s.version_index,
        "history": [list(turn) for turn in s.history],
        "variable_state": dict(s.variable_state),
        "started_at": s.started_at,
    }


def _dev_response_json(r: DevResponse) -> dict:
    return {
        "comprehension": r.comprehension,
        "change_summary": r.change_summary,
        "new_version_index": r.new_version_index,
        "delta": delta_to_json(r.delta),
        "findings": [
            {
                "kind": f.kind.value,
                "resolution": f.resolution.value,
                "rule_ordinals": list(f.rule_ordinals),
                "explanation": f.explanation,
                "rewrites": {str(o): t for o, t in f.rewrites},
            }
            for f in r.findings
        ],
    }


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, (UnknownProject, UnknownVersion, UnknownTemplate,
                        UnknownSession)):
        return HTTPException(404, f"not found: {exc}")
    if isinstance(exc, (ParseError, ValidationFailure, EditRejected)):
        return HTTPException(422, str(exc))
    if isinstance(exc, (UtteranceRejected, DuplicateProjectName, ValueError)):
        return HTTPException(400, str(exc))
    if isinstance(exc, AttachmentRejected):
        return HTTPException(413, str(exc))
    if isinstance(exc, SessionClosed):
        return HTTPException(409, f"session closed: {exc}")
    if isinstance(exc, PipelineError):
        return HTTPException(502, str(exc))
    return HTTPException(500, "internal error")


def _sse(work) -> StreamingResponse:
    """Run ``work(progress_sink)`` in a thread, streaming progress then result."""
    items: queue.Queue = queue.Queue()

    def sink(update: ProgressUpdate) -> None:
        items.put(("progress", {
            "request_id": update.request_id,
            "stage": update.stage,
            "ordinal": update.ordinal,
        }))

    def run() -> None:
        try:
            items.put(("result", work(sink)))
        except Exception as exc:  # noqa: BLE001 - converted to an SSE error event
            err = _http_error(exc)
            items.put(("error", {"detail": err.detail, "status": err.status_code}))
        finally:
            items.put(None)

    threading.Thread(target=run, daemon=True).start()

    def generate():
        while True:
            item = items.get()
            if item is None:
                break
            event, payload = item
            yield f"event: {event}\ndata: {json.dumps(payload)}\n\n"

    return StreamingResponse(generate(), media_type="text/event-stream")


def create_app(workbench: Workbench, auth_token: str | None = None) -> FastAPI:
    app = FastAPI(title="chatwright", version="0.1.0")

    def require_auth(authorization: str | None = Header(default=None)) -> None:
        if auth_token and authorization != f"Bearer {auth_token}":
            raise HTTPException(401, "missing or invalid token")

    guard = [Depends(require_auth)]

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):  # noqa: ARG001
        err = _http_error(exc)
        return JSONResponse({"detail": err.detail}, status_code=err.status_code)

    @app.get("/templates", dependencies=guard)
    def templates():
        return [
            {"name": t.name, "description": t.description}
            for t in workbench.templates()
        ]

    @app.get("/grammar", dependencies=guard)
    def grammar():
        return GRAMMAR

    @app.post("/projects", dependencies=guard, status_code=201)
    def create_project(body: CreateProjectBody):
        try:
            project = workbench.create_project(
                body.owner, body.template, body.name, body.description)
        except (UnknownTemplate, DuplicateProjectName) as exc:
            raise _http_error(exc) from exc
        return _project_json(project)

    @app.get("/projects", dependencies=guard)
    def list_projects(owner: str | None = None):
        return [_project_json(p) for p in workbench.list_projects(owner)]

    @app.get("/projects/{project_id}", dependencies=guard)
    def get_project(project_id: str):
        try:
            return _project_json(workbench.get_project(project_id))
        except UnknownProject as exc:
            raise _http_error(exc) from exc

    @app.get("/projects/{project_id}/representation", dependencies=guard)
    def representation(project_id: str):
        try:
            head, _, texts = workbench.representation(project_id)
        except UnknownProject as exc:
            raise _http_error(exc) from exc
        return {"version_index": head, "components": texts}

    @app.post("/projects/{project_id}/utterances", dependencies=guard)
    def utter(project_id: str, body: TextBody):
        workbench.get_project(project_id)  # 404 before the stream starts
        return _sse(lambda sink: _dev_response_json(
            workbench.utter(project_id, body.text, progress=sink)))

    @app.put("/projects/{project_id}/representation/{component}",
             dependencies=guard)
    def direct_edit(project_id: str, component: str, body: TextBody):
        try:
            which = ComponentId(component.upper())
        except ValueError:
            raise HTTPException(404, f"unknown component {component!r}") from None
        try:
            response = workbench.direct_edit(project_id, which, body.text)
        except Exception as exc:
            raise _http_error(exc) from exc
        return _dev_response_json(response)

    @app.post("/projects/{project_id}/attachments", dependencies=guard)
    async def attach(project_id: str, file: UploadFile):
        data = await file.read()
        try:
            response = workbench.attach_document(
                project_id, data, file.filename or "attachment.txt")
        except Exception as exc:
            raise _http_error(exc) from exc
        return _dev_response_json(response)

    @app.get("/projects/{project_id}/versions", dependencies=guard)
    def versions(project_id: str):
        try:
            infos = workbench.versions(project_id)
        except UnknownProject as exc:
            raise _http_error(exc) from exc
        return [
            {
                "index": v.index,
                "provenance": v.provenance.kind.value,
                "event_id": v.provenance.event_id,
                "created_at": v.created_at,
            }
            for v in infos
        ]

    @app.post("/projects/{project_id}/versions/{index}/checkout",
              dependencies=guard)
    def checkout(project_id: str, index: int):
        try:
            workbench.checkout(project_id, index)
            head, _, texts = workbench.representation(project_id)
        except Exception as exc:
            raise _http_error(exc) from exc
        return {"version_index": head, "components": texts}

    @app.post("/projects/{project_id}/sessions", dependencies=guard,
              status_code=201)
    def start_session(project_id: str, body: SessionBody | None = None):
        try:
            session = workbench.start_session(
                project_id, body.version_index if body else None)
        except Exception as exc:
            raise _http_error(exc) from exc
        return _session_json(session)

    @app.get("/sessions/{session_id}", dependencies=guard)
    def get_session(session_id: str):
        try:
            return _session_json(workbench.sessions.get(session_id))
        except UnknownSession as exc:
            raise _http_error(exc) from exc

    @app.post("/sessions/{session_id}/messages", dependencies=guard)
    def send_message(session_id: str, body: TextBody):
        workbench.sessions.get(session_id)  # 404 before the stream starts
        def work(sink):
            reply = workbench.send_test_message(session_id, body.text,
                                                progress=sink)
            session = workbench.sessions.get(session_id)
            return {"reply": reply,
                    "variable_state": dict(session.variable_state)}
        return _sse(work)

    @app.post("/sessions/{session_id}/restart", dependencies=guard,
              status_code=201)
    def restart(session_id: str):
        try:
            session = workbench.restart_session(session_id)
        except Exception as exc:
            raise _http_error(exc) from exc
        return _session_json(session)

    @app.post("/events", dependencies=guard, status_code=201)
    def log_event(body: EventBody):
        try:
            kind = EventKind(body.kind)
        except ValueError:
            raise HTTPException(400, f"unknown event kind {body.kind!r}") from None
        try:
            event = workbench.log_event(body.project_id, kind, body.payload)
        except UnknownProject as exc:
            raise _http_error(exc) from exc
        return {"event_id": event.event_id}

    @app.get("/stats", dependencies=guard)
    def stats(scope: str = "global"):
        try:
            result = workbench.stats(scope)
        except Exception as exc:
            raise _http_error(exc) from exc
        return asdict(result)

    return app


def create_dev_app() -> FastAPI:
    """App factory for ``uvicorn chatwright.api:create_dev_app --factory``.

    Configured entirely from CHATWRIGHT_* environment variables; also serves
    the browser workbench from CHATWRIGHT_UI_DIR when that is set.
    """
    import os

    from chatwright.config import build_provider, load_config

    cfg = load_config(os.environ.get("CHATWRIGHT_CONFIG"))
    workbench = Workbench(cfg.data_dir, build_provider(cfg))
    app = create_app(workbench, auth_token=cfg.auth_token)

    ui_dir = os.environ.get("CHATWRIGHT_UI_DIR")
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
