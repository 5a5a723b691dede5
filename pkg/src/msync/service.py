"""HTTP/JSON API over a project file, for the browser companion.

Reads are served from the live project under a reader-friendly
lock; every mutation goes through the same commit path as the CLI
(apply_changeset / resolve_decision followed by a canonical save), so a
scripted CLI session and an equivalent API session leave byte-identical
project files. Each committed mutation is fanned out to subscribers of
the ``/api/events`` server-sent-event stream.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from .errors import (
    InvalidResolution,
    MsyncError,
    StaleRequest,
    UnknownRequest,
)
from .project import Project, dumps_project, load_project, save_project
from .render import render as render_model
from .rosetta import AdjacencyMatrix, TraceMatrix
from .sync import (
    ChangeSet,
    DecisionResolution,
    apply_changeset,
    pending_decisions,
    resolve_decision,
)

KEEPALIVE_SECONDS = 0.5


class ProjectStore:
    """Single-writer access to one project file plus an event bus."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._project = load_project(self.path)
        self._subscribers: list[queue.Queue] = []

    @property
    def project(self) -> Project:
        return self._project

    def snapshot(self) -> Project:
        """Copy of the committed state, safe to read without the lock."""
        with self._lock:
            return self._project.copy()

    def mutate(self, event: str, fn):
        with self._lock:
            result = fn(self._project)
            save_project(self._project, self.path)
            payload = {"type": event, "version": self._project.version}
        self.publish(payload)
        return result

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, payload: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put_nowait(payload)


def _grid_doc(matrix: AdjacencyMatrix) -> dict:
    return {
        "metamodel": matrix.metamodel.value,
        "headers": [
            {"id": e.id, "kind": e.kind.value, "label": e.label} for e in matrix.axis
        ],
        "cells": [
            {
                "row": row,
                "col": col,
                "kind": cell.kind.value,
                "semantics": cell.semantics,
                "direction": cell.direction.value if cell.direction else None,
            }
            for (row, col), cell in matrix.cells.items()
        ],
    }


def _trace_doc(q: TraceMatrix, rows: list[dict], cols: list[dict]) -> dict:
    return {
        "headers_rows": rows,
        "headers_cols": cols,
        "cells": [
            {"row": a, "col": b, "semantics": "maps to"} for (a, b) in q.links
        ],
    }


async def _json_body(request: Request):
    try:
        return await request.json()
    except json.JSONDecodeError as exc:
        from .errors import ParseError

        raise ParseError(f"request body is not valid JSON: {exc.msg}") from exc


def create_app(store: ProjectStore, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="msync", version="0.1.0")

    @app.exception_handler(MsyncError)
    async def _domain_error(request: Request, exc: MsyncError):
        status = 422
        code = type(exc).__name__
        if isinstance(exc, UnknownRequest):
            status = 404
        elif isinstance(exc, StaleRequest):
            status = 409
        elif isinstance(exc, InvalidResolution):
            status = 422
        return JSONResponse(
            status_code=status,
            content={"code": code, "message": str(exc), "detail": str(exc)},
        )

    @app.get("/api/project")
    def get_project():
        return json.loads(dumps_project(store.snapshot()))

    @app.get("/api/matrices")
    def get_matrices():
        project = store.snapshot()
        n, m = project.matrices()
        n_doc, m_doc = _grid_doc(n), _grid_doc(m)
        return {
            "n": n_doc,
            "m": m_doc,
            "q": _trace_doc(project.q, n_doc["headers"], m_doc["headers"]),
        }

    @app.get("/api/render/{side}")
    def get_render(side: str, format: str = "plantuml"):
        if side not in ("alpha", "beta"):
            return JSONResponse(
                status_code=404,
                content={
                    "code": "UnknownResource",
                    "message": f"no model {side!r}",
                    "detail": "use alpha or beta",
                },
            )
        project = store.snapshot()
        model = project.model_alpha if side == "alpha" else project.model_beta
        if model is None:
            return JSONResponse(
                status_code=404,
                content={
                    "code": "UnknownResource",
                    "message": f"the {side} model does not exist yet",
                    "detail": "run the pipeline first",
                },
            )
        if format not in ("dot", "plantuml"):
            return JSONResponse(
                status_code=422,
                content={
                    "code": "InvalidPayload",
                    "message": f"unknown format {format!r}",
                    "detail": "use dot or plantuml",
                },
            )
        return PlainTextResponse(render_model(model, format))

    @app.get("/api/decisions")
    def get_decisions():
        project = store.snapshot()
        return {
            "version": project.version,
            "decisions": [r.to_doc() for r in pending_decisions(project)],
        }

    @app.post("/api/decisions/{request_id}")
    async def post_decision(request_id: str, request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict) or "choose" not in body:
            return JSONResponse(
                status_code=422,
                content={
                    "code": "InvalidPayload",
                    "message": "body must carry a 'choose' key",
                    "detail": str(body),
                },
            )
        resolution = DecisionResolution(
            request_id=request_id,
            choose=str(body["choose"]),
            label=body.get("label"),
        )
        expected = body.get("expected_version")
        report = await run_in_threadpool(
            store.mutate,
            "decision_resolved",
            lambda project: resolve_decision(project, resolution, expected),
        )
        return report.to_doc()

    @app.post("/api/changes")
    async def post_changes(request: Request):
        body = await _json_body(request)
        changeset = ChangeSet.from_doc(body)
        report = await run_in_threadpool(
            store.mutate,
            "change_applied",
            lambda project: apply_changeset(project, changeset),
        )
        return report.to_doc()

    @app.get("/api/verify")
    def get_verify():
        project = store.snapshot()
        verification = project.verify()
        doc = {
            "synchronized": verification.synchronized,
            "failures": [
                {"category": f.category, "subject": f.subject, "detail": f.detail}
                for f in verification.failures
            ],
            "pending_decisions": len(project.decision_queue),
        }
        dep = project.dependency()
        if dep is not None:
            from .interpret import verify_composition

            comp = verify_composition(
                dep, project.trace_alpha(), project.trace_beta(), project.q
            )
            doc["composition"] = {
                "passed": comp.passed,
                "failures": [list(f) for f in comp.failures],
            }
        return doc

    @app.get("/api/audit")
    def get_audit():
        return [
            {"seq": e.seq, "event": e.event, "detail": e.detail}
            for e in store.snapshot().audit
        ]

    @app.get("/api/events")
    async def get_events():
        subscription = store.subscribe()

        async def stream():
            try:
                yield "event: connected\ndata: {}\n\n"
                while True:
                    try:
                        payload = await run_in_threadpool(
                            subscription.get, True, KEEPALIVE_SECONDS
                        )
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"event: {payload['type']}\ndata: {json.dumps(payload)}\n\n"
            finally:
                store.unsubscribe(subscription)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.exception_handler(404)
    async def _not_found(request: Request, exc):
        return JSONResponse(
            status_code=404,
            content={
                "code": "UnknownResource",
                "message": f"no resource at {request.url.path}",
                "detail": "",
            },
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        from starlette.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
