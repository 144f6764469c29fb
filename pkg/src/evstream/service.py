"""HTTP service for live test sessions.

A session wraps one evidence process: the monitor posts observations as
they occur and reads back the running state. The stop signal is
advisory; the service reports the threshold decision and refuses
further observations once a session stopped, and a human decides what
to do with the trial.

Sessions live in memory, with optional append-only JSONL persistence
(one file per session) that is replayed on startup — the evidence state
is a pure fold over observations, so the log is the whole truth.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .core import BlockDesign
from .errors import EvstreamError
from .process import EvidenceProcess, model_from_config

STATUS_RUNNING = "running"
STATUS_REJECTED = "stopped-rejected"
STATUS_MANUAL = "stopped-manual"


@dataclass
class Session:
    id: str
    process: EvidenceProcess
    alpha: float
    created_at: float
    model_config: dict
    status: str = STATUS_RUNNING
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def snapshot(self) -> dict:
        process = self.process
        decision = process.decide(self.alpha)
        return {
            "id": self.id,
            "status": self.status,
            "e_value": decision.e_value,
            "log_e": process.log_e,
            "blocks_completed": process.blocks_completed,
            "pending": {
                "a": len(process.pending_a),
                "b": len(process.pending_b),
            },
            "alpha": self.alpha,
            "threshold": decision.threshold,
            "reject": decision.reject,
            "trajectory": [[j, log_e] for j, log_e in process.trajectory],
            "design": {
                "n_a": process.design.n_a,
                "n_b": process.design.n_b,
            },
            "model": self.model_config,
            "created_at": self.created_at,
        }


def _error(status_code: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"detail": message})


def _build_session(body: dict, session_id: str) -> Session:
    if not isinstance(body, dict):
        raise ValueError("request body must be a JSON object")
    try:
        n_a = int(body.get("n_a", 1))
        n_b = int(body.get("n_b", 1))
        alpha = float(body.get("alpha", 0.05))
    except (TypeError, ValueError):
        raise ValueError("n_a, n_b and alpha must be numbers") from None
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    model_config = body.get("model", {"type": "beta"})
    model = model_from_config(model_config)
    process = EvidenceProcess.start(BlockDesign(n_a, n_b), model)
    return Session(
        id=session_id,
        process=process,
        alpha=alpha,
        created_at=time.time(),
        model_config=model_config,
    )


class SessionStore:
    """In-memory sessions with optional JSONL persistence."""

    def __init__(self, persist_dir: Optional[str] = None) -> None:
        self.sessions: dict[str, Session] = {}
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._replay_logs()

    def _log_path(self, session_id: str) -> Optional[Path]:
        if not self.persist_dir:
            return None
        return self.persist_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        path = self._log_path(session_id)
        if path:
            with path.open("a") as handle:
                handle.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay_logs(self) -> None:
        for path in sorted(self.persist_dir.glob("*.jsonl")):
            session = None
            for raw in path.read_text().splitlines():
                if not raw.strip():
                    continue
                event = json.loads(raw)
                kind = event.get("type")
                if kind == "config":
                    session = _build_session(event["body"], event["id"])
                    session.created_at = event.get("created_at", session.created_at)
                elif kind == "obs" and session is not None:
                    session.process = session.process.observe(
                        event["group"], event["y"]
                    )
                    if session.process.decide(session.alpha).reject:
                        session.status = STATUS_REJECTED
                elif kind == "deleted" and session is not None:
                    if session.status == STATUS_RUNNING:
                        session.status = STATUS_MANUAL
            if session is not None:
                self.sessions[session.id] = session

    def create(self, body: dict) -> Session:
        session_id = uuid.uuid4().hex
        session = _build_session(body, session_id)
        self.sessions[session_id] = session
        self._append(
            session_id,
            {
                "type": "config",
                "id": session_id,
                "body": body,
                "created_at": session.created_at,
            },
        )
        return session

    def observe(self, session: Session, group: str, y: int) -> dict:
        with session.lock:
            session.process = session.process.observe(group, y)
            if (
                session.status == STATUS_RUNNING
                and session.process.decide(session.alpha).reject
            ):
                session.status = STATUS_REJECTED
            self._append(session.id, {"type": "obs", "group": group, "y": y})
            snapshot = session.snapshot()
        snapshot["stop"] = snapshot["status"] == STATUS_REJECTED
        return snapshot

    def delete(self, session: Session) -> dict:
        with session.lock:
            if session.status == STATUS_RUNNING:
                session.status = STATUS_MANUAL
            self._append(session.id, {"type": "deleted"})
            return session.snapshot()


def create_app(
    persist_dir: Optional[str] = None, ui_origin: str = "*"
) -> FastAPI:
    app = FastAPI(title="evstream monitor", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[ui_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(persist_dir)
    app.state.store = store

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body must be valid JSON")
        try:
            session = store.create(body)
        except (EvstreamError, ValueError, KeyError, TypeError) as exc:
            return _error(400, str(exc))
        return JSONResponse(status_code=201, content=session.snapshot())

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        return session.snapshot()

    @app.post("/sessions/{session_id}/observations")
    async def post_observation(session_id: str, request: Request):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        if session.status != STATUS_RUNNING:
            return _error(409, f"session is {session.status}")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body must be valid JSON")
        if not isinstance(body, dict):
            return _error(400, "request body must be a JSON object")
        group = body.get("group")
        y = body.get("y")
        if group not in ("a", "b"):
            return _error(400, "group must be 'a' or 'b'")
        if isinstance(y, bool) or y not in (0, 1):
            return _error(400, "y must be 0 or 1")
        return store.observe(session, group, int(y))

    @app.delete("/sessions/{session_id}")
    async def delete_session(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        return store.delete(session)

    return app
