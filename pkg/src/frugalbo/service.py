"""HTTP service exposing optimization sessions to operators and the web UI.

Endpoints (JSON bodies, all schemas carry ``schema_version``):

* ``POST /sessions``                 create a session from space/costs/weights
* ``POST /sessions/{id}/propose``    next configuration + reuse classes + believed cost
* ``POST /sessions/{id}/observe``    submit performance/preference scores
* ``POST /sessions/{id}/costs``      reweight cost levels from the next iteration
* ``GET  /sessions/{id}/history``    full trace, record, budget, and best-so-far
* ``GET  /healthz``

If a built web UI is available its static files are served at the root.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .costs import CostConfigError, CostLevels
from .sessions import (
    SessionError,
    SessionNotFoundError,
    SessionStore,
    StateConflictError,
)
from .space import SCHEMA_VERSION, SpaceError

DATA_DIR_ENV = "FRUGALBO_DATA_DIR"
STATIC_DIR_ENV = "FRUGALBO_STATIC_DIR"


class ObserveBody(BaseModel):
    performance_score: float
    preference_score: float = Field(ge=0.0, le=100.0)


def default_static_dir() -> Path | None:
    env = os.environ.get(STATIC_DIR_ENV)
    if env:
        return Path(env)
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def create_app(data_dir=None, static_dir=None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get(DATA_DIR_ENV, "./frugalbo-data"))
    store = SessionStore(data_dir)
    app = FastAPI(title="frugalbo session service", version="0.1.0")
    app.state.store = store

    @app.exception_handler(SessionNotFoundError)
    async def _not_found(request: Request, exc: SessionNotFoundError):
        return JSONResponse(status_code=404, content={"detail": f"unknown session {exc}"})

    @app.exception_handler(StateConflictError)
    async def _conflict(request: Request, exc: StateConflictError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    for bad_request in (SessionError, SpaceError, CostConfigError):

        @app.exception_handler(bad_request)
        async def _bad(request: Request, exc: Exception):
            return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "schema_version": SCHEMA_VERSION}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict):
        for key in ("space", "schedule", "relaxation", "utility_weights"):
            if key not in payload:
                raise SessionError(f"missing required field {key!r}")
        session = store.create(payload)
        return {
            "session_id": session.id,
            "state": session.state,
            "schema_version": SCHEMA_VERSION,
        }

    @app.post("/sessions/{session_id}/propose")
    def propose(session_id: str):
        return store.propose(session_id)

    @app.post("/sessions/{session_id}/observe")
    def observe(session_id: str, body: ObserveBody):
        return store.observe(session_id, body.performance_score, body.preference_score)

    @app.post("/sessions/{session_id}/costs")
    def reweight(session_id: str, payload: dict):
        if "levels" not in payload:
            raise SessionError("missing required field 'levels'")
        try:
            levels = CostLevels.from_json_dict(payload["levels"])
        except (KeyError, TypeError) as e:
            raise SessionError(f"malformed cost levels: {e}") from e
        return store.reweight(session_id, levels)

    @app.get("/sessions/{session_id}/history")
    def history(session_id: str):
        return store.history(session_id)

    static = static_dir if static_dir is not None else default_static_dir()
    if static is not None and Path(static).is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")
    return app
