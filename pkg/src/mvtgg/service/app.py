"""FastAPI application.

Stateless endpoints mirror the command line one to one. Sessions keep a
multi-version state in memory so that modifications can be streamed in
without shipping the whole model back and forth.
"""

from __future__ import annotations

import threading
import uuid
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__, api
from ..errors import BenchmarkIntegrityError, ConfigurationError, InputError
from .schemas import (
    BenchRequest,
    CompactRequest,
    CompareRequest,
    GenerateRequest,
    GraphResponse,
    HistoryResponse,
    ModsRequest,
    ProjectRequest,
    SessionCreate,
    SessionInfo,
    StateResponse,
    SyncRequest,
    TransformRequest,
    VerifyRequest,
)


class SessionStore:
    """Serialized states keyed by session id; one lock per store keeps updates atomic."""

    def __init__(self, limit: int = 64):
        self.limit = limit
        self._states: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()

    def create(self, state: dict[str, Any]) -> str:
        with self._lock:
            if len(self._states) >= self.limit:
                raise HTTPException(429, "session limit reached")
            key = uuid.uuid4().hex
            self._states[key] = state
            return key

    def get(self, key: str) -> dict[str, Any]:
        with self._lock:
            if key not in self._states:
                raise HTTPException(404, f"unknown session {key}")
            return self._states[key]

    def update(self, key: str, fn: Any) -> Any:
        with self._lock:
            if key not in self._states:
                raise HTTPException(404, f"unknown session {key}")
            state, result = fn(self._states[key])
            self._states[key] = state
            return result

    def delete(self, key: str) -> None:
        with self._lock:
            if self._states.pop(key, None) is None:
                raise HTTPException(404, f"unknown session {key}")


def create_app(session_limit: int = 64) -> FastAPI:
    app = FastAPI(title="mvtgg", version=__version__)
    sessions = SessionStore(session_limit)
    app.state.sessions = sessions

    @app.exception_handler(InputError)
    async def _input(_: Request, exc: InputError) -> JSONResponse:
        return JSONResponse({"error": "input", "detail": str(exc)}, status_code=422)

    @app.exception_handler(ConfigurationError)
    async def _config(_: Request, exc: ConfigurationError) -> JSONResponse:
        return JSONResponse({"error": "configuration", "detail": str(exc)}, status_code=422)

    @app.exception_handler(BenchmarkIntegrityError)
    async def _integrity(_: Request, exc: BenchmarkIntegrityError) -> JSONResponse:
        return JSONResponse({"error": "integrity", "detail": str(exc)}, status_code=409)

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "version": __version__}

    @app.post("/transform", response_model=StateResponse)
    def transform(req: TransformRequest) -> StateResponse:
        state, summary = api.transform(req.tgg, req.history, req.strategy, req.seed)
        return StateResponse(state=state, summary=summary)

    @app.post("/sync", response_model=StateResponse)
    def sync(req: SyncRequest) -> StateResponse:
        state, summary = api.sync(req.state, req.mods, tgg_doc=req.tgg, strategy=req.strategy, seed=req.seed)
        return StateResponse(state=state, summary=summary)

    @app.post("/project", response_model=GraphResponse)
    def project(req: ProjectRequest) -> GraphResponse:
        return GraphResponse(graph=api.project(req.state, req.version))

    @app.post("/verify")
    def verify(req: VerifyRequest) -> dict[str, Any]:
        return api.verify(req.tgg, req.history, req.mods, req.seed)

    @app.post("/compare")
    def compare(req: CompareRequest) -> dict[str, Any]:
        return api.compare_states(req.a, req.b)

    @app.post("/bench")
    def bench(req: BenchRequest) -> dict[str, Any]:
        return api.bench(req.tgg, req.history, mods_doc=req.mods, strategies=req.strategies,
                         repeat=req.repeat, seed=req.seed, inject_fault=req.inject_fault)

    @app.post("/generate", response_model=HistoryResponse)
    def generate(req: GenerateRequest) -> HistoryResponse:
        params = req.model_dump(exclude={"tgg"})
        return HistoryResponse(history=api.generate(req.tgg, **params))

    @app.post("/compact", response_model=StateResponse)
    def compact(req: CompactRequest) -> StateResponse:
        state, summary = api.compact(req.state)
        return StateResponse(state=state, summary=summary)

    @app.post("/sessions", response_model=SessionInfo, status_code=201)
    def open_session(req: SessionCreate) -> SessionInfo:
        state, summary = api.transform(req.tgg, req.history, "mvm", req.seed)
        return SessionInfo(session=sessions.create(state), summary=summary)

    @app.post("/sessions/{key}/mods", response_model=SessionInfo)
    def push_mods(key: str, req: ModsRequest) -> SessionInfo:
        summary = sessions.update(key, lambda state: api.sync(state, req.mods))
        return SessionInfo(session=key, summary=summary)

    @app.get("/sessions/{key}/state")
    def session_state(key: str) -> dict[str, Any]:
        return sessions.get(key)

    @app.get("/sessions/{key}/versions/{version}", response_model=GraphResponse)
    def session_version(key: str, version: int) -> GraphResponse:
        return GraphResponse(graph=api.project(sessions.get(key), version))

    @app.delete("/sessions/{key}", status_code=204)
    def close_session(key: str) -> None:
        sessions.delete(key)

    return app
