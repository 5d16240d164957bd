"""HTTP front end: document management plus confirm-gated query sessions.

Sessions hold the conversation state machine: a query produces a pending
interpretation (awaiting_confirmation), a confirm applies edits and
returns the composed answer (answered), then the next query starts the
cycle again.  Calls out of order get 409s rather than silent repair; a
human confirmation step is the point of the design, not an inconvenience.

Sessions live in process memory with an idle TTL; each session serializes
its own requests, different sessions proceed in parallel.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .composer import AnswerBundle
from .engine import Engine
from .errors import (
    AllSlotsEmpty,
    AuditNetError,
    CorruptIndex,
    CorruptManifest,
    EmptyContent,
    EmptyCorpus,
    EmptyIndex,
    ProviderUnreachable,
    SessionNotFound,
    WrongState,
)
from .interpreter import confirm as confirm_interpretation

DEFAULT_SESSION_TTL_SECONDS = 3600.0

STATE_IDLE = "idle"
STATE_AWAITING = "awaiting_confirmation"
STATE_ANSWERED = "answered"

# states from which each action is legal
_QUERY_STATES = (STATE_IDLE, STATE_ANSWERED)
_CONFIRM_STATES = (STATE_AWAITING,)


@dataclass
class Session:
    session_id: str
    state: str = STATE_IDLE
    pending: object = None
    last_answer: Optional[AnswerBundle] = None
    history: list[tuple[str, str]] = field(default_factory=list)
    last_access: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory sessions with lazy TTL eviction."""

    def __init__(
        self,
        ttl_seconds: float = DEFAULT_SESSION_TTL_SECONDS,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.ttl = ttl_seconds
        self.clock = clock
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _sweep(self, now: float) -> None:
        expired = [
            sid for sid, s in self._sessions.items() if now - s.last_access > self.ttl
        ]
        for sid in expired:
            del self._sessions[sid]

    def create(self) -> Session:
        now = self.clock()
        session = Session(session_id=secrets.token_hex(16), last_access=now)
        with self._lock:
            self._sweep(now)
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        now = self.clock()
        with self._lock:
            self._sweep(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise SessionNotFound(f"no session with id {session_id}")
            session.last_access = now
            return session

    def __len__(self) -> int:
        return len(self._sessions)


class DocumentIn(BaseModel):
    title: str
    standard_name: str
    content: str
    format: str = "plaintext"


class QueryIn(BaseModel):
    text: str


class ConfirmIn(BaseModel):
    policy: Optional[str] = None
    standard: Optional[str] = None
    subject: Optional[str] = None

    def edits(self) -> dict:
        """Only fields present in the request count as edits; an explicit
        null clears the slot, absence keeps the pending value."""
        return {name: getattr(self, name) for name in self.model_fields_set}


_ERROR_MAP: list[tuple[type, int, str]] = [
    (SessionNotFound, 404, "SESSION_NOT_FOUND"),
    (WrongState, 409, "WRONG_STATE"),
    (AllSlotsEmpty, 422, "ALL_SLOTS_EMPTY"),
    (ProviderUnreachable, 503, "PROVIDER_UNREACHABLE"),
    (EmptyContent, 400, "VALIDATION"),
    (EmptyCorpus, 400, "VALIDATION"),
    (EmptyIndex, 400, "VALIDATION"),
    (CorruptManifest, 400, "VALIDATION"),
    (CorruptIndex, 400, "VALIDATION"),
]


def _error_response(exc: Exception) -> JSONResponse:
    for cls, status, code in _ERROR_MAP:
        if isinstance(exc, cls):
            return JSONResponse(
                status_code=status,
                content={"error_code": code, "message": str(exc)},
            )
    if isinstance(exc, (AuditNetError, ValueError)):
        return JSONResponse(
            status_code=400,
            content={"error_code": "VALIDATION", "message": str(exc)},
        )
    raise exc


def _answer_payload(bundle: AnswerBundle) -> dict:
    return {
        "query_text": bundle.query_text,
        "markdown": bundle.rendered_markdown,
        "findings": [f.to_json() for f in bundle.findings],
        "tags": {t.chunk_id: list(t.tags) for t in bundle.tag_results},
        "created_at": bundle.created_at.isoformat(),
    }


def create_app(
    engine: Engine | None = None,
    session_ttl: float = DEFAULT_SESSION_TTL_SECONDS,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    """Build the application; engine defaults to environment configuration."""
    if engine is None:
        engine = Engine.from_env()
    app = FastAPI(title="auditnet", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = SessionStore(ttl_seconds=session_ttl, clock=clock)
    app.state.engine = engine
    app.state.sessions = sessions

    @app.exception_handler(AuditNetError)
    def handle_domain_error(request: Request, exc: AuditNetError):
        return _error_response(exc)

    @app.exception_handler(ValueError)
    def handle_value_error(request: Request, exc: ValueError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error_code": "VALIDATION", "message": str(exc.errors())},
        )

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "provider_mode": engine.config.provider_mode,
            "documents": len(engine.store.manifest.documents),
            "chunks": engine.store.manifest.chunk_count,
        }

    @app.post("/v1/documents", status_code=201)
    def add_document(doc: DocumentIn):
        return engine.ingest(doc.title, doc.standard_name, doc.format, doc.content)

    @app.get("/v1/documents")
    def list_documents():
        return engine.store.manifest.to_json()

    @app.post("/v1/index/rebuild")
    def rebuild_index():
        return engine.rebuild_index()

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        session = sessions.create()
        return {"session_id": session.session_id, "state": session.state}

    @app.post("/v1/sessions/{session_id}/query")
    def submit_query(session_id: str, body: QueryIn):
        session = sessions.get(session_id)
        with session.lock:
            if session.state not in _QUERY_STATES:
                raise WrongState(
                    f"query is not allowed in state {session.state}; confirm or "
                    "start a new session"
                )
            interpretation = engine.interpret(body.text)
            session.pending = interpretation
            session.state = STATE_AWAITING
            return {
                "session_id": session.session_id,
                "state": session.state,
                "interpretation": interpretation.to_json(),
            }

    @app.post("/v1/sessions/{session_id}/confirm")
    def confirm_session(session_id: str, body: ConfirmIn):
        session = sessions.get(session_id)
        with session.lock:
            if session.state not in _CONFIRM_STATES:
                raise WrongState(
                    f"confirm is not allowed in state {session.state}; submit a query first"
                )
            confirmed = confirm_interpretation(session.pending, body.edits())
            bundle = engine.answer(confirmed)
            session.pending = None
            session.last_answer = bundle
            session.state = STATE_ANSWERED
            session.history.append(
                (bundle.query_text, bundle.rendered_markdown.splitlines()[0])
            )
            return {
                "session_id": session.session_id,
                "state": session.state,
                "interpretation": confirmed.to_json(),
                "answer": _answer_payload(bundle),
            }

    return app
