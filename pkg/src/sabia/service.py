"""HTTP façade: chat over the answer pipeline, model listing, health, and
per-session in-memory history.

Endpoints are versioned under /v1; every 4xx/5xx body carries a
machine-readable `error` code.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import rag
from .config import AppConfig
from .embed import Embedder, make_embedder
from .genclient import ChatClient, ModelSpec, load_registry
from .vstore import VectorStore


@dataclass
class Session:
    session_id: str
    turns: list[tuple[str, rag.RagAnswer, float]] = field(default_factory=list)
    last_seen: float = field(default_factory=time.monotonic)


@dataclass
class AppState:
    registry: list[ModelSpec]
    embedder: Embedder
    client: ChatClient
    template: rag.PromptTemplate
    store: VectorStore | None = None
    k: int = rag.DEFAULT_K
    temperature: float = 0.7
    session_ttl_s: float = 3600.0
    sessions: dict[str, Session] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def registry_by_id(self) -> dict[str, ModelSpec]:
        return {spec.model_id: spec for spec in self.registry}


class ChatRequest(BaseModel):
    session_id: str | None = None
    model_id: str | None = None
    message: str | None = None


def build_state(config: AppConfig) -> AppState:
    """Assemble runtime components from configuration; a missing store file
    leaves the service degraded rather than failing startup."""
    store = None
    if config.store_path:
        try:
            store = VectorStore.load(config.store_path)
        except FileNotFoundError:
            store = None
    template = (
        rag.PromptTemplate.from_file(config.template_path)
        if config.template_path
        else rag.PromptTemplate.default()
    )
    return AppState(
        registry=load_registry(config.models),
        embedder=make_embedder(config.embedder),
        client=ChatClient(gateway_url=config.gateway_url, api_key_env=config.api_key_env),
        template=template,
        store=store,
        k=config.k,
        temperature=config.temperature,
        session_ttl_s=config.session_ttl_min * 60.0,
    )


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="sabia", version="1")
    app.state.sabia = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc.errors()[:3]))

    @app.post("/v1/chat")
    def handle_chat(body: ChatRequest):
        message = (body.message or "").strip()
        if not message:
            return _error(400, "empty_message", "message must be nonempty")
        spec = state.registry_by_id().get(body.model_id or "")
        if spec is None:
            return _error(400, "unknown_model", f"model_id {body.model_id!r} is not registered")
        if state.store is None:
            return _error(503, "store_unavailable", "no vector store is loaded")
        try:
            result = rag.answer(
                state.store,
                state.embedder,
                state.client,
                spec,
                state.template,
                message,
                k=state.k,
                temperature=state.temperature,
            )
        except rag.PipelineError as exc:
            return _error(502, "provider_error", f"stage={exc.stage}: {exc}")
        session_id = _append_turn(state, body.session_id, message, result)
        return {
            "session_id": session_id,
            "answer": result.text,
            "sources": [
                {
                    "doc_id": hit.chunk.doc_id,
                    "chunk_index": hit.chunk.chunk_index,
                    "score": hit.score,
                }
                for hit in result.hits
            ],
            "latency_ms": round(result.latency_s * 1000),
        }

    @app.get("/v1/models")
    def handle_models():
        return [
            {
                "model_id": spec.model_id,
                "display_name": spec.display_name,
                "open_source": spec.open_source,
            }
            for spec in state.registry
        ]

    @app.get("/v1/health")
    def handle_health():
        if state.store is None:
            return {"status": "degraded", "store_count": 0, "dim": 0}
        return {
            "status": "ok",
            "store_count": state.store.count,
            "dim": state.store.dim,
        }

    return app


def _append_turn(
    state: AppState, session_id: str | None, question: str, result: rag.RagAnswer
) -> str:
    """Record the turn under its session (created or revived as needed)."""
    now = time.monotonic()
    with state.lock:
        _evict_expired(state, now)
        session = state.sessions.get(session_id) if session_id else None
        if session is None:
            session = Session(session_id=uuid.uuid4().hex)
            state.sessions[session.session_id] = session
        stamp = time.time()
        if session.turns and stamp < session.turns[-1][2]:
            stamp = session.turns[-1][2]
        session.turns.append((question, result, stamp))
        session.last_seen = now
        return session.session_id


def _evict_expired(state: AppState, now: float) -> None:
    expired = [
        sid
        for sid, session in state.sessions.items()
        if now - session.last_seen > state.session_ttl_s
    ]
    for sid in expired:
        del state.sessions[sid]
