"""Live review service: the human-oracle side of the search loop.

Plain HTTP+JSON. A session wraps one ActiveSearchSession; labels submitted
through the API drive exactly the same stepper the simulator uses, so a
scripted client answering with ground-truth labels reproduces a simulated
run bit for bit.

Endpoints:
    POST /sessions                  create a session, returns the first batch
    GET  /sessions/{id}             progress snapshot (read-only)
    POST /sessions/{id}/labels      label the pending batch, advance one round
    GET  /sessions/{id}/trajectory  completed review log as TSV

Sessions are persisted as append-only event logs (one JSONL file each);
recovering a session replays its log through the stepper, so a restart
lands in exactly the state the reviewer left.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .cluster import MembershipMatrix, import_memberships, soft_cluster
from .corpus import CorpusMatrix, Document, build_vocabulary, load_corpus, vectorize
from .errors import (ActiveSearchError, NoSeeds, PartialLabels, SessionFinished,
                     UnknownCorpus, UnknownIds, UnknownSession)
from .search import ActiveSearchSession, SearchConfig


@dataclass
class LoadedCorpus:
    name: str
    docs: list[Document]
    matrix: CorpusMatrix
    memberships: MembershipMatrix

    @property
    def text_of(self) -> dict[str, str]:
        return {d.id: d.text for d in self.docs}


def build_corpus_registry(corpus_path: Path, name: str | None = None, min_df: int = 3,
                          memberships_path: Path | None = None,
                          cluster_k: int | None = None, cluster_seed: int = 0,
                          temperature: float = 0.1) -> dict[str, LoadedCorpus]:
    """Ingest one corpus file and its cluster structure for serving."""
    docs = load_corpus(corpus_path)
    vocab = build_vocabulary(docs, min_df=min_df)
    cm = vectorize(docs, vocab)
    if memberships_path is not None:
        mm = import_memberships(memberships_path, cm.doc_ids)
    elif cluster_k is not None:
        mm = soft_cluster(cm, cluster_k, temperature=temperature, rng_seed=cluster_seed)
    else:
        raise ValueError("either memberships_path or cluster_k is required")
    corpus_name = name or corpus_path.stem
    return {corpus_name: LoadedCorpus(corpus_name, docs, cm, mm)}


class CreateSessionRequest(BaseModel):
    corpus: str
    config: dict = {}
    seed_ids: list[str] | None = None
    seed_query: str | None = None


class SubmitLabelsRequest(BaseModel):
    labels: dict[str, int]


@dataclass
class _Managed:
    session: ActiveSearchSession
    corpus: LoadedCorpus
    lock: threading.Lock = field(default_factory=threading.Lock)
    computing: bool = False
    last_labels: dict[str, int] | None = None
    last_response: dict | None = None


class SessionStore:
    """In-memory sessions plus optional append-only JSONL persistence."""

    def __init__(self, corpora: dict[str, LoadedCorpus], sessions_dir: Path | None = None):
        self.corpora = corpora
        self.sessions_dir = sessions_dir
        self._sessions: dict[str, _Managed] = {}
        if sessions_dir is not None:
            sessions_dir.mkdir(parents=True, exist_ok=True)

    def _log_path(self, session_id: str) -> Path | None:
        if self.sessions_dir is None:
            return None
        return self.sessions_dir / f"{session_id}.jsonl"

    def _append_event(self, session_id: str, event: dict) -> None:
        path = self._log_path(session_id)
        if path is None:
            return
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def create(self, request: CreateSessionRequest) -> _Managed:
        if request.corpus not in self.corpora:
            raise UnknownCorpus(f"no corpus named {request.corpus!r}")
        corpus = self.corpora[request.corpus]
        config = SearchConfig.from_dict({**SearchConfig().as_dict(), **request.config})
        session = ActiveSearchSession(corpus.matrix, corpus.memberships, config,
                                      seed_ids=request.seed_ids,
                                      seed_query=request.seed_query)
        session_id = uuid.uuid4().hex
        managed = _Managed(session=session, corpus=corpus)
        self._sessions[session_id] = managed
        self._append_event(session_id, {
            "event": "created", "corpus": request.corpus, "config": config.as_dict(),
            "seed_ids": request.seed_ids, "seed_query": request.seed_query})
        return managed

    def get(self, session_id: str) -> _Managed:
        if session_id not in self._sessions:
            self._recover(session_id)
        if session_id not in self._sessions:
            raise UnknownSession(f"no session {session_id!r}")
        return self._sessions[session_id]

    def _recover(self, session_id: str) -> None:
        path = self._log_path(session_id)
        if path is None or not path.exists():
            return
        managed: _Managed | None = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                event = json.loads(line)
                if event["event"] == "created":
                    corpus = self.corpora[event["corpus"]]
                    session = ActiveSearchSession(
                        corpus.matrix, corpus.memberships,
                        SearchConfig.from_dict(event["config"]),
                        seed_ids=event["seed_ids"], seed_query=event["seed_query"])
                    managed = _Managed(session=session, corpus=corpus)
                elif event["event"] == "labels" and managed is not None:
                    managed.session.submit_labels({k: int(v) for k, v in event["labels"].items()})
        if managed is not None:
            self._sessions[session_id] = managed

    def record_labels(self, session_id: str, labels: dict[str, int]) -> None:
        self._append_event(session_id, {"event": "labels", "labels": labels})


def _snapshot(session_id: str, managed: _Managed) -> dict:
    session = managed.session
    if session.finished:
        status = "finished"
    elif managed.computing:
        status = "computing"
    else:
        status = "awaiting_labels"
    text_of = managed.corpus.text_of
    return {
        "session_id": session_id,
        "status": status,
        "reviewed": session.reviewed,
        "relevant_found": session.relevant_found,
        "batch_size": session.batch_size,
        "round": session.round,
        "budget_count": session.budget_count,
        "collection_size": session.corpus.n_docs,
        "arms": [{"cluster": k, "s": float(session.bandit.s[k]), "f": float(session.bandit.f[k])}
                 for k in range(session.bandit.k)],
        "found_curve": [[reviewed, found] for reviewed, found in session.trajectory.found_curve()],
        "pending": [{"id": doc_id, "text": text_of[doc_id], "pi": pi}
                    for doc_id, pi in session.pending_scores()],
    }


def create_app(corpora: dict[str, LoadedCorpus], sessions_dir: Path | None = None,
               static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="activesearch review service")
    store = SessionStore(corpora, sessions_dir)
    app.state.store = store

    @app.exception_handler(ActiveSearchError)
    def _handle(request, exc: ActiveSearchError):  # pragma: no cover - thin glue
        status = 400
        if isinstance(exc, (UnknownSession, UnknownCorpus)):
            status = 404
        elif isinstance(exc, SessionFinished):
            status = 409
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/corpora")
    def list_corpora():
        return {"corpora": [{"name": c.name, "documents": c.matrix.n_docs,
                             "clusters": c.memberships.k}
                            for c in corpora.values()]}

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest):
        managed = store.create(request)
        session_id = next(sid for sid, m in store._sessions.items() if m is managed)
        return _snapshot(session_id, managed)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _snapshot(session_id, store.get(session_id))

    @app.post("/sessions/{session_id}/labels")
    def submit_labels(session_id: str, request: SubmitLabelsRequest):
        managed = store.get(session_id)
        if not managed.lock.acquire(blocking=False):
            return JSONResponse(status_code=409,
                                content={"error": "Busy", "retry": True,
                                         "detail": "another request is advancing this session"})
        try:
            labels = {str(k): int(v) for k, v in request.labels.items()}
            # exactly-once: resubmitting the identical pending map returns the
            # response of the advance it already caused
            if managed.last_labels == labels and managed.last_response is not None:
                return managed.last_response
            managed.computing = True
            try:
                managed.session.submit_labels(labels)
            finally:
                managed.computing = False
            store.record_labels(session_id, labels)
            response = _snapshot(session_id, managed)
            managed.last_labels = labels
            managed.last_response = response
            return response
        finally:
            managed.lock.release()

    @app.get("/sessions/{session_id}/trajectory")
    def get_trajectory(session_id: str):
        managed = store.get(session_id)
        body = "".join(line + "\n" for line in managed.session.trajectory.to_lines())
        return PlainTextResponse(body, media_type="text/tab-separated-values")

    if static_dir is not None and static_dir.exists():  # the review console, if built
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
