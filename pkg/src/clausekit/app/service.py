"""HTTP authoring service: sessions, relevance suggestions, recommendations.

A session is a working contract draft with an in-memory clause list, a
revision counter, and a mutation log. Mutations use optimistic concurrency:
each mutating request carries the revision it was computed against, and a
mismatch is rejected with 409 so the client refetches. Replaying a session's
mutation log reconstructs its clause list exactly. Every response — including
errors — carries the pipeline config fingerprint so clients can detect
artifact swaps.

Sessions live in memory; ``snapshot_path`` optionally persists them as JSONL
on shutdown and restores them on the next startup.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from ..corpus import Clause, Contract, normalize_label
from ..encoding import EncodingError, contract_rep
from ..generation import condition
from ..retrieval import RetrievalQuery
from .pipeline import RELEVANCE_METHODS, ServingBundle

EMPTY_SESSION_MESSAGE = (
    "add at least one clause with non-empty text to receive relevance suggestions"
)

_VARIANTS = {"i": "ct_only", "ii": "ct_plus_type"}


class ClauseIn(BaseModel):
    label: str = Field(min_length=1)
    text: str


class SessionCreate(BaseModel):
    clauses: list[ClauseIn] = Field(default_factory=list)


class ClauseAdd(ClauseIn):
    revision: int


class AcceptIn(BaseModel):
    type: str = Field(min_length=1)
    text: str = Field(min_length=1)
    revision: int


@dataclass
class Session:
    """One authoring session: clause list, revision counter, mutation log."""

    id: str
    clauses: list = field(default_factory=list)
    revision: int = 0
    log: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def contract(self) -> Contract:
        return Contract(
            self.id, [Clause.make(entry["label"], entry["text"]) for entry in self.clauses]
        )

    def to_state(self) -> dict:
        return {
            "id": self.id,
            "revision": self.revision,
            "clauses": [dict(entry) for entry in self.clauses],
        }

    def to_snapshot(self) -> dict:
        return {**self.to_state(), "log": [dict(entry) for entry in self.log]}

    @classmethod
    def from_snapshot(cls, record: dict) -> "Session":
        return cls(
            id=record["id"],
            clauses=[dict(entry) for entry in record.get("clauses", [])],
            revision=int(record.get("revision", 0)),
            log=[dict(entry) for entry in record.get("log", [])],
        )


def apply_mutation(clauses: list, entry: dict) -> list:
    """Apply one log entry to a clause list, returning the new list."""
    op = entry.get("op")
    if op in ("add", "accept"):
        return clauses + [{"label": entry["label"], "text": entry["text"]}]
    if op == "remove":
        index = entry["index"]
        return clauses[:index] + clauses[index + 1 :]
    raise ValueError(f"unknown mutation op {op!r}")


def replay_mutations(log) -> dict:
    """Reconstruct {clauses, revision} from a session's mutation log."""
    clauses: list = []
    revision = 0
    for entry in log:
        clauses = apply_mutation(clauses, entry)
        revision = entry["revision"]
    return {"clauses": clauses, "revision": revision}


def create_app(bundle: ServingBundle, snapshot_path=None) -> FastAPI:
    """Build the FastAPI app serving the given artifact bundle."""
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()
    fingerprint = bundle.config.fingerprint
    snapshot_file = Path(snapshot_path) if snapshot_path else None

    def _load_snapshot() -> None:
        if snapshot_file is None or not snapshot_file.exists():
            return
        with open(snapshot_file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                session = Session.from_snapshot(json.loads(line))
                sessions[session.id] = session

    def _write_snapshot() -> None:
        if snapshot_file is None:
            return
        snapshot_file.parent.mkdir(parents=True, exist_ok=True)
        with open(snapshot_file, "w", encoding="utf-8") as fh:
            for session in sessions.values():
                fh.write(json.dumps(session.to_snapshot(), sort_keys=True) + "\n")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        _load_snapshot()
        yield
        _write_snapshot()

    app = FastAPI(title="clause recommendation service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.sessions = sessions

    def _error(status: int, message: str, **extra):
        return HTTPException(
            status_code=status,
            detail={"error": message, "config_fingerprint": fingerprint, **extra},
        )

    def _session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise _error(404, f"unknown session {session_id!r}")
        return session

    def _state_response(session: Session) -> dict:
        return {**session.to_state(), "config_fingerprint": fingerprint}

    def _check_revision(session: Session, revision: int) -> None:
        if revision != session.revision:
            raise _error(
                409,
                f"stale revision {revision}; session is at revision {session.revision}",
                current_revision=session.revision,
            )

    def _mutate(session: Session, revision: int, entry: dict) -> dict:
        """Atomically verify the revision and apply one mutation."""
        with session.lock:
            _check_revision(session, revision)
            session.clauses = apply_mutation(session.clauses, entry)
            session.revision += 1
            session.log.append({**entry, "revision": session.revision})
        return _state_response(session)

    # ------------------------------------------------------------- sessions

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate) -> dict:
        session = Session(id=uuid.uuid4().hex)
        for clause in body.clauses:
            session.clauses.append({"label": normalize_label(clause.label), "text": clause.text})
            session.revision += 1
            session.log.append(
                {
                    "op": "add",
                    "label": normalize_label(clause.label),
                    "text": clause.text,
                    "revision": session.revision,
                }
            )
        with sessions_lock:
            sessions[session.id] = session
        return _state_response(session)

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str) -> dict:
        return _state_response(_session(session_id))

    @app.post("/sessions/{session_id}/clauses")
    def add_clause(session_id: str, body: ClauseAdd) -> dict:
        session = _session(session_id)
        entry = {"op": "add", "label": normalize_label(body.label), "text": body.text}
        return _mutate(session, body.revision, entry)

    @app.delete("/sessions/{session_id}/clauses/{index}")
    def remove_clause(session_id: str, index: int, revision: int = Query(...)) -> dict:
        session = _session(session_id)
        with session.lock:
            _check_revision(session, revision)
            if not 0 <= index < len(session.clauses):
                raise _error(
                    400, f"clause index {index} out of range for {len(session.clauses)} clauses"
                )
            entry = {"op": "remove", "index": index}
            session.clauses = apply_mutation(session.clauses, entry)
            session.revision += 1
            session.log.append({**entry, "revision": session.revision})
        return _state_response(session)

    @app.get("/sessions/{session_id}/log")
    def read_log(session_id: str) -> dict:
        session = _session(session_id)
        return {
            "id": session.id,
            "revision": session.revision,
            "log": [dict(entry) for entry in session.log],
            "config_fingerprint": fingerprint,
        }

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str, body: AcceptIn) -> dict:
        session = _session(session_id)
        entry = {"op": "accept", "label": normalize_label(body.type), "text": body.text}
        return _mutate(session, body.revision, entry)

    # --------------------------------------------------------- suggestions

    @app.get("/sessions/{session_id}/relevant-types")
    def relevant_types(session_id: str, methods: str | None = None) -> dict:
        session = _session(session_id)
        contract = session.contract()
        requested = (
            [m.strip() for m in methods.split(",") if m.strip()]
            if methods
            else list(RELEVANCE_METHODS)
        )
        unknown = [m for m in requested if m not in RELEVANCE_METHODS]
        if unknown:
            raise _error(
                400, f"unknown methods {unknown}; expected a subset of {list(RELEVANCE_METHODS)}"
            )
        base = {
            "id": session.id,
            "revision": session.revision,
            "config_fingerprint": fingerprint,
        }
        try:
            contract_rep(bundle.encoder, contract)
        except EncodingError:
            return {**base, "candidates": [], "message": EMPTY_SESSION_MESSAGE}
        present = contract.type_labels()
        candidates = []
        for label in bundle.type_index.labels:
            if label in present:
                continue
            decisions = bundle.decisions_for(contract, label, requested)
            if not decisions:
                continue
            ranked_by = next(
                (m for m in ("classifier", "cf", "docsim") if m in decisions), None
            )
            candidates.append(
                {
                    "type": label,
                    "rank_score": decisions[ranked_by].score,
                    "ranked_by": ranked_by,
                    "decisions": {m: d.to_dict() for m, d in decisions.items()},
                }
            )
        candidates.sort(key=lambda c: (-c["rank_score"], c["type"]))
        return {**base, "candidates": candidates, "message": None}

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(
        session_id: str,
        type: str = Query(...),
        mode: str = "retrieve",
        variant: str = "ii",
        top_n: int = 5,
    ) -> dict:
        session = _session(session_id)
        target = normalize_label(type)
        if mode not in ("retrieve", "generate"):
            raise _error(400, f"mode must be 'retrieve' or 'generate', got {mode!r}")
        if variant not in _VARIANTS:
            raise _error(400, f"variant must be 'i' or 'ii', got {variant!r}")
        if top_n < 1:
            raise _error(400, f"top_n must be positive, got {top_n}")
        if target not in bundle.type_index:
            raise _error(404, f"unknown clause type {target!r}")
        if mode == "generate" and target not in bundle.generators:
            raise _error(
                400,
                f"no generator artifact loaded for {target!r}; "
                f"run `clausekit train-generator --target '{target}'` and restart the service",
            )
        contract = session.contract()
        try:
            rep_c = contract_rep(bundle.encoder, contract)
        except EncodingError:
            raise _error(400, EMPTY_SESSION_MESSAGE) from None
        warning = None
        if target in contract.type_labels():
            warning = (
                f"session already contains a {target!r} clause; "
                "the relevance stage would not have proposed it"
            )
        rep_t = bundle.type_rep(target)
        retrieved = []
        if mode == "retrieve":
            query = RetrievalQuery(
                contract_rep=rep_c,
                target=target,
                top_n=top_n,
                variant=_VARIANTS[variant],
                type_rep=rep_t if variant == "ii" else None,
            )
            retrieved = [r.to_dict() for r in bundle.retriever.retrieve(query)]
        generated = None
        if target in bundle.generators:
            result = bundle.generators[target].generate(condition(rep_c, rep_t))
            generated = {"text": result.text, "tokens": list(result.tokens), "truncated": result.truncated}
        return {
            "id": session.id,
            "revision": session.revision,
            "type": target,
            "mode": mode,
            "variant": variant,
            "top_n": top_n,
            "warning": warning,
            "retrieved": retrieved,
            "generated": generated,
            "config_fingerprint": fingerprint,
        }

    return app
