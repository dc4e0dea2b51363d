"""Live interactive sessions over HTTP, with event-sourced persistence.

Each session is an append-only JSONL event log (created / patient / system /
rating). State is never stored directly: it is rebuilt by folding the
events, so a restart reloads every session exactly as it was, and the log
doubles as an audit trail. Steps are serialized per session with a
non-blocking lock: of two concurrent posts, one advances the session and
the other gets a conflict.

Two patient modes: free mode, where the human's text seeds the evidence
ledger through a lexical stance interpreter, and replay mode, where a
profile is attached, the simulator produces the opening statement, and the
profile's clinical facts decide each stance regardless of the reply's
wording. Replay-mode gold diseases are never exposed before the session is
terminal.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import BaseModel

from .graph import KnowledgeGraph, normalize_name
from .orchestration import (
    ACTIVE,
    DIAGNOSED,
    RunConfig,
    SessionState,
    Transcript,
    TurnRecord,
    diagnosis_utterance,
    make_scorer,
    make_verifier,
    system_step,
)
from .profiles import PatientProfile, Persona
from .simulator import opening_statement, question_stance
from .verifier import DIAGNOSIS, QUESTION, match_question_attribute

ENV_API_TOKEN = "GRAPHDX_API_TOKEN"
ENV_MAX_SESSIONS = "GRAPHDX_MAX_SESSIONS"
ENV_CORS_ORIGIN = "GRAPHDX_CORS_ORIGIN"

_NEGATION = re.compile(r"\b(no|not|never|don't|dont|doesn't|haven't|havent|nothing|none|nope)\b")
_UNCERTAIN = re.compile(
    r"(not sure|don't know|dont know|no idea|unsure|can't say|cant say|maybe|hard to say)"
)


class SessionNotFound(KeyError):
    pass


class SessionConflict(RuntimeError):
    """Terminal session, or a concurrent step already in flight."""


class SessionLimitReached(RuntimeError):
    pass


class RatingValidationError(ValueError):
    pass


def interpret_reply(
    g: KnowledgeGraph,
    last_question: str | None,
    text: str,
) -> tuple[str, tuple[str, ...], str | None]:
    """Lexical stance interpretation for free-mode replies.

    Returns (stance, disclosed attribute names, asked attribute id).
    Uncertainty cues beat negation cues; anything else counts as an
    affirmation of the asked attribute. Attribute names mentioned in the
    text are disclosed alongside an affirmation.
    """
    asked = match_question_attribute(g, last_question) if last_question else None
    lowered = f" {normalize_name(text)} "
    mentioned: list[str] = []
    for node in g.nodes:
        if node.kind == "disease":
            continue
        if normalize_name(node.name) in lowered:
            mentioned.append(node.name)
    if _UNCERTAIN.search(lowered):
        return "unknown", (), asked
    if _NEGATION.search(lowered):
        if asked is not None:
            return "denied", (g.name_of(asked),), asked
        return "unknown", (), asked
    if asked is not None and g.name_of(asked) not in mentioned:
        mentioned.append(g.name_of(asked))
    if mentioned:
        return "affirmed", tuple(sorted(mentioned)), asked
    return "unknown", (), asked


@dataclass
class LiveSession:
    session_id: str
    config: RunConfig
    state: SessionState
    profile: PatientProfile | None
    persona: Persona
    show_hypotheses: bool
    created_at: float
    updated_at: float
    ratings: dict | None = None
    last_question: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def terminal(self) -> bool:
        return self.state.status != ACTIVE


class SessionManager:
    """Owns the event logs and steps sessions through the orchestration loop."""

    def __init__(
        self,
        g: KnowledgeGraph,
        profiles: dict[str, PatientProfile],
        data_dir: str | Path,
        defaults: RunConfig | None = None,
        max_sessions: int | None = None,
        chat_client=None,
        score_client=None,
    ):
        self.g = g
        self.profiles = profiles
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.defaults = defaults or RunConfig()
        self.max_sessions = max_sessions
        self.chat_client = chat_client
        self.score_client = score_client
        self.sessions: dict[str, LiveSession] = {}
        self._create_lock = threading.Lock()
        self._reload()

    # ----- event log -------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        line = json.dumps(event, sort_keys=True)
        with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _reload(self) -> None:
        for path in sorted(self.data_dir.glob("*.jsonl")):
            session = self._replay(path)
            if session is not None:
                self.sessions[session.session_id] = session

    def _replay(self, path: Path) -> LiveSession | None:
        events = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                events.append(json.loads(line))
        if not events or events[0].get("event") != "created":
            return None
        head = events[0]
        config = RunConfig(**head["config"])
        profile = self.profiles.get(head["profile_id"]) if head.get("profile_id") else None
        session = LiveSession(
            session_id=head["session_id"],
            config=config,
            state=SessionState(),
            profile=profile,
            persona=Persona(**head["persona"]),
            show_hypotheses=head.get("show_hypotheses", False),
            created_at=head["created_at"],
            updated_at=head["created_at"],
        )
        state = session.state
        for event in events[1:]:
            kind = event["event"]
            if kind == "patient":
                state.history.append(("patient", event["text"]))
                state.pending_patient = event["text"]
                if event["disclosed"]:
                    state.ledger.update(event["stance"], tuple(event["disclosed"]))
                elif event["stance"] == "unknown" and event.get("asked_attribute"):
                    state.ledger.update(
                        "unknown", (self.g.name_of(event["asked_attribute"]),)
                    )
                if event.get("asked_attribute"):
                    state.asked.add(event["asked_attribute"])
            elif kind == "system":
                state.turn = event["turn"]
                state.history.append(("system", event["utterance"]))
                state.records.append(
                    TurnRecord(
                        patient=state.pending_patient,
                        anchors=list(event["anchors"]),
                        candidates=list(event["candidates"]),
                        subgraph_nodes=event["subgraph_nodes"],
                        action_kind=event["kind"],
                        action_text=event["action_text"],
                        think=event["think"],
                    )
                )
                state.status = event["status"]
                if event["kind"] == QUESTION:
                    session.last_question = event["action_text"]
            elif kind == "rating":
                session.ratings = {
                    k: event[k] for k in ("essentiality", "flow", "authenticity", "comments")
                }
            session.updated_at = event.get("at", session.updated_at)
        return session

    # ----- operations --------------------------------------------------

    def create_session(
        self,
        profile_id: str | None = None,
        persona: Persona | None = None,
        show_hypotheses: bool = False,
        **config_overrides,
    ) -> dict:
        config = RunConfig(
            **{
                **self.defaults.__dict__,
                **{k: v for k, v in config_overrides.items() if v is not None},
            }
        )
        profile = None
        if profile_id:
            profile = self.profiles.get(profile_id)
            if profile is None:
                raise SessionNotFound(f"unknown profile id {profile_id!r}")
        with self._create_lock:
            if self.max_sessions is not None:
                active = sum(1 for s in self.sessions.values() if not s.terminal)
                if active >= self.max_sessions:
                    raise SessionLimitReached(f"{active} active sessions")
            session_id = uuid.uuid4().hex[:12]
            now = time.time()
            persona = persona or Persona()
            session = LiveSession(
                session_id=session_id,
                config=config,
                state=SessionState(),
                profile=profile,
                persona=persona,
                show_hypotheses=show_hypotheses,
                created_at=now,
                updated_at=now,
            )
            self.sessions[session_id] = session
        self._append(
            session_id,
            {
                "event": "created",
                "session_id": session_id,
                "config": config.__dict__,
                "profile_id": profile_id or "",
                "persona": persona.as_dict(),
                "show_hypotheses": show_hypotheses,
                "created_at": now,
            },
        )
        payload: dict = {"session_id": session_id, "status": ACTIVE, "turn": 0}
        if profile is None:
            payload["greeting"] = "Hello, I'm here to help. What brings you in today?"
        else:
            from .orchestration import session_seed

            opening = opening_statement(profile, session.persona, session_seed(config.seed, profile.id))
            self._record_patient(session, opening.text, opening.stance, opening.disclosed, None)
            action_payload = self._step(session)
            payload["opening"] = opening.text
            payload["action"] = action_payload
            payload["status"] = session.state.status
            payload["turn"] = session.state.turn
        return payload

    def _record_patient(self, session, text, stance, disclosed, asked_attribute) -> None:
        state = session.state
        state.history.append(("patient", text))
        state.pending_patient = text
        if disclosed:
            state.ledger.update(stance, tuple(disclosed))
        elif stance == "unknown" and asked_attribute is not None:
            state.ledger.update("unknown", (self.g.name_of(asked_attribute),))
        if asked_attribute is not None:
            state.asked.add(asked_attribute)
        self._append(
            session.session_id,
            {
                "event": "patient",
                "text": text,
                "stance": stance,
                "disclosed": list(disclosed),
                "asked_attribute": asked_attribute,
                "at": time.time(),
            },
        )

    def _step(self, session: LiveSession) -> dict:
        scorer = make_scorer(session.config, self.chat_client, self.score_client)
        verifier = make_verifier(session.config, self.chat_client)
        state = session.state
        action = system_step(self.g, state, session.config, scorer, verifier)
        record = state.records[-1]
        self._append(
            session.session_id,
            {
                "event": "system",
                "kind": action.kind,
                "utterance": state.history[-1][1],
                "action_text": record.action_text,
                "think": record.think,
                "anchors": record.anchors,
                "candidates": record.candidates,
                "subgraph_nodes": record.subgraph_nodes,
                "turn": state.turn,
                "status": state.status,
                "at": time.time(),
            },
        )
        session.updated_at = time.time()
        payload: dict = {"turn": state.turn, "status": state.status, "kind": action.kind}
        if action.kind == QUESTION:
            session.last_question = action.question
            payload["question"] = action.question
        else:
            payload["diagnoses"] = list(action.diagnoses)
        if session.show_hypotheses:
            payload["hypotheses"] = self._hypothesis_panel(session)
        return payload

    def _hypothesis_panel(self, session: LiveSession) -> dict:
        state = session.state
        scores = state.last_scores.scores if state.last_scores else {}
        candidates = state.records[-1].candidates if state.records else []
        ranked = sorted(candidates, key=lambda d: (-scores.get(d, 0.0), d))
        shared: list[str] = []
        if state.last_subgraph is not None and len(ranked) > 1:
            cand = set(ranked)
            for attr in state.last_subgraph.attribute_ids(self.g):
                adjacent = sum(1 for d in self.g.diseases_of(attr) if d in cand)
                if adjacent >= 2:
                    shared.append(self.g.name_of(attr))
        return {
            "diseases": [
                {"name": self.g.name_of(d), "score": round(scores.get(d, 0.0), 6)}
                for d in ranked
            ],
            "shared_attributes": sorted(shared),
        }

    def post_message(self, session_id: str, text: str) -> dict:
        session = self._get(session_id)
        if not session.lock.acquire(blocking=False):
            raise SessionConflict("a step for this session is already in progress")
        try:
            if session.terminal:
                raise SessionConflict(f"session is {session.state.status}")
            if session.profile is not None:
                source = session.last_question or text
                stance, disclosed = question_stance(session.profile, source)
                asked = (
                    match_question_attribute(self.g, session.last_question)
                    if session.last_question
                    else None
                )
            else:
                stance, disclosed, asked = interpret_reply(
                    self.g, session.last_question, text
                )
            self._record_patient(session, text, stance, disclosed, asked)
            return self._step(session)
        finally:
            session.lock.release()

    def get_view(self, session_id: str) -> dict:
        session = self._get(session_id)
        view = {
            "session_id": session.session_id,
            "status": session.state.status,
            "turn": session.state.turn,
            "max_turns": session.config.max_turns,
            "history": [[role, text] for role, text in session.state.history],
            "show_hypotheses": session.show_hypotheses,
            "profile_id": session.profile.id if session.profile else None,
            "ratings": session.ratings,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
        }
        if session.profile is not None and session.terminal:
            view["gold_diseases"] = list(session.profile.gold_diseases)
        return view

    def submit_ratings(self, session_id: str, ratings: dict) -> dict:
        session = self._get(session_id)
        if not session.terminal:
            raise SessionConflict("ratings are accepted only after the session ends")
        clean = {}
        for dimension in ("essentiality", "flow", "authenticity"):
            value = ratings.get(dimension)
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
                raise RatingValidationError(
                    f"{dimension} must be an integer in [1, 5], got {value!r}"
                )
            clean[dimension] = value
        clean["comments"] = str(ratings.get("comments", ""))
        session.ratings = clean
        self._append(session_id, {"event": "rating", "at": time.time(), **clean})
        return {"ok": True}

    def export_transcript(self, session_id: str) -> bytes:
        """Byte-stable transcript document, including any ratings."""
        session = self._get(session_id)
        state = session.state
        transcript = Transcript(
            profile_id=session.profile.id if session.profile else "",
            persona=session.persona.as_dict(),
            gold_ids=(
                [d for d in (self.g.resolve_name(n) for n in session.profile.gold_diseases) if d]
                if session.profile is not None and session.terminal
                else []
            ),
            records=state.records,
            outcome=state.status,
            diagnoses=(
                list(state.final_action.diagnoses)
                if state.status == DIAGNOSED and state.final_action
                else _final_diagnoses(state)
            ),
            diagnoses_resolved=[],
            turns=state.turn,
            grounding=0.0,
        )
        transcript.diagnoses_resolved = [
            self.g.resolve_name(n) for n in transcript.diagnoses
        ]
        doc = {
            "ratings": session.ratings,
            "session": transcript.as_dict(),
            "session_id": session.session_id,
        }
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")

    def _get(self, session_id: str) -> LiveSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionNotFound(f"unknown session {session_id!r}")
        return session


def _final_diagnoses(state: SessionState) -> list[str]:
    if state.records and state.records[-1].action_kind == DIAGNOSIS:
        return [n.strip() for n in state.records[-1].action_text.split(",")]
    return []


class CreateRequest(BaseModel):
    profile_id: str | None = None
    show_hypotheses: bool = False
    n: int | None = None
    tau: float | None = None
    max_turns: int | None = None
    scorer: str | None = None
    verifier: str | None = None
    seed: int | None = None


class MessageRequest(BaseModel):
    text: str


class RatingRequest(BaseModel):
    essentiality: int
    flow: int
    authenticity: int
    comments: str = ""


def create_app(
    manager: SessionManager,
    api_token: str | None = None,
    cors_origin: str = "*",
):
    """FastAPI wrapper over a SessionManager."""
    from fastapi import FastAPI, Header, HTTPException, Response
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="graphdx session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def check_token(authorization: str | None, x_api_token: str | None) -> None:
        if not api_token:
            return
        provided = x_api_token
        if authorization and authorization.startswith("Bearer "):
            provided = authorization.removeprefix("Bearer ")
        if provided != api_token:
            raise HTTPException(status_code=401, detail="invalid or missing API token")

    def run(fn, *args):
        try:
            return fn(*args)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SessionLimitReached as exc:
            raise HTTPException(status_code=429, detail=str(exc))
        except RatingValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/sessions", status_code=201)
    def create_session(
        body: CreateRequest,
        authorization: str | None = Header(default=None),
        x_api_token: str | None = Header(default=None),
    ):
        check_token(authorization, x_api_token)
        return run(
            lambda: manager.create_session(
                profile_id=body.profile_id,
                show_hypotheses=body.show_hypotheses,
                n=body.n,
                tau=body.tau,
                max_turns=body.max_turns,
                scorer=body.scorer,
                verifier=body.verifier,
                seed=body.seed,
            )
        )

    @app.post("/sessions/{session_id}/messages")
    def post_message(
        session_id: str,
        body: MessageRequest,
        authorization: str | None = Header(default=None),
        x_api_token: str | None = Header(default=None),
    ):
        check_token(authorization, x_api_token)
        return run(manager.post_message, session_id, body.text)

    @app.get("/sessions/{session_id}")
    def get_session(
        session_id: str,
        authorization: str | None = Header(default=None),
        x_api_token: str | None = Header(default=None),
    ):
        check_token(authorization, x_api_token)
        return run(manager.get_view, session_id)

    @app.post("/sessions/{session_id}/ratings")
    def post_ratings(
        session_id: str,
        body: RatingRequest,
        authorization: str | None = Header(default=None),
        x_api_token: str | None = Header(default=None),
    ):
        check_token(authorization, x_api_token)
        return run(manager.submit_ratings, session_id, body.model_dump())

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(
        session_id: str,
        authorization: str | None = Header(default=None),
        x_api_token: str | None = Header(default=None),
    ):
        check_token(authorization, x_api_token)
        content = run(manager.export_transcript, session_id)
        return Response(content=content, media_type="application/json")

    return app


def manager_from_env(
    g: KnowledgeGraph,
    profiles: dict[str, PatientProfile],
    data_dir: str | Path,
    defaults: RunConfig | None = None,
) -> SessionManager:
    max_sessions = os.environ.get(ENV_MAX_SESSIONS)
    chat_client = None
    if os.environ.get("GRAPHDX_MODEL_ENDPOINT"):
        from .llm import ChatCompletionClient, EndpointConfig

        chat_client = ChatCompletionClient(EndpointConfig.from_env())
    return SessionManager(
        g,
        profiles,
        data_dir,
        defaults=defaults,
        max_sessions=int(max_sessions) if max_sessions else None,
        chat_client=chat_client,
    )
