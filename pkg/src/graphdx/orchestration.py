"""The session turn loop and training-data generation on top of it.

One turn = one system response (a clarifying question or the final
diagnosis; the diagnosis response counts). Each turn re-scores every
disease from the evidence ledger, selects anchors, expands the thresholded
subgraph, and lets the verifier backend decide. Sessions end diagnosed, or
as a turn-limit failure when the verifier is still asking at the cap.

Also here: synthetic dialogue generation against a clinician endpoint that
secretly knows the gold diseases, emission of parseable training examples
per clinician turn, and truncation augmentation that cuts finished
dialogues into prefixes for training a scorer on partial histories.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Protocol

from .graph import (
    KnowledgeGraph,
    Subgraph,
    expand_oracle_subgraph,
    expand_subgraph,
    grounding_ratio,
    linearize,
    normalize_name,
)
from .hypotheses import (
    DiseaseScores,
    EvidenceLedger,
    evidence_scores,
    retrieval_scores,
    select_anchors,
)
from .profiles import PatientProfile, Persona, sample_persona
from .simulator import PatientReply, answer, opening_statement, stable_rng
from .verifier import (
    ActionParseError,
    DIAGNOSIS,
    EmptyCandidateError,
    QUESTION,
    VerifierAction,
    VerifierConfig,
    cod_decide,
    format_action,
    match_question_attribute,
    parse_action,
    render_cod_context,
    render_hv_prompt,
    resolve_diagnoses,
    rule_decide,
)

SCHEMA_VERSION = 1

ACTIVE = "active"
DIAGNOSED = "diagnosed"
TURN_LIMIT_FAILURE = "turn_limit_failure"
ERROR = "error"

TIER_HIGH = "high"
TIER_MODERATE = "moderate"
TIER_LOW = "low"


class SchemaMismatchError(ValueError):
    """Transcript record with an unsupported schema version."""


@dataclass
class RunConfig:
    n: int = 2
    tau: float = 0.005
    max_turns: int = 50
    scorer: str = "evidence"
    verifier: str = "rule"
    stop_confidence: float = 0.9
    cod_threshold: float = 0.5
    cod_top: int = 20
    max_diagnoses: int = 4
    seed: int = 0
    parse_retries: int = 2

    def __post_init__(self):
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")

    def verifier_config(self) -> VerifierConfig:
        return VerifierConfig(
            backend=self.verifier,
            stop_confidence=self.stop_confidence,
            cod_threshold=self.cod_threshold,
            cod_top=self.cod_top,
            max_diagnoses=self.max_diagnoses,
        )


@dataclass
class TurnRecord:
    patient: str
    anchors: list[str]
    candidates: list[str]
    subgraph_nodes: int
    action_kind: str
    action_text: str
    think: str

    def as_dict(self) -> dict:
        return {
            "action_kind": self.action_kind,
            "action_text": self.action_text,
            "anchors": list(self.anchors),
            "candidates": list(self.candidates),
            "patient": self.patient,
            "subgraph_nodes": self.subgraph_nodes,
            "think": self.think,
        }


@dataclass
class SessionState:
    """Mutable per-session state; confined to one logical worker."""

    history: list[tuple[str, str]] = field(default_factory=list)
    ledger: EvidenceLedger = field(default_factory=EvidenceLedger)
    asked: set[str] = field(default_factory=set)
    turn: int = 0
    status: str = ACTIVE
    last_scores: DiseaseScores | None = None
    last_anchors: list[str] = field(default_factory=list)
    last_subgraph: Subgraph | None = None
    final_action: VerifierAction | None = None
    records: list[TurnRecord] = field(default_factory=list)
    pending_patient: str = ""

    def add_patient(self, g: KnowledgeGraph, reply: PatientReply,
                    asked_attribute: str | None = None) -> None:
        """Append a patient utterance and fold its stance into the ledger."""
        self.history.append(("patient", reply.text))
        self.pending_patient = reply.text
        if reply.disclosed:
            self.ledger.update(reply.stance, reply.disclosed)
        elif reply.stance == "unknown" and asked_attribute is not None:
            self.ledger.update("unknown", (g.name_of(asked_attribute),))


class ScorerBackend(Protocol):
    def score(self, g: KnowledgeGraph, history: list[tuple[str, str]],
              ledger: EvidenceLedger) -> DiseaseScores: ...


class EvidenceScorer:
    def score(self, g, history, ledger):
        return evidence_scores(g, ledger)


class RetrievalScorer:
    def __init__(self, similarity=None):
        self.similarity = similarity

    def score(self, g, history, ledger):
        if self.similarity is None:
            return retrieval_scores(g, ledger)
        return retrieval_scores(g, ledger, similarity=self.similarity)


class ExternalScorer:
    def __init__(self, client):
        self.client = client

    def score(self, g, history, ledger):
        from .llm import external_scores

        return external_scores(self.client, g, history)


class RuleVerifier:
    def __init__(self, config: VerifierConfig):
        self.config = config

    def decide(self, g, sub, scores, ledger, asked, history, force):
        return rule_decide(sub, scores, ledger, asked, self.config, g, force_diagnosis=force)


class ExternalVerifier:
    """Prompt the model endpoint; re-prompt on parse errors, then force.

    After the retry budget is spent the session must still terminate, so
    the fallback is a diagnosis from the current scores.
    """

    def __init__(self, chat_client, config: VerifierConfig, parse_retries: int = 2):
        self.client = chat_client
        self.config = config
        self.parse_retries = parse_retries

    def decide(self, g, sub, scores, ledger, asked, history, force):
        statements = linearize(sub, g)
        prompt = render_hv_prompt(history, statements)
        last_error: ActionParseError | None = None
        for _ in range(self.parse_retries + 1):
            raw = self.client.complete_user(prompt)
            try:
                return parse_action(raw, max_diagnoses=self.config.max_diagnoses)
            except ActionParseError as exc:
                last_error = exc
        return _forced_diagnosis(g, scores, self.config.max_diagnoses,
                                 f"model output unparseable ({last_error})")


class CodVerifier:
    """Confidence-threshold stopping over the top retrieved candidates.

    When the confidence is below the threshold, the next question comes
    from the chat endpoint given disease-centric context, or, without an
    endpoint, from the deterministic best-split attribute over the top-3
    candidates.
    """

    def __init__(self, config: VerifierConfig, chat_client=None, parse_retries: int = 2):
        self.config = config
        self.client = chat_client
        self.parse_retries = parse_retries

    def decide(self, g, sub, scores, ledger, asked, history, force):
        action = cod_decide(scores, self.config, g)
        if action is not None:
            return action
        ranked = sorted(scores.scores.items(), key=lambda kv: (-kv[1], kv[0]))
        candidates = [d for d, _ in ranked[: self.config.cod_top]]
        if force:
            return _forced_diagnosis(g, scores, self.config.max_diagnoses, "turn limit")
        if self.client is not None:
            context = render_cod_context(g, candidates)
            prompt = render_hv_prompt(history, [context])
            for _ in range(self.parse_retries + 1):
                raw = self.client.complete_user(prompt)
                try:
                    return parse_action(raw, max_diagnoses=self.config.max_diagnoses)
                except ActionParseError:
                    continue
            return _forced_diagnosis(g, scores, self.config.max_diagnoses, "unparseable")
        return _question_over(g, candidates[:3], ledger, asked, scores)


def _forced_diagnosis(g, scores: DiseaseScores, max_diagnoses: int, reason: str) -> VerifierAction:
    ranked = sorted(scores.scores.items(), key=lambda kv: (-kv[1], kv[0]))
    names = tuple(g.name_of(d) for d, _ in ranked[:max_diagnoses])
    return VerifierAction(
        think=f"Falling back to the score ranking: {reason}.",
        kind=DIAGNOSIS,
        diagnoses=names,
    )


def _question_over(g, candidates, ledger, asked, scores) -> VerifierAction:
    """Best-split question over an explicit candidate list."""
    pool: set[str] = set()
    for d in candidates:
        pool.update(g.attributes_of(d))
    stanced = ledger.stanced()
    candidate_set = set(candidates)
    best = None
    for attr in sorted(pool):
        if attr in asked or normalize_name(g.name_of(attr)) in stanced:
            continue
        adjacent = sum(1 for d in g.diseases_of(attr) if d in candidate_set)
        p = adjacent / len(candidate_set)
        gain = p * (1 - p)
        if gain <= 0:
            continue
        key = (-gain, -len(g.diseases_of(attr)), attr)
        if best is None or key < best[0]:
            best = (key, attr)
    if best is None:
        return _forced_diagnosis(g, scores, 4, "no discriminative attribute")
    from .verifier import QUESTION_TEMPLATES

    node = g.node(best[1])
    return VerifierAction(
        think=f"Probing {node.name} across the retrieved candidates.",
        kind=QUESTION,
        question=QUESTION_TEMPLATES[node.kind].format(name=node.name),
    )


def make_scorer(config: RunConfig, chat_client=None, score_client=None) -> ScorerBackend:
    if config.scorer == "evidence":
        return EvidenceScorer()
    if config.scorer == "retrieval":
        return RetrievalScorer()
    if config.scorer == "external":
        if score_client is None:
            raise ValueError("external scorer requires a score endpoint client")
        return ExternalScorer(score_client)
    raise ValueError(f"unknown scorer backend {config.scorer!r}")


def make_verifier(config: RunConfig, chat_client=None):
    vconf = config.verifier_config()
    if config.verifier == "rule":
        return RuleVerifier(vconf)
    if config.verifier == "external":
        if chat_client is None:
            raise ValueError("external verifier requires a chat endpoint client")
        return ExternalVerifier(chat_client, vconf, config.parse_retries)
    if config.verifier == "cod":
        return CodVerifier(vconf, chat_client, config.parse_retries)
    raise ValueError(f"unknown verifier backend {config.verifier!r}")


def diagnosis_utterance(action: VerifierAction) -> str:
    return "The most likely diagnoses are: " + ", ".join(action.diagnoses) + "."


def system_step(
    g: KnowledgeGraph,
    state: SessionState,
    config: RunConfig,
    scorer: ScorerBackend,
    verifier,
) -> VerifierAction:
    """Produce one system response: score, anchor, expand, decide, record."""
    scores = scorer.score(g, state.history, state.ledger)
    anchors = select_anchors(scores, config.n)
    sub = expand_subgraph(g, anchors, scores.scores, config.tau)
    force = state.turn + 1 >= config.max_turns
    try:
        action = verifier.decide(
            g=g, sub=sub, scores=scores, ledger=state.ledger,
            asked=state.asked, history=state.history, force=force,
        )
    except EmptyCandidateError:
        action = _forced_diagnosis(g, scores, config.max_diagnoses, "empty candidate set")

    state.turn += 1
    state.last_scores = scores
    state.last_anchors = anchors
    state.last_subgraph = sub
    utterance = action.question if action.kind == QUESTION else diagnosis_utterance(action)
    state.history.append(("system", utterance))
    state.records.append(
        TurnRecord(
            patient=state.pending_patient,
            anchors=list(anchors),
            candidates=sorted(set(sub.anchor_ids) | set(sub.competing_ids)),
            subgraph_nodes=len(sub.node_ids),
            action_kind=action.kind,
            action_text=utterance if action.kind == QUESTION else ", ".join(action.diagnoses),
            think=action.think,
        )
    )
    if action.kind == DIAGNOSIS:
        state.status = DIAGNOSED
        state.final_action = action
    elif state.turn >= config.max_turns:
        state.status = TURN_LIMIT_FAILURE
    return action


@dataclass
class Transcript:
    profile_id: str
    persona: dict
    gold_ids: list[str]
    records: list[TurnRecord]
    outcome: str
    diagnoses: list[str]
    diagnoses_resolved: list[str | None]
    turns: int
    grounding: float
    schema_version: int = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return {
            "diagnoses": list(self.diagnoses),
            "diagnoses_resolved": list(self.diagnoses_resolved),
            "gold_ids": list(self.gold_ids),
            "grounding": self.grounding,
            "outcome": self.outcome,
            "persona": dict(sorted(self.persona.items())),
            "profile_id": self.profile_id,
            "records": [r.as_dict() for r in self.records],
            "schema_version": self.schema_version,
            "turns": self.turns,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Transcript":
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaMismatchError(
                f"transcript schema {version!r} unsupported (expected {SCHEMA_VERSION})"
            )
        return cls(
            profile_id=doc["profile_id"],
            persona=dict(doc["persona"]),
            gold_ids=list(doc["gold_ids"]),
            records=[
                TurnRecord(
                    patient=r["patient"],
                    anchors=list(r["anchors"]),
                    candidates=list(r["candidates"]),
                    subgraph_nodes=r["subgraph_nodes"],
                    action_kind=r["action_kind"],
                    action_text=r["action_text"],
                    think=r["think"],
                )
                for r in doc["records"]
            ],
            outcome=doc["outcome"],
            diagnoses=list(doc["diagnoses"]),
            diagnoses_resolved=list(doc["diagnoses_resolved"]),
            turns=doc["turns"],
            grounding=doc["grounding"],
        )


class RulePatient:
    """Deterministic simulator backend bound to one profile and persona."""

    def __init__(self, profile: PatientProfile, persona: Persona, seed):
        self.profile = profile
        self.persona = persona
        self.seed = seed

    def opening(self) -> PatientReply:
        return opening_statement(self.profile, self.persona, self.seed)

    def reply(self, question: str) -> PatientReply:
        return answer(self.profile, self.persona, question, self.seed)


class ModelPatient:
    """Model-backed patient: text from the endpoint, stance from the profile."""

    def __init__(self, chat_client, profile: PatientProfile, persona: Persona, seed):
        self.client = chat_client
        self.profile = profile
        self.persona = persona
        self.seed = seed
        self._rule = RulePatient(profile, persona, seed)

    def opening(self) -> PatientReply:
        return self._rule.opening()

    def reply(self, question: str) -> PatientReply:
        from .simulator import question_stance, render_patient_prompt

        prompt = render_patient_prompt(self.profile, self.persona, [])
        text = self.client.complete(
            [
                {"role": "system", "content": prompt},
                {"role": "user", "content": question},
            ]
        )
        stance, disclosed = question_stance(self.profile, question)
        return PatientReply(text=text, disclosed=disclosed, stance=stance)


def session_seed(run_seed, profile_id: str) -> int:
    """Fan one run-level seed out to a stable per-session seed."""
    return stable_rng(run_seed, profile_id, "session").getrandbits(63)


def run_session(
    g: KnowledgeGraph,
    profile: PatientProfile,
    persona: Persona,
    config: RunConfig,
    scorer: ScorerBackend | None = None,
    verifier=None,
    patient=None,
) -> Transcript:
    """Run one full session: opening, then question/answer until terminal."""
    seed = session_seed(config.seed, profile.id)
    scorer = scorer or make_scorer(config)
    verifier = verifier or make_verifier(config)
    patient = patient or RulePatient(profile, persona, seed)

    state = SessionState()
    state.add_patient(g, patient.opening())
    error_note = ""
    while state.status == ACTIVE:
        try:
            action = system_step(g, state, config, scorer, verifier)
        except Exception as exc:  # backend failure after its own retries
            state.status = ERROR
            error_note = repr(exc)
            break
        if state.status != ACTIVE:
            break
        asked_attr = match_question_attribute(g, action.question)
        if asked_attr is not None:
            state.asked.add(asked_attr)
        reply = patient.reply(action.question)
        state.add_patient(g, reply, asked_attribute=asked_attr)

    if state.status == DIAGNOSED and state.final_action is not None:
        names = list(state.final_action.diagnoses)
    else:
        names = []
    resolved_positions: list[str | None] = []
    for name in names:
        node_id = g.resolve_name(name)
        if node_id is not None and g.node(node_id).kind == "disease":
            resolved_positions.append(node_id)
        else:
            resolved_positions.append(None)
    gold_ids, _ = resolve_diagnoses(list(profile.gold_diseases), g)
    records = state.records
    if error_note:
        records = records + [
            TurnRecord(
                patient=state.pending_patient, anchors=[], candidates=[],
                subgraph_nodes=0, action_kind="error", action_text=error_note, think="",
            )
        ]
    return Transcript(
        profile_id=profile.id,
        persona=persona.as_dict(),
        gold_ids=gold_ids,
        records=records,
        outcome=state.status,
        diagnoses=names,
        diagnoses_resolved=resolved_positions,
        turns=state.turn,
        grounding=float(grounding_ratio(g, profile)),
    )


def run_batch(
    g: KnowledgeGraph,
    profiles: list[PatientProfile],
    config: RunConfig,
    persona: Persona | None = None,
    **backends,
) -> list[Transcript]:
    """Run one session per profile; personas sampled from the run seed
    unless a fixed persona is supplied."""
    transcripts = []
    for profile in profiles:
        p = persona or sample_persona(stable_rng(config.seed, profile.id, "persona"))
        transcripts.append(run_session(g, profile, p, config, **backends))
    return transcripts


def write_transcripts(path: str | Path, transcripts: list[Transcript]) -> None:
    lines = [json.dumps(t.as_dict(), sort_keys=True) for t in transcripts]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_transcripts(path: str | Path) -> list[Transcript]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(Transcript.from_dict(json.loads(line)))
    return out


def tier_for(gamma) -> str:
    """Instruction tier for a grounding ratio.

    Boundaries are exact decimals: high means gamma >= 7/10, low means
    gamma <= 3/10, moderate lies strictly between. Float inputs are
    compared exactly (a float's true value decides the side of the
    boundary), so exact ratios like Fraction(7, 10) land on "high" while
    the nearest float below the boundary does not.
    """
    value = Fraction(gamma)
    if not 0 <= value <= 1:
        raise ValueError(f"grounding ratio must be in [0, 1], got {gamma}")
    if value >= Fraction(7, 10):
        return TIER_HIGH
    if value > Fraction(3, 10):
        return TIER_MODERATE
    return TIER_LOW


@dataclass(frozen=True)
class SyntheticExample:
    """One supervised example: verifier-shaped input, tagged-action target."""

    instruction: str
    history: tuple[tuple[str, str], ...]
    statements: tuple[str, ...]
    target: str
    tier: str

    def __post_init__(self):
        parse_action(self.target)  # targets must round-trip

    def as_dict(self) -> dict:
        return {
            "input": {
                "history": [[role, text] for role, text in self.history],
                "instruction": self.instruction,
                "statements": list(self.statements),
            },
            "target": self.target,
            "tier": self.tier,
        }


class UnresolvableGoldError(ValueError):
    """Profile gold diseases cannot be mapped onto the graph."""


class ScriptedClinician:
    """Deterministic stand-in for the synthetic-dialogue clinician model.

    Knows the gold diseases (like the prompted model would), asks a few of
    their unexplored attributes, then diagnoses with gold first, padded to
    four names with competing diseases from the oracle subgraph.
    """

    def __init__(self, g: KnowledgeGraph, gold_ids: list[str], oracle: Subgraph,
                 questions: int = 3):
        self.g = g
        self.gold_ids = gold_ids
        self.oracle = oracle
        self.max_questions = questions
        self._asked: list[str] = []

    def respond(self, prompt: str, history: list[tuple[str, str]]) -> str:
        from .verifier import QUESTION_TEMPLATES

        g = self.g
        gold_names = [g.name_of(d) for d in self.gold_ids]
        remaining = [
            a
            for d in self.gold_ids
            for a in g.attributes_of(d)
            if a not in self._asked
        ]
        suspects = ", ".join(
            gold_names + [g.name_of(d) for d in self.oracle.competing_ids[:1]]
        )
        if remaining and len(self._asked) < self.max_questions:
            attr = remaining[0]
            self._asked.append(attr)
            node = g.node(attr)
            think = (
                f"Suspecting {suspects}; checking {node.name} against the graph "
                f"before narrowing further."
            )
            question = QUESTION_TEMPLATES[node.kind].format(name=node.name)
            return f"<think> {think} </think> <question> {question} </question>"
        padding = [g.name_of(d) for d in self.oracle.competing_ids if d not in self.gold_ids]
        names = (gold_names + padding)[:4]
        think = f"Evidence gathered on {suspects}; committing to a final ranking."
        return f"<think> {think} </think> <diagnosis> {', '.join(names)} </diagnosis>"


def scripted_clinician_for(g: KnowledgeGraph, profile: PatientProfile,
                           questions: int = 3) -> ScriptedClinician:
    gold_ids, unresolved = resolve_diagnoses(list(profile.gold_diseases), g)
    if not gold_ids or unresolved:
        raise UnresolvableGoldError(
            f"profile {profile.id!r}: unmappable gold diseases {unresolved}"
        )
    return ScriptedClinician(g, gold_ids, expand_oracle_subgraph(g, gold_ids), questions)


def generate_synthetic_dialogue(
    profile: PatientProfile,
    g: KnowledgeGraph,
    clinician,
    patient,
    seed,
    max_turns: int = 50,
) -> tuple[Transcript, list[SyntheticExample]]:
    """Generate one training dialogue conditioned on a profile.

    The clinician side sees the gold diseases, the grounding ratio, and the
    oracle subgraph (unfiltered expansion from gold); each of its turns is
    emitted as a SyntheticExample whose tier follows the grounding ratio.
    The final action must be a diagnosis listing gold first; a generated
    list violating that is repaired by prepending the gold names.
    """
    gold_ids, unresolved = resolve_diagnoses(list(profile.gold_diseases), g)
    if not gold_ids or unresolved:
        raise UnresolvableGoldError(
            f"profile {profile.id!r}: unmappable gold diseases {unresolved}"
        )
    oracle = expand_oracle_subgraph(g, gold_ids)
    statements = linearize(oracle, g)
    gamma = grounding_ratio(g, profile)
    tier = tier_for(gamma)
    gold_names = [g.name_of(d) for d in gold_ids]
    instruction = assets_instruction()

    state = SessionState()
    state.add_patient(g, patient.opening())
    examples: list[SyntheticExample] = []
    template = _generation_template()
    action: VerifierAction | None = None
    while state.status == ACTIVE:
        prompt = template.format(
            max_turn=max_turns,
            gold_disease=", ".join(gold_names),
            relevance_score=f"{float(gamma):.2f}",
            subgraph="\n".join(statements),
            dialogue=_dialogue_text(state.history),
            dialogue_length=len(state.history),
        )
        raw = clinician.respond(prompt, state.history)
        action = parse_action(raw)
        force = state.turn + 1 >= max_turns
        if action.kind == DIAGNOSIS or force:
            if action.kind != DIAGNOSIS:
                action = VerifierAction(
                    think=action.think, kind=DIAGNOSIS, diagnoses=tuple(gold_names[:4])
                )
            ordered = list(action.diagnoses)
            if [normalize_name(n) for n in ordered[: len(gold_names)]] != [
                normalize_name(n) for n in gold_names
            ]:
                rest = [n for n in ordered if normalize_name(n) not in
                        {normalize_name(x) for x in gold_names}]
                ordered = (gold_names + rest)[:4]
                action = replace(action, diagnoses=tuple(ordered))
            state.turn += 1
            state.history.append(("system", diagnosis_utterance(action)))
            state.records.append(
                TurnRecord(
                    patient=state.pending_patient,
                    anchors=list(gold_ids),
                    candidates=sorted(set(oracle.anchor_ids) | set(oracle.competing_ids)),
                    subgraph_nodes=len(oracle.node_ids),
                    action_kind=DIAGNOSIS,
                    action_text=", ".join(action.diagnoses),
                    think=action.think,
                )
            )
            state.status = DIAGNOSED
            state.final_action = action
            examples.append(
                SyntheticExample(
                    instruction=instruction,
                    history=tuple(state.history[:-1]),
                    statements=tuple(statements),
                    target=format_action(action),
                    tier=tier,
                )
            )
            break
        state.turn += 1
        state.history.append(("system", action.question))
        state.records.append(
            TurnRecord(
                patient=state.pending_patient,
                anchors=list(gold_ids),
                candidates=sorted(set(oracle.anchor_ids) | set(oracle.competing_ids)),
                subgraph_nodes=len(oracle.node_ids),
                action_kind=QUESTION,
                action_text=action.question,
                think=action.think,
            )
        )
        examples.append(
            SyntheticExample(
                instruction=instruction,
                history=tuple(state.history[:-1]),
                statements=tuple(statements),
                target=format_action(action),
                tier=tier,
            )
        )
        reply = patient.reply(action.question)
        asked_attr = match_question_attribute(g, action.question)
        state.add_patient(g, reply, asked_attribute=asked_attr)

    transcript = Transcript(
        profile_id=profile.id,
        persona=patient.persona.as_dict() if hasattr(patient, "persona") else {},
        gold_ids=gold_ids,
        records=state.records,
        outcome=state.status,
        diagnoses=list(state.final_action.diagnoses) if state.final_action else [],
        diagnoses_resolved=[
            g.resolve_name(n) for n in (state.final_action.diagnoses if state.final_action else [])
        ],
        turns=state.turn,
        grounding=float(gamma),
    )
    return transcript, examples


def assets_instruction() -> str:
    """Static instruction header shared by training inputs (the decision
    prompt without its per-turn inputs)."""
    from . import assets

    template = assets.prompt("verifier")
    return template.split("Inputs")[0].rstrip()


def _generation_template() -> str:
    from . import assets

    return assets.prompt("dialogue_generation")


def _dialogue_text(history: list[tuple[str, str]]) -> str:
    from .verifier import render_dialogue

    return render_dialogue(history)


@dataclass(frozen=True)
class TruncatedDialogue:
    """A strict history prefix ending after a patient utterance, labeled
    with the session's gold diseases."""

    profile_id: str
    history: tuple[tuple[str, str], ...]
    gold_ids: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "gold_ids": list(self.gold_ids),
            "history": [[role, text] for role, text in self.history],
            "profile_id": self.profile_id,
        }


def rebuild_history(transcript: Transcript) -> list[tuple[str, str]]:
    """Alternating (patient, system) utterances recovered from turn records."""
    history: list[tuple[str, str]] = []
    for record in transcript.records:
        history.append(("patient", record.patient))
        if record.action_kind == QUESTION:
            history.append(("system", record.action_text))
        else:
            history.append(("system", "The most likely diagnoses are: " + record.action_text + "."))
    return history


def truncate_variants(
    transcript: Transcript,
    fraction: float = 0.2,
    seed=0,
) -> list[TruncatedDialogue]:
    """Cut a finished dialogue into random prefixes for partial-history training.

    With T system turns, emits max(1, floor(fraction * T)) variants, capped
    at T - 1 (so T = 1 yields none); truncation points are drawn uniformly
    without replacement from {1, ..., T-1}, and the variant at point k
    keeps everything through the patient utterance following system turn k.
    """
    T = transcript.turns
    if T <= 1:
        return []
    count = min(max(1, math.floor(fraction * T)), T - 1)
    rng = stable_rng(seed, transcript.profile_id, "truncate")
    points = sorted(rng.sample(range(1, T), count))
    history = rebuild_history(transcript)
    variants = []
    for k in points:
        prefix = tuple(history[: 2 * k + 1])
        variants.append(
            TruncatedDialogue(
                profile_id=transcript.profile_id,
                history=prefix,
                gold_ids=tuple(transcript.gold_ids),
            )
        )
    return variants
