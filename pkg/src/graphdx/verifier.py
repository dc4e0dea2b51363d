"""Turn decisions: ask a clarifying question or commit to a diagnosis.

Three backends share one action format. The rule backend is fully
deterministic: it diagnoses once the top candidate clears a confidence
stop (or nothing discriminative is left to ask) and otherwise asks about
the attribute that best splits the current candidate set. The external
backend renders a prompt and parses the model's tagged output. The
confidence-stopping backend renormalizes candidate scores and terminates
once the top-3 mass exceeds a threshold.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .graph import CAUSE, DISEASE, KnowledgeGraph, RISK_FACTOR, SYMPTOM, Subgraph, normalize_name
from .hypotheses import DiseaseScores, EvidenceLedger
from . import assets

QUESTION = "question"
DIAGNOSIS = "diagnosis"

RULE = "rule"
EXTERNAL = "external"
COD = "cod"

QUESTION_TEMPLATES = {
    SYMPTOM: "Have you experienced {name}?",
    RISK_FACTOR: "Do you have {name} or a history of it?",
    CAUSE: "Have you been exposed to {name}?",
}


class ActionParseError(ValueError):
    """Base class for malformed verifier output."""


class MissingThinkError(ActionParseError):
    pass


class ActionCountError(ActionParseError):
    """Zero action blocks, or more than one."""


class EmptyActionError(ActionParseError):
    """An action block with an empty payload."""


class EmptyCandidateError(ValueError):
    """The subgraph contributed no candidate diseases to decide over."""


@dataclass(frozen=True)
class VerifierAction:
    think: str
    kind: str
    question: str | None = None
    diagnoses: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind == QUESTION:
            if not self.question or self.diagnoses is not None:
                raise ValueError("question action must carry question text only")
        elif self.kind == DIAGNOSIS:
            if self.question is not None or not self.diagnoses:
                raise ValueError("diagnosis action must carry diagnoses only")
            if not 1 <= len(self.diagnoses) <= 4:
                raise ValueError("diagnosis list must have 1-4 entries")
        else:
            raise ValueError(f"unknown action kind {self.kind!r}")


@dataclass(frozen=True)
class VerifierConfig:
    backend: str = RULE
    stop_confidence: float = 0.9
    cod_threshold: float = 0.5
    cod_top: int = 20
    max_diagnoses: int = 4

    def __post_init__(self):
        if not 0.0 <= self.stop_confidence <= 1.0:
            raise ValueError("stop_confidence must be in [0, 1]")
        if not 0.0 <= self.cod_threshold <= 1.0:
            raise ValueError("cod_threshold must be in [0, 1]")


def render_dialogue(history: list[tuple[str, str]]) -> str:
    lines = []
    for role, text in history:
        speaker = "Patient" if role == "patient" else "Doctor"
        lines.append(f"{speaker}: {text}")
    return "\n".join(lines)


def render_hv_prompt(history: list[tuple[str, str]], statements: list[str]) -> str:
    """Fill the verifier prompt template with the linearized subgraph and history."""
    return assets.prompt("verifier").format(
        subgraph="\n".join(statements),
        dialogue=render_dialogue(history),
    )


_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ACTION_RE = re.compile(r"<(question|diagnosis)>(.*?)</\1>", re.DOTALL)


def parse_action(raw: str, max_diagnoses: int = 4) -> VerifierAction:
    """Parse tagged model output into a VerifierAction.

    Requires one <think> block followed by exactly one action block.
    Diagnosis payloads are split on commas, trimmed, and truncated to
    ``max_diagnoses``. Each failure mode raises its own error type so a
    caller can decide whether to re-prompt.
    """
    think_match = _THINK_RE.search(raw)
    if think_match is None:
        raise MissingThinkError("no <think>...</think> block found")
    tail = raw[think_match.end():]
    actions = _ACTION_RE.findall(tail)
    if len(actions) == 0:
        raise ActionCountError("no <question> or <diagnosis> block found")
    if len(actions) > 1:
        raise ActionCountError(f"expected one action block, found {len(actions)}")
    kind, payload = actions[0]
    payload = payload.strip()
    if kind == QUESTION:
        if not payload:
            raise EmptyActionError("empty question payload")
        return VerifierAction(think=think_match.group(1).strip(), kind=QUESTION, question=payload)
    names = [part.strip() for part in payload.split(",") if part.strip()]
    if not names:
        raise EmptyActionError("empty diagnosis payload")
    return VerifierAction(
        think=think_match.group(1).strip(),
        kind=DIAGNOSIS,
        diagnoses=tuple(names[:max_diagnoses]),
    )


def format_action(action: VerifierAction) -> str:
    """Inverse of parse_action for well-formed actions."""
    if action.kind == QUESTION:
        body = f"<question> {action.question} </question>"
    else:
        body = f"<diagnosis> {', '.join(action.diagnoses)} </diagnosis>"
    return f"<think> {action.think} </think> {body}"


def resolve_diagnoses(
    names: list[str] | tuple[str, ...],
    g: KnowledgeGraph,
) -> tuple[list[str], list[str]]:
    """Split diagnosis names into resolved disease ids and unresolved names.

    Matching is normalized-exact against the graph's name index; a name
    that matches a non-disease node stays unresolved (a symptom cannot be
    a diagnosis). Order is preserved on both sides.
    """
    resolved: list[str] = []
    unresolved: list[str] = []
    for name in names:
        node_id = g.resolve_name(name)
        if node_id is not None and g.node(node_id).kind == DISEASE:
            resolved.append(node_id)
        else:
            unresolved.append(name)
    return resolved, unresolved


def _ranked_candidates(sub: Subgraph, scores: DiseaseScores) -> list[str]:
    candidates = list(dict.fromkeys(list(sub.anchor_ids) + list(sub.competing_ids)))
    return sorted(candidates, key=lambda d: (-scores.scores.get(d, 0.0), d))


def _diagnosis_action(
    g: KnowledgeGraph,
    ranked: list[str],
    reason: str,
    max_diagnoses: int,
) -> VerifierAction:
    names = tuple(g.name_of(d) for d in ranked[:max_diagnoses])
    think = f"{reason} Final ranking: {', '.join(names)}."
    return VerifierAction(think=think, kind=DIAGNOSIS, diagnoses=names)


def rule_decide(
    sub: Subgraph,
    scores: DiseaseScores,
    ledger: EvidenceLedger,
    asked: set[str],
    config: VerifierConfig,
    g: KnowledgeGraph,
    force_diagnosis: bool = False,
) -> VerifierAction:
    """Deterministic decision over the current subgraph.

    Diagnoses when the top candidate's score reaches the confidence stop,
    when no unasked discriminative attribute remains, or when the
    orchestrator signals the turn limit; the diagnosis lists the top-4
    candidates by score (ties by id). Otherwise asks about the unasked
    attribute maximizing p*(1-p), where p is the fraction of candidates
    adjacent to it; ties resolve to the higher graph-wide degree, then the
    ascending id.
    """
    ranked = _ranked_candidates(sub, scores)
    if not ranked:
        raise EmptyCandidateError("subgraph has no candidate diseases")
    names = ", ".join(g.name_of(d) for d in ranked)
    if force_diagnosis:
        return _diagnosis_action(
            g, ranked, f"Turn limit reached while weighing {names}.", config.max_diagnoses
        )
    if len(ranked) == 1:
        return _diagnosis_action(
            g, ranked, f"Only {names} remains under consideration.", config.max_diagnoses
        )
    top_score = scores.scores.get(ranked[0], 0.0)
    if top_score >= config.stop_confidence:
        return _diagnosis_action(
            g,
            ranked,
            f"Confidence in {g.name_of(ranked[0])} reached {top_score:.3f}.",
            config.max_diagnoses,
        )

    candidate_set = set(ranked)
    stanced = ledger.stanced()
    best: tuple | None = None
    for attr in sub.attribute_ids(g):
        if attr in asked or normalize_name(g.name_of(attr)) in stanced:
            continue
        adjacent = sum(1 for d in g.diseases_of(attr) if d in candidate_set)
        p = adjacent / len(candidate_set)
        gain = p * (1.0 - p)
        if gain <= 0.0:
            continue
        key = (-gain, -len(g.diseases_of(attr)), attr)
        if best is None or key < best[0]:
            best = (key, attr, adjacent)
    if best is None:
        return _diagnosis_action(
            g,
            ranked,
            f"No unasked attribute separates {names} any further.",
            config.max_diagnoses,
        )

    _, attr, adjacent = best
    node = g.node(attr)
    question = QUESTION_TEMPLATES[node.kind].format(name=node.name)
    think = (
        f"Weighing {names}. Asking about {node.name} "
        f"({adjacent} of {len(candidate_set)} candidates show it)."
    )
    return VerifierAction(think=think, kind=QUESTION, question=question)


def cod_confidence(scores: DiseaseScores, cod_top: int) -> tuple[float, list[str]]:
    """Normalized top-3 mass over the top ``cod_top`` candidates.

    Computed as sum(top-3 raw) / sum(all retained raw), which equals the
    top-3 sum after renormalizing to 1 and is invariant under positive
    rescaling of the scores.
    """
    ranked = sorted(scores.scores.items(), key=lambda kv: (-kv[1], kv[0]))[:cod_top]
    total = sum(s for _, s in ranked)
    if total <= 0.0:
        return 0.0, [d for d, _ in ranked]
    top3 = sum(s for _, s in ranked[:3])
    return top3 / total, [d for d, _ in ranked]


def cod_decide(
    scores: DiseaseScores,
    config: VerifierConfig,
    g: KnowledgeGraph,
) -> VerifierAction | None:
    """Confidence-threshold stopping: diagnose or signal continue (None).

    Stops once the normalized top-3 confidence strictly exceeds the
    threshold (fewer than 3 candidates use all available); the caller
    produces the next question when None is returned.
    """
    confidence, candidates = cod_confidence(scores, config.cod_top)
    if confidence > config.cod_threshold:
        names = tuple(g.name_of(d) for d in candidates[: config.max_diagnoses])
        think = (
            f"Top-3 confidence {confidence:.3f} exceeds {config.cod_threshold:.2f}; "
            f"finalizing."
        )
        return VerifierAction(think=think, kind=DIAGNOSIS, diagnoses=names)
    return None


def render_cod_context(g: KnowledgeGraph, candidate_ids: list[str]) -> str:
    """Disease-centric context: each candidate's 1-hop attributes as lists."""
    from .hypotheses import disease_document

    return "\n\n".join(disease_document(g, d) for d in candidate_ids)


def match_question_attribute(g: KnowledgeGraph, question: str) -> str | None:
    """Best-effort map from question text to the graph attribute it asks about.

    Earliest mention wins, longer names break position ties. Returns None
    when no attribute name occurs in the question.
    """
    haystack = f" {normalize_name(question)} "
    best: tuple[int, int, str] | None = None
    for node in g.nodes:
        if node.kind == DISEASE:
            continue
        needle = normalize_name(node.name)
        if needle and needle in haystack:
            key = (haystack.index(needle), -len(needle), node.id)
            if best is None or key < best:
                best = key
    return best[2] if best else None
