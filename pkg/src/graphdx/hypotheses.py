"""Disease scoring and anchor selection.

Three interchangeable scorers produce a probability per disease from the
dialogue so far: a deterministic evidence counter (logistic over confirmed
minus denied attribute matches), a retrieval scorer with denial-penalty
reranking over injected similarity functions, and a client for an external
model endpoint. Anchor selection and subgraph expansion sit on top and are
scorer-agnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import KnowledgeGraph, Subgraph, expand_subgraph, normalize_name

EVIDENCE = "evidence"
RETRIEVAL = "retrieval"
EXTERNAL = "external"

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 1.0
DEFAULT_BIAS = -6.0
DEFAULT_RERANK_PENALTY = 0.3


@dataclass
class EvidenceLedger:
    """Accumulated attribute stances across a session.

    The three sets are kept pairwise disjoint: a confirmed or denied stance
    replaces an earlier unknown one, and directly contradictory updates are
    rejected.
    """

    confirmed: set[str] = field(default_factory=set)
    denied: set[str] = field(default_factory=set)
    unknown: set[str] = field(default_factory=set)

    def update(self, stance: str, names: tuple[str, ...] | list[str]) -> None:
        for raw in names:
            name = normalize_name(raw)
            if stance == "affirmed":
                if name in self.denied:
                    raise ValueError(f"attribute {name!r} already denied")
                self.unknown.discard(name)
                self.confirmed.add(name)
            elif stance == "denied":
                if name in self.confirmed:
                    raise ValueError(f"attribute {name!r} already confirmed")
                self.unknown.discard(name)
                self.denied.add(name)
            elif stance == "unknown":
                if name not in self.confirmed and name not in self.denied:
                    self.unknown.add(name)
            else:
                raise ValueError(f"unknown stance {stance!r}")

    def stanced(self) -> set[str]:
        return self.confirmed | self.denied | self.unknown

    def as_dict(self) -> dict[str, list[str]]:
        return {
            "confirmed": sorted(self.confirmed),
            "denied": sorted(self.denied),
            "unknown": sorted(self.unknown),
        }


@dataclass(frozen=True)
class DiseaseScores:
    """Probability per disease id, covering every disease in the graph."""

    scores: dict[str, float]
    source: str

    def validate_against(self, g: KnowledgeGraph) -> None:
        missing = [d for d in g.disease_ids if d not in self.scores]
        if missing:
            raise ValueError(f"scores missing {len(missing)} disease(s): {missing[:5]}")
        bad = {d: s for d, s in self.scores.items() if not 0.0 <= s <= 1.0}
        if bad:
            raise ValueError(f"scores outside [0, 1]: {bad}")


@dataclass(frozen=True)
class HypothesisConfig:
    n: int = 2
    tau: float = 0.005
    scorer: str = EVIDENCE

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("anchor count n must be >= 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")


def logistic(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def evidence_scores(
    g: KnowledgeGraph,
    ledger: EvidenceLedger,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    bias: float = DEFAULT_BIAS,
) -> DiseaseScores:
    """Deterministic scorer: logistic over confirmed/denied attribute counts.

    score(d) = logistic(alpha * |attrs(d) & confirmed| -
               beta * |attrs(d) & denied| + bias).

    The default constants put a zero-evidence disease at ~0.0025, below the
    default competing-disease threshold of 0.005, while one confirmed
    attribute (~0.0067) clears it.
    """
    scores: dict[str, float] = {}
    for d in g.disease_ids:
        names = {normalize_name(g.name_of(a)) for a in g.attributes_of(d)}
        hits = len(names & ledger.confirmed)
        misses = len(names & ledger.denied)
        scores[d] = logistic(alpha * hits - beta * misses + bias)
    return DiseaseScores(scores=scores, source=EVIDENCE)


def rerank_raw(
    pos_sim: dict[str, float],
    neg_sim: dict[str, float],
    penalty: float = DEFAULT_RERANK_PENALTY,
) -> dict[str, float]:
    """Denial-penalized similarity: pos_sim(d) - penalty * neg_sim(d)."""
    if set(pos_sim) != set(neg_sim):
        raise ValueError("pos_sim and neg_sim must cover the same diseases")
    return {d: pos_sim[d] - penalty * neg_sim[d] for d in pos_sim}


def rerank_scores(
    pos_sim: dict[str, float],
    neg_sim: dict[str, float],
    penalty: float = DEFAULT_RERANK_PENALTY,
) -> DiseaseScores:
    """Rerank similarities and rescale affinely to [0, 1].

    The rescaling keeps threshold filtering meaningful for scores that are
    not probabilities; a constant map rescales to all 0.5.
    """
    raw = rerank_raw(pos_sim, neg_sim, penalty)
    lo, hi = min(raw.values()), max(raw.values())
    if hi == lo:
        rescaled = {d: 0.5 for d in raw}
    else:
        span = hi - lo
        rescaled = {d: (v - lo) / span for d, v in raw.items()}
    return DiseaseScores(scores=rescaled, source=RETRIEVAL)


def select_anchors(scores: DiseaseScores, n: int) -> list[str]:
    """Top-n disease ids by descending score, ties by ascending id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = sorted(scores.scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [d for d, _ in ranked[:n]]


def generate_hypotheses(
    g: KnowledgeGraph,
    scores: DiseaseScores,
    config: HypothesisConfig,
) -> tuple[list[str], Subgraph]:
    """Anchor selection followed by thresholded subgraph expansion."""
    anchors = select_anchors(scores, config.n)
    sub = expand_subgraph(g, anchors, scores.scores, config.tau)
    return anchors, sub


def linearize_query(terms: list[str] | set[str]) -> str:
    """Canonical single-string form of an attribute set, for retrieval."""
    return ", ".join(sorted(normalize_name(t) for t in terms))


def disease_document(g: KnowledgeGraph, disease_id: str) -> str:
    """Canonical list-style text for one disease's 1-hop attributes."""
    node = g.node(disease_id)
    by_kind: dict[str, list[str]] = {"symptom": [], "cause": [], "risk_factor": []}
    for attr in g.attributes_of(disease_id):
        by_kind[g.node(attr).kind].append(g.name_of(attr))
    lines = [f"disease: {node.name}"]
    for kind in ("symptom", "cause", "risk_factor"):
        names = ", ".join(sorted(by_kind[kind])) or "none"
        lines.append(f"{kind}s: {names}")
    return "\n".join(lines)


def token_overlap_similarity(query: str, document: str) -> float:
    """Bag-of-words cosine; the default stand-in for an embedding backend."""
    q = normalize_name(query).replace(",", " ").split()
    d = normalize_name(document).replace(",", " ").split()
    if not q or not d:
        return 0.0
    q_counts: dict[str, int] = {}
    d_counts: dict[str, int] = {}
    for t in q:
        q_counts[t] = q_counts.get(t, 0) + 1
    for t in d:
        d_counts[t] = d_counts.get(t, 0) + 1
    dot = sum(q_counts[t] * d_counts.get(t, 0) for t in q_counts)
    norm = math.sqrt(sum(v * v for v in q_counts.values())) * math.sqrt(
        sum(v * v for v in d_counts.values())
    )
    return dot / norm if norm else 0.0


def retrieval_scores(
    g: KnowledgeGraph,
    ledger: EvidenceLedger,
    similarity=token_overlap_similarity,
    penalty: float = DEFAULT_RERANK_PENALTY,
) -> DiseaseScores:
    """Retrieval scorer: similarity of confirmed/denied sets to disease docs.

    The similarity function is injected; any embedding backend with the
    same (query, document) -> float signature can replace the default
    token-overlap stand-in.
    """
    pos_query = linearize_query(ledger.confirmed)
    neg_query = linearize_query(ledger.denied)
    pos_sim: dict[str, float] = {}
    neg_sim: dict[str, float] = {}
    for d in g.disease_ids:
        doc = disease_document(g, d)
        pos_sim[d] = similarity(pos_query, doc) if pos_query else 0.0
        neg_sim[d] = similarity(neg_query, doc) if neg_query else 0.0
    return rerank_scores(pos_sim, neg_sim, penalty)
