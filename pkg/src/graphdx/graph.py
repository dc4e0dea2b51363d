"""Diagnostic knowledge graph: typed node/edge store plus subgraph machinery.

The graph is bipartite in practice: disease nodes on one side, attribute
nodes (symptom, cause, risk_factor) on the other, with all edges pointing
attribute -> disease. Diseases share attribute nodes, which is what makes
hop-2 "competing disease" discovery possible.

Everything here is pure and deterministic: node/edge orderings are sorted,
so identical inputs always produce identical subgraphs, statements, and
serialized documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping, TYPE_CHECKING

if TYPE_CHECKING:
    from .profiles import PatientProfile

DISEASE = "disease"
SYMPTOM = "symptom"
CAUSE = "cause"
RISK_FACTOR = "risk_factor"
NODE_KINDS = frozenset({DISEASE, SYMPTOM, CAUSE, RISK_FACTOR})
ATTRIBUTE_KINDS = frozenset({SYMPTOM, CAUSE, RISK_FACTOR})

CAUSED_BY = "caused_by"
CAN_CAUSE = "can_cause"
IS_A_RISK_FACTOR_OF = "is_a_risk_factor_of"
RELATIONS = frozenset({CAUSED_BY, CAN_CAUSE, IS_A_RISK_FACTOR_OF})

# relation -> required (source kind, target kind)
RELATION_SIGNATURES = {
    CAUSED_BY: (SYMPTOM, DISEASE),
    CAN_CAUSE: (CAUSE, DISEASE),
    IS_A_RISK_FACTOR_OF: (RISK_FACTOR, DISEASE),
}

# attribute kind -> the single relation it can carry
RELATION_FOR_KIND = {
    SYMPTOM: CAUSED_BY,
    CAUSE: CAN_CAUSE,
    RISK_FACTOR: IS_A_RISK_FACTOR_OF,
}


def normalize_name(name: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return " ".join(name.lower().split())


class GraphValidationError(ValueError):
    """Raised when a graph document violates the schema.

    Carries every violation found, not just the first, so a bad document
    can be fixed in one pass.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        summary = f"{len(self.violations)} graph schema violation(s)"
        super().__init__(summary + ":\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class Node:
    id: str
    name: str
    kind: str


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    relation: str


@dataclass(frozen=True)
class Subgraph:
    """Result of a hop expansion from anchor diseases.

    ``provenance`` maps each included node id to its hop depth: 0 for
    anchors, 1 for their attributes, 2 for competing diseases admitted
    through a shared attribute, 3 for attributes first reached from a
    competing disease. ``edge_list`` contains every graph edge whose two
    endpoints are both included (the induced edge set).
    """

    anchor_ids: tuple[str, ...]
    competing_ids: tuple[str, ...]
    node_ids: tuple[str, ...]
    edge_list: tuple[Edge, ...]
    provenance: dict[str, int] = field(compare=False)

    def disease_ids(self, g: KnowledgeGraph) -> tuple[str, ...]:
        return tuple(n for n in self.node_ids if g.node(n).kind == DISEASE)

    def attribute_ids(self, g: KnowledgeGraph) -> tuple[str, ...]:
        return tuple(n for n in self.node_ids if g.node(n).kind != DISEASE)


class KnowledgeGraph:
    """Immutable typed graph with name and adjacency indexes.

    Construct through :func:`load_graph` / :func:`graph_from_dict`, which
    validate the full schema. Safe for unrestricted concurrent reads.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        node_list = sorted(nodes, key=lambda n: n.id)
        edge_list = sorted(edges, key=lambda e: (e.source, e.relation, e.target))
        violations = validate_elements(node_list, edge_list)
        if violations:
            raise GraphValidationError(violations)

        self._nodes: dict[str, Node] = {n.id: n for n in node_list}
        self._edges: tuple[Edge, ...] = tuple(edge_list)
        self.name_index: dict[str, str] = {
            normalize_name(n.name): n.id for n in node_list
        }
        attrs: dict[str, list[str]] = {}
        diseases: dict[str, list[str]] = {}
        for e in self._edges:
            attrs.setdefault(e.target, []).append(e.source)
            diseases.setdefault(e.source, []).append(e.target)
        self._attrs_of = {d: tuple(sorted(set(v))) for d, v in attrs.items()}
        self._diseases_of = {a: tuple(sorted(set(v))) for a, v in diseases.items()}
        self.disease_ids: tuple[str, ...] = tuple(
            n.id for n in node_list if n.kind == DISEASE
        )

    @property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(self._nodes.values())

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    def node(self, node_id: str) -> Node:
        return self._nodes[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def name_of(self, node_id: str) -> str:
        return self._nodes[node_id].name

    def attributes_of(self, disease_id: str) -> tuple[str, ...]:
        """1-hop attribute ids of a disease (empty for isolated diseases)."""
        return self._attrs_of.get(disease_id, ())

    def diseases_of(self, attribute_id: str) -> tuple[str, ...]:
        return self._diseases_of.get(attribute_id, ())

    def resolve_name(self, name: str) -> str | None:
        return self.name_index.get(normalize_name(name))

    def node_counts(self) -> dict[str, int]:
        counts = {kind: 0 for kind in sorted(NODE_KINDS)}
        for n in self._nodes.values():
            counts[n.kind] += 1
        counts["total"] = len(self._nodes)
        return counts

    def edge_counts(self) -> dict[str, int]:
        counts = {rel: 0 for rel in sorted(RELATIONS)}
        for e in self._edges:
            counts[e.relation] += 1
        counts["total"] = len(self._edges)
        return counts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self) -> str:
        return f"KnowledgeGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"


def validate_elements(nodes: Iterable[Node], edges: Iterable[Edge]) -> list[str]:
    """Check every schema rule, returning one message per violation."""
    violations: list[str] = []
    by_id: dict[str, Node] = {}
    seen_names: dict[str, str] = {}
    for n in nodes:
        if n.id in by_id:
            violations.append(f"duplicate node id: {n.id!r}")
            continue
        by_id[n.id] = n
        if n.kind not in NODE_KINDS:
            violations.append(f"node {n.id!r}: unknown kind {n.kind!r}")
        if not n.name or not n.name.strip():
            violations.append(f"node {n.id!r}: empty name")
        else:
            key = normalize_name(n.name)
            if key in seen_names:
                violations.append(
                    f"node {n.id!r}: name {n.name!r} collides with node "
                    f"{seen_names[key]!r} after normalization"
                )
            else:
                seen_names[key] = n.id

    seen_edges: set[tuple[str, str, str]] = set()
    for e in edges:
        label = f"edge ({e.source!r} -{e.relation}-> {e.target!r})"
        if e.relation not in RELATIONS:
            violations.append(f"{label}: unknown relation")
            continue
        triple = (e.source, e.target, e.relation)
        if triple in seen_edges:
            violations.append(f"{label}: duplicate")
            continue
        seen_edges.add(triple)
        if e.source == e.target:
            violations.append(f"{label}: self-loop")
            continue
        src, tgt = by_id.get(e.source), by_id.get(e.target)
        if src is None:
            violations.append(f"{label}: source not in nodes")
        if tgt is None:
            violations.append(f"{label}: target not in nodes")
        if src is None or tgt is None:
            continue
        want_src, want_tgt = RELATION_SIGNATURES[e.relation]
        if src.kind != want_src or tgt.kind != want_tgt:
            violations.append(
                f"{label}: relation requires {want_src}->{want_tgt}, "
                f"got {src.kind}->{tgt.kind}"
            )
    return violations


def graph_from_dict(doc: Mapping) -> KnowledgeGraph:
    nodes = []
    for raw in doc.get("nodes", []):
        nodes.append(
            Node(
                id=str(raw.get("id", "")),
                name=str(raw.get("name", "")),
                kind=str(raw.get("kind", "")),
            )
        )
    edges = []
    for raw in doc.get("edges", []):
        edges.append(
            Edge(
                source=str(raw.get("source", "")),
                target=str(raw.get("target", "")),
                relation=str(raw.get("relation", "")),
            )
        )
    return KnowledgeGraph(nodes, edges)


def load_graph(source: str | Path | Mapping) -> KnowledgeGraph:
    """Load a graph document (path, JSON text, or parsed mapping).

    Raises :class:`GraphValidationError` listing every offending element
    when the document violates the schema.
    """
    if isinstance(source, Mapping):
        return graph_from_dict(source)
    if isinstance(source, Path) or (
        isinstance(source, str) and not source.lstrip().startswith("{")
    ):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    return graph_from_dict(json.loads(text))


def save_graph(g: KnowledgeGraph, path: str | Path | None = None) -> str:
    """Serialize byte-stably: sorted keys, nodes by id, edges by triple."""
    doc = {
        "nodes": [
            {"id": n.id, "name": n.name, "kind": n.kind}
            for n in sorted(g.nodes, key=lambda n: n.id)
        ],
        "edges": [
            {"source": e.source, "target": e.target, "relation": e.relation}
            for e in g.edges
        ],
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _check_anchors(g: KnowledgeGraph, anchors: Iterable[str]) -> list[str]:
    ordered = list(dict.fromkeys(anchors))
    if not ordered:
        raise ValueError("anchor list is empty")
    for a in ordered:
        if not g.has_node(a):
            raise ValueError(f"unknown anchor id: {a!r}")
        if g.node(a).kind != DISEASE:
            raise ValueError(f"anchor {a!r} is a {g.node(a).kind}, not a disease")
    return ordered


def _expand(
    g: KnowledgeGraph,
    anchors: Iterable[str],
    keep_competing: Callable[[str], bool],
) -> Subgraph:
    anchor_list = _check_anchors(g, anchors)
    anchor_set = set(anchor_list)
    depth: dict[str, int] = {a: 0 for a in anchor_list}

    hop1: set[str] = set()
    for a in anchor_list:
        for attr in g.attributes_of(a):
            hop1.add(attr)
            depth.setdefault(attr, 1)

    competing: set[str] = set()
    for attr in sorted(hop1):
        for d in g.diseases_of(attr):
            if d in anchor_set or d in competing:
                continue
            if keep_competing(d):
                competing.add(d)
    for d in sorted(competing):
        depth[d] = 2
        for attr in g.attributes_of(d):
            depth.setdefault(attr, 3)

    node_ids = frozenset(depth)
    edge_list = tuple(
        e for e in g.edges if e.source in node_ids and e.target in node_ids
    )
    return Subgraph(
        anchor_ids=tuple(anchor_list),
        competing_ids=tuple(sorted(competing)),
        node_ids=tuple(sorted(node_ids)),
        edge_list=edge_list,
        provenance=depth,
    )


def expand_subgraph(
    g: KnowledgeGraph,
    anchors: Iterable[str],
    scores: Mapping[str, float],
    tau: float,
) -> Subgraph:
    """3-hop expansion from anchors with score-thresholded hop-2 diseases.

    Hop 1 collects every attribute adjacent to an anchor; hop 2 admits
    diseases sharing any hop-1 attribute whose score strictly exceeds
    ``tau`` (anchors are always retained regardless of score); hop 3
    collects the attributes of admitted hop-2 diseases.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")

    def keep(d: str) -> bool:
        if d not in scores:
            raise ValueError(f"scores missing disease {d!r}")
        return scores[d] > tau

    return _expand(g, anchors, keep)


def expand_oracle_subgraph(g: KnowledgeGraph, gold: Iterable[str]) -> Subgraph:
    """Unfiltered 3-hop expansion from the gold diseases.

    Equivalent to :func:`expand_subgraph` with ``tau = 0`` and strictly
    positive scores: every disease sharing an attribute is admitted.
    """
    return _expand(g, gold, lambda d: True)


def overlap_filter(
    g: KnowledgeGraph,
    anchors: Iterable[str],
    ratio: float = 0.3,
) -> Subgraph:
    """3-hop expansion keeping hop-2 diseases by attribute overlap.

    A competing disease is retained iff, for some anchor ``a``, it shares
    at least ``ratio * |attrs(a)|`` of that anchor's attributes.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    anchor_list = _check_anchors(g, anchors)
    anchor_attrs = {a: set(g.attributes_of(a)) for a in anchor_list}

    def keep(d: str) -> bool:
        d_attrs = set(g.attributes_of(d))
        return any(
            len(d_attrs & attrs) >= ratio * len(attrs)
            for attrs in anchor_attrs.values()
        )

    return _expand(g, anchor_list, keep)


_STATEMENT_TEMPLATES = {
    CAUSED_BY: "{disease} causes {attribute}",
    CAN_CAUSE: "{attribute} can cause {disease}",
    IS_A_RISK_FACTOR_OF: "{attribute} is a risk factor of {disease}",
}


def linearize(sub: Subgraph, g: KnowledgeGraph) -> list[str]:
    """Render each subgraph edge as one textual statement.

    Statements are deduplicated and sorted by (disease name, relation,
    attribute name) so identical subgraphs always linearize identically.
    """
    keyed: dict[tuple[str, str, str], str] = {}
    for e in sub.edge_list:
        disease = g.name_of(e.target)
        attribute = g.name_of(e.source)
        text = _STATEMENT_TEMPLATES[e.relation].format(
            disease=disease, attribute=attribute
        )
        keyed[(disease, e.relation, attribute)] = text
    return [keyed[k] for k in sorted(keyed)]


def parse_statement(statement: str) -> tuple[str, str, str]:
    """Invert a linearized statement to (source name, relation, target name).

    The source is always the attribute and the target the disease, matching
    edge direction. Raises ValueError for text matching no template.
    """
    if " is a risk factor of " in statement:
        attr, _, disease = statement.partition(" is a risk factor of ")
        return attr, IS_A_RISK_FACTOR_OF, disease
    if " can cause " in statement:
        attr, _, disease = statement.partition(" can cause ")
        return attr, CAN_CAUSE, disease
    if " causes " in statement:
        disease, _, attr = statement.partition(" causes ")
        return attr, CAUSED_BY, disease
    raise ValueError(f"statement matches no relation template: {statement!r}")


def grounding_ratio(g: KnowledgeGraph, profile: "PatientProfile") -> Fraction:
    """Fraction of a profile's clinical items that map to graph attributes.

    Items are the affirmed HPI names, denied HPI names, and all background
    entries; an item is mappable iff its normalized name is an attribute
    node (symptom, cause, or risk_factor). Returned as an exact Fraction so
    downstream tier boundaries compare exactly.
    """
    items: set[str] = set()
    for entry in profile.hpi_affirmed:
        items.add(normalize_name(entry.name))
    for name in profile.hpi_denied:
        items.add(normalize_name(name))
    for name in profile.background_entries():
        items.add(normalize_name(name))
    if not items:
        return Fraction(0)
    mappable = 0
    for item in items:
        node_id = g.name_index.get(item)
        if node_id is not None and g.node(node_id).kind in ATTRIBUTE_KINDS:
            mappable += 1
    return Fraction(mappable, len(items))
