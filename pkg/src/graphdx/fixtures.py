"""Shipped fixtures: a small separable graph, aligned patient profiles,
and a deterministic generator for full-scale synthetic graphs.

The toy graph holds eight diseases in three complaint families (respiratory,
abdominal, cardiac) with shared attribute nodes inside each family, sized so
the deterministic pipeline separates every profile in a handful of turns.

The synthetic generator produces structurally valid graphs of any size
(default: the full-scale shape with 338 diseases, 1,733 nodes, and 3,935
edges) for scale and validation tests without shipping any real clinical
content.
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

from .graph import Edge, KnowledgeGraph, Node, RELATION_FOR_KIND, graph_from_dict
from .profiles import PatientProfile, load_profile


def toy_graph() -> KnowledgeGraph:
    ref = resources.files("graphdx").joinpath("fixtures/toy_graph.json")
    return graph_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def toy_graph_path() -> Path:
    return Path(str(resources.files("graphdx").joinpath("fixtures/toy_graph.json")))


def fixture_profiles() -> list[PatientProfile]:
    root = resources.files("graphdx").joinpath("fixtures/profiles")
    profiles = []
    for ref in sorted(root.iterdir(), key=lambda r: r.name):
        if ref.name.endswith(".json"):
            profiles.append(load_profile(json.loads(ref.read_text(encoding="utf-8"))))
    return profiles


def fixture_profiles_dir() -> Path:
    return Path(str(resources.files("graphdx").joinpath("fixtures/profiles")))


def synthetic_graph(
    n_disease: int = 338,
    n_symptom: int = 847,
    n_cause: int = 266,
    n_risk: int = 282,
    n_caused_by: int = 2630,
    n_can_cause: int = 805,
    n_risk_edges: int = 500,
    seed: int = 0,
) -> KnowledgeGraph:
    """Deterministic random graph with the requested shape.

    Every attribute node receives at least one edge (so an all-disease
    expansion covers the entire graph); the remaining edges are uniform
    distinct attribute-disease pairs.
    """
    rng = random.Random(seed)
    nodes: list[Node] = []
    diseases = [f"sd{i:04d}" for i in range(n_disease)]
    for i, node_id in enumerate(diseases):
        nodes.append(Node(id=node_id, name=f"synthetic disease {i:04d}", kind="disease"))

    groups = [
        ("symptom", "ss", n_symptom, n_caused_by),
        ("cause", "sc", n_cause, n_can_cause),
        ("risk_factor", "sr", n_risk, n_risk_edges),
    ]
    edges: list[Edge] = []
    for kind, prefix, count, edge_count in groups:
        if edge_count < count:
            raise ValueError(f"need at least {count} {kind} edges to cover all nodes")
        attr_ids = [f"{prefix}{i:04d}" for i in range(count)]
        for i, node_id in enumerate(attr_ids):
            nodes.append(Node(id=node_id, name=f"synthetic {kind} {prefix}{i:04d}", kind=kind))
        relation = RELATION_FOR_KIND[kind]
        seen: set[tuple[str, str]] = set()
        for i, attr in enumerate(attr_ids):
            disease = diseases[i % n_disease]
            seen.add((attr, disease))
            edges.append(Edge(source=attr, target=disease, relation=relation))
        while len(seen) < edge_count:
            pair = (rng.choice(attr_ids), rng.choice(diseases))
            if pair in seen:
                continue
            seen.add(pair)
            edges.append(Edge(source=pair[0], target=pair[1], relation=relation))
    return KnowledgeGraph(nodes, edges)
