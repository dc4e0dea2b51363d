from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphdx import fixtures
from graphdx.graph import Edge, KnowledgeGraph, Node, RELATION_FOR_KIND

GOLDEN_DIR = Path(__file__).parent / "goldens"


@pytest.fixture(scope="session")
def toy_graph() -> KnowledgeGraph:
    return fixtures.toy_graph()


@pytest.fixture(scope="session")
def profiles():
    return fixtures.fixture_profiles()


@pytest.fixture(scope="session")
def profiles_by_id(profiles):
    return {p.id: p for p in profiles}


def random_valid_graph(rng: random.Random, max_nodes: int = 50) -> KnowledgeGraph:
    """Random graph honoring the relation signatures, for oracle checks."""
    n_diseases = rng.randint(1, 10)
    n_attrs = rng.randint(0, max_nodes - n_diseases)
    nodes = [
        Node(id=f"d{i:02d}", name=f"disease {i:02d}", kind="disease")
        for i in range(n_diseases)
    ]
    attr_kinds = ["symptom", "cause", "risk_factor"]
    for i in range(n_attrs):
        kind = rng.choice(attr_kinds)
        nodes.append(Node(id=f"a{i:02d}", name=f"attribute {i:02d}", kind=kind))
    edges = []
    seen = set()
    for node in nodes[n_diseases:]:
        for disease in rng.sample(
            [n.id for n in nodes[:n_diseases]],
            rng.randint(0, min(3, n_diseases)),
        ):
            if (node.id, disease) in seen:
                continue
            seen.add((node.id, disease))
            edges.append(
                Edge(source=node.id, target=disease, relation=RELATION_FOR_KIND[node.kind])
            )
    return KnowledgeGraph(nodes, edges)


def as_triples(g: KnowledgeGraph):
    return [(e.source, e.target, e.relation) for e in g.edges]


def node_kinds(g: KnowledgeGraph):
    return {n.id: n.kind for n in g.nodes}
