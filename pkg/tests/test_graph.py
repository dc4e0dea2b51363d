from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from graphdx.graph import (
    Edge,
    GraphValidationError,
    KnowledgeGraph,
    Node,
    Subgraph,
    expand_oracle_subgraph,
    expand_subgraph,
    graph_from_dict,
    linearize,
    load_graph,
    normalize_name,
    overlap_filter,
    parse_statement,
    save_graph,
)
from graphdx import fixtures

from bfs_oracle import oracle_expand, oracle_overlap_keep, oracle_tau_keep
from conftest import as_triples, node_kinds, random_valid_graph


def subgraph_matches_oracle(g, sub: Subgraph, anchors, keep) -> None:
    nodes, edges, depth, competing = oracle_expand(
        node_kinds(g), as_triples(g), anchors, keep
    )
    assert set(sub.node_ids) == nodes
    assert [(e.source, e.target, e.relation) for e in sub.edge_list] == edges
    assert sub.provenance == depth
    assert list(sub.competing_ids) == competing


class TestLoadAndValidate:
    def test_full_scale_counts(self):
        g = fixtures.synthetic_graph()
        assert g.node_counts() == {
            "cause": 266, "disease": 338, "risk_factor": 282, "symptom": 847,
            "total": 1733,
        }
        assert g.edge_counts() == {
            "can_cause": 805, "caused_by": 2630, "is_a_risk_factor_of": 500,
            "total": 3935,
        }

    def test_empty_graph(self):
        g = graph_from_dict({"nodes": [], "edges": []})
        assert g.node_counts()["total"] == 0
        assert g.edge_counts()["total"] == 0

    def test_reversed_caused_by_signature_rejected(self):
        doc = {
            "nodes": [
                {"id": "d1", "name": "flu", "kind": "disease"},
                {"id": "s1", "name": "cough", "kind": "symptom"},
            ],
            "edges": [{"source": "d1", "target": "s1", "relation": "caused_by"}],
        }
        with pytest.raises(GraphValidationError) as err:
            graph_from_dict(doc)
        assert any("'d1'" in v and "caused_by" in v for v in err.value.violations)

    def test_all_violations_reported(self):
        doc = {
            "nodes": [
                {"id": "d1", "name": "flu", "kind": "disease"},
                {"id": "d2", "name": "Flu ", "kind": "disease"},
                {"id": "s1", "name": "", "kind": "symptom"},
                {"id": "s2", "name": "ache", "kind": "weird_kind"},
            ],
            "edges": [
                {"source": "s2", "target": "s2", "relation": "caused_by"},
                {"source": "ghost", "target": "d1", "relation": "caused_by"},
                {"source": "s2", "target": "d1", "relation": "bad_relation"},
            ],
        }
        with pytest.raises(GraphValidationError) as err:
            graph_from_dict(doc)
        text = "\n".join(err.value.violations)
        assert "collides" in text          # duplicate normalized name
        assert "empty name" in text
        assert "unknown kind" in text
        assert "self-loop" in text
        assert "source not in nodes" in text
        assert "unknown relation" in text
        assert len(err.value.violations) >= 6

    def test_duplicate_edge_rejected(self):
        nodes = [
            Node(id="d1", name="flu", kind="disease"),
            Node(id="s1", name="cough", kind="symptom"),
        ]
        edge = Edge(source="s1", target="d1", relation="caused_by")
        with pytest.raises(GraphValidationError, match="duplicate"):
            KnowledgeGraph(nodes, [edge, edge])

    def test_save_load_roundtrip(self, toy_graph):
        text = save_graph(toy_graph)
        again = load_graph(text)
        assert again == toy_graph
        assert save_graph(again) == text  # byte-stable

    def test_load_from_path(self, tmp_path, toy_graph):
        path = tmp_path / "g.json"
        save_graph(toy_graph, path)
        assert load_graph(path) == toy_graph

    def test_name_index_normalization(self, toy_graph):
        assert toy_graph.resolve_name("  Cough ") == "S001"
        assert toy_graph.resolve_name("CONGESTIVE  heart Failure") == "D007"
        assert toy_graph.resolve_name("no such thing") is None


class TestExpansion:
    def test_isolated_anchor(self):
        g = graph_from_dict(
            {
                "nodes": [{"id": "d1", "name": "| lonely", "kind": "disease"}],
                "edges": [],
            }
        )
        sub = expand_subgraph(g, ["d1"], {"d1": 0.5}, tau=0.2)
        assert sub.node_ids == ("d1",)
        assert sub.edge_list == ()
        assert sub.provenance == {"d1": 0}

    def test_whole_graph_from_all_anchors(self):
        g = fixtures.synthetic_graph()
        scores = {d: 0.5 for d in g.disease_ids}
        sub = expand_subgraph(g, list(g.disease_ids), scores, tau=0.0)
        assert len(sub.node_ids) == 1733
        assert len(sub.edge_list) == 3935

    def test_toy_fixture_vs_hand_trace_and_oracle(self, toy_graph):
        scores = {d: 0.1 for d in toy_graph.disease_ids}
        scores["D003"] = 0.9
        sub = expand_subgraph(toy_graph, ["D001", "D002"], scores, tau=0.5)
        assert set(sub.node_ids) == {
            "D001", "D002", "D003", "S001", "S002", "S003", "S004", "S005",
            "R001", "C002",
        }
        assert len(sub.edge_list) == 11
        assert sub.competing_ids == ("D003",)
        assert sub.provenance["D003"] == 2
        assert sub.provenance["S005"] == 3
        assert sub.provenance["S001"] == 1
        subgraph_matches_oracle(
            toy_graph, sub, ["D001", "D002"], oracle_tau_keep(scores, 0.5)
        )

    def test_unknown_anchor_rejected(self, toy_graph):
        with pytest.raises(ValueError, match="unknown anchor"):
            expand_subgraph(toy_graph, ["D999"], {}, tau=0.0)

    def test_non_disease_anchor_rejected(self, toy_graph):
        with pytest.raises(ValueError, match="not a disease"):
            expand_oracle_subgraph(toy_graph, ["S001"])

    def test_missing_score_rejected(self, toy_graph):
        scores = {d: 0.5 for d in toy_graph.disease_ids if d != "D003"}
        with pytest.raises(ValueError, match="missing disease"):
            expand_subgraph(toy_graph, ["D001"], scores, tau=0.0)

    def test_oracle_expansion_definitional_equivalence(self, toy_graph):
        scores = {d: 0.7 for d in toy_graph.disease_ids}
        for anchors in (["D001"], ["D004", "D007"], list(toy_graph.disease_ids)):
            a = expand_oracle_subgraph(toy_graph, anchors)
            b = expand_subgraph(toy_graph, anchors, scores, tau=0.0)
            assert a == b

    def test_oracle_singleton_gold(self):
        g = graph_from_dict(
            {
                "nodes": [{"id": "d1", "name": "| lonely", "kind": "disease"}],
                "edges": [],
            }
        )
        sub = expand_oracle_subgraph(g, ["d1"])
        assert sub.node_ids == ("d1",)

    def test_oracle_two_golds_reach_each_other(self, toy_graph):
        # D007 and D008 share fatigue and high blood pressure
        sub = expand_oracle_subgraph(toy_graph, ["D007"])
        assert "D008" in sub.node_ids
        assert sub.provenance["D008"] == 2
        subgraph_matches_oracle(toy_graph, sub, ["D007"], lambda d: True)

    def test_random_graphs_match_bfs_oracle(self):
        rng = random.Random(20240803)
        for _ in range(60):
            g = random_valid_graph(rng)
            diseases = list(g.disease_ids)
            anchors = rng.sample(diseases, rng.randint(1, min(3, len(diseases))))
            scores = {d: rng.uniform(0.001, 1.0) for d in diseases}
            tau = rng.random()
            sub = expand_subgraph(g, anchors, scores, tau)
            subgraph_matches_oracle(g, sub, anchors, oracle_tau_keep(scores, tau))
            oracle_sub = expand_oracle_subgraph(g, anchors)
            subgraph_matches_oracle(g, oracle_sub, anchors, lambda d: True)
            ratio = rng.uniform(0.05, 1.0)
            ov = overlap_filter(g, anchors, ratio)
            subgraph_matches_oracle(
                g, ov, anchors,
                oracle_overlap_keep(node_kinds(g), as_triples(g), anchors, ratio),
            )

    @given(st.integers(min_value=0, max_value=10_000), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=60, deadline=None)
    def test_tau_monotonicity_and_anchor_preservation(self, seed, tau1, tau2):
        rng = random.Random(seed)
        g = random_valid_graph(rng, max_nodes=30)
        diseases = list(g.disease_ids)
        anchors = rng.sample(diseases, rng.randint(1, min(3, len(diseases))))
        scores = {d: rng.uniform(0.001, 1.0) for d in diseases}
        lo, hi = min(tau1, tau2), max(tau1, tau2)
        sub_hi = expand_subgraph(g, anchors, scores, hi)
        sub_lo = expand_subgraph(g, anchors, scores, lo)
        assert set(sub_hi.node_ids) <= set(sub_lo.node_ids)
        for a in anchors:
            assert a in sub_hi.node_ids and a in sub_lo.node_ids


class TestOverlapFilter:
    def test_full_overlap_retained_at_any_ratio(self, toy_graph):
        # D005 shares all of D004's attributes except loss of appetite;
        # craft instead from D007/D008 which share 2 of 4.
        g = graph_from_dict(
            {
                "nodes": [
                    {"id": "d1", "name": "one", "kind": "disease"},
                    {"id": "d2", "name": "two", "kind": "disease"},
                    {"id": "s1", "name": "s one", "kind": "symptom"},
                    {"id": "s2", "name": "s two", "kind": "symptom"},
                ],
                "edges": [
                    {"source": "s1", "target": "d1", "relation": "caused_by"},
                    {"source": "s2", "target": "d1", "relation": "caused_by"},
                    {"source": "s1", "target": "d2", "relation": "caused_by"},
                    {"source": "s2", "target": "d2", "relation": "caused_by"},
                ],
            }
        )
        sub = overlap_filter(g, ["d1"], ratio=1.0)
        assert "d2" in sub.competing_ids

    def test_no_overlap_excluded(self, toy_graph):
        # D004 (abdominal family) shares nothing with D001
        sub = overlap_filter(toy_graph, ["D001"], ratio=0.1)
        assert "D004" not in sub.node_ids

    def test_toy_ratio_03_hand_computed(self, toy_graph):
        # attrs(D002) = {cough, fever, shortness of breath, smoking}, so the
        # bar is 1.2 shared attributes: influenza shares 2, asthma shares 2,
        # heart failure shares only 1.
        sub = overlap_filter(toy_graph, ["D002"], ratio=0.3)
        assert set(sub.competing_ids) == {"D001", "D003"}
        subgraph_matches_oracle(
            toy_graph, sub, ["D002"],
            oracle_overlap_keep(node_kinds(toy_graph), as_triples(toy_graph),
                                ["D002"], 0.3),
        )

    def test_invalid_ratio(self, toy_graph):
        with pytest.raises(ValueError):
            overlap_filter(toy_graph, ["D001"], ratio=0.0)


class TestLinearize:
    def test_caused_by_template(self, toy_graph):
        sub = expand_subgraph(
            toy_graph, ["D002"], {d: 0.0 for d in toy_graph.disease_ids}, tau=1.0
        )
        statements = linearize(sub, toy_graph)
        assert "pneumonia causes cough" in statements

    def test_empty_subgraph(self, toy_graph):
        sub = Subgraph(anchor_ids=(), competing_ids=(), node_ids=(),
                       edge_list=(), provenance={})
        assert linearize(sub, toy_graph) == []

    def test_five_edge_hand_enumeration(self):
        g = graph_from_dict(
            {
                "nodes": [
                    {"id": "d1", "name": "beta syndrome", "kind": "disease"},
                    {"id": "d2", "name": "alpha syndrome", "kind": "disease"},
                    {"id": "s1", "name": "ache", "kind": "symptom"},
                    {"id": "s2", "name": "chill", "kind": "symptom"},
                    {"id": "c1", "name": "damp air", "kind": "cause"},
                    {"id": "r1", "name": "night work", "kind": "risk_factor"},
                ],
                "edges": [
                    {"source": "s1", "target": "d1", "relation": "caused_by"},
                    {"source": "s2", "target": "d1", "relation": "caused_by"},
                    {"source": "c1", "target": "d1", "relation": "can_cause"},
                    {"source": "s1", "target": "d2", "relation": "caused_by"},
                    {"source": "r1", "target": "d2", "relation": "is_a_risk_factor_of"},
                ],
            }
        )
        sub = expand_oracle_subgraph(g, ["d1", "d2"])
        assert linearize(sub, g) == [
            "alpha syndrome causes ache",
            "night work is a risk factor of alpha syndrome",
            "damp air can cause beta syndrome",
            "beta syndrome causes ache",
            "beta syndrome causes chill",
        ]

    def test_statements_deduplicated_and_sorted(self, toy_graph):
        sub = expand_oracle_subgraph(toy_graph, list(toy_graph.disease_ids))
        statements = linearize(sub, toy_graph)
        assert statements == sorted(set(statements), key=statements.index)
        assert len(statements) == len(toy_graph.edges)

    def test_parse_statement_recovers_edge(self, toy_graph):
        sub = expand_oracle_subgraph(toy_graph, list(toy_graph.disease_ids))
        recovered = set()
        for statement in linearize(sub, toy_graph):
            source_name, relation, target_name = parse_statement(statement)
            recovered.add(
                (
                    toy_graph.resolve_name(source_name),
                    toy_graph.resolve_name(target_name),
                    relation,
                )
            )
        expected = {(e.source, e.target, e.relation) for e in toy_graph.edges}
        assert recovered == expected

    def test_parse_statement_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_statement("totally unrelated text")

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_linearize_bijection_on_random_graphs(self, seed):
        rng = random.Random(seed)
        g = random_valid_graph(rng, max_nodes=25)
        sub = expand_oracle_subgraph(g, list(g.disease_ids))
        statements = linearize(sub, g)
        assert len(statements) == len(set(statements)) == len(sub.edge_list)
        for statement in statements:
            source_name, relation, target_name = parse_statement(statement)
            source = g.resolve_name(source_name)
            target = g.resolve_name(target_name)
            assert Edge(source=source, target=target, relation=relation) in g.edges


class TestGroundingRatio:
    def test_all_items_match(self, toy_graph, profiles_by_id):
        from graphdx.graph import grounding_ratio

        assert float(grounding_ratio(toy_graph, profiles_by_id["p001"])) == 1.0

    def test_no_items_match(self, toy_graph):
        from graphdx.graph import grounding_ratio
        from graphdx.profiles import HpiEntry, PatientProfile

        profile = PatientProfile(
            id="x", age=30, gender="female", chief_complaint="odd feelings",
            gold_diseases=("influenza",),
            hpi_affirmed=(HpiEntry(name="strange tingles"),),
            hpi_denied=("odd shivers",),
        )
        assert float(grounding_ratio(toy_graph, profile)) == 0.0

    def test_empty_item_set_is_zero(self, toy_graph):
        from graphdx.graph import grounding_ratio
        from graphdx.profiles import PatientProfile

        profile = PatientProfile(
            id="x", age=30, gender="male", chief_complaint="nothing specific",
            gold_diseases=("influenza",),
        )
        assert float(grounding_ratio(toy_graph, profile)) == 0.0

    def test_exact_fraction(self, toy_graph):
        from fractions import Fraction

        from graphdx.graph import grounding_ratio
        from graphdx.profiles import HpiEntry, PatientProfile

        profile = PatientProfile(
            id="x", age=30, gender="male", chief_complaint="cough",
            gold_diseases=("influenza",),
            hpi_affirmed=(HpiEntry(name="cough"),),
            hpi_denied=("made-up thing",),
        )
        assert grounding_ratio(toy_graph, profile) == Fraction(1, 2)


def test_normalize_name():
    assert normalize_name("  Chest   PAIN ") == "chest pain"
