"""Walk through the knowledge-graph layer: load, validate, expand, linearize.

Run:  python demos/explore_graph.py
"""

from graphdx import fixtures
from graphdx.graph import (
    expand_oracle_subgraph,
    expand_subgraph,
    linearize,
    overlap_filter,
    save_graph,
)
from graphdx.hypotheses import EvidenceLedger, evidence_scores, select_anchors

g = fixtures.toy_graph()
print(f"loaded {g}")
print("node counts:", g.node_counts())
print("edge counts:", g.edge_counts())

# A patient has confirmed a cough: score every disease from that single fact.
ledger = EvidenceLedger(confirmed={"cough"})
scores = evidence_scores(g, ledger)
anchors = select_anchors(scores, n=2)
print("\ntop-2 anchors after confirming a cough:", [g.name_of(d) for d in anchors])

# Hop expansion: anchors -> their attributes -> competing diseases -> theirs.
sub = expand_subgraph(g, anchors, scores.scores, tau=0.005)
print(f"subgraph: {len(sub.node_ids)} nodes, {len(sub.edge_list)} edges")
print("competing diseases:", [g.name_of(d) for d in sub.competing_ids])
print("hop depths:", {g.name_of(n): h for n, h in sorted(sub.provenance.items())})

# The same neighborhood as text statements, ready for a prompt context.
print("\nlinearized statements:")
for statement in linearize(sub, g):
    print(" ", statement)

# The unfiltered oracle expansion used when generating training dialogues.
oracle = expand_oracle_subgraph(g, ["D007"])
print(f"\noracle expansion from congestive heart failure: {len(oracle.node_ids)} nodes")

# Attribute-overlap filtering, the probability-free alternative.
ov = overlap_filter(g, ["D002"], ratio=0.3)
print("overlap-filtered competitors of pneumonia:",
      [g.name_of(d) for d in ov.competing_ids])

# Byte-stable serialization round-trip.
text = save_graph(g)
print(f"\nserialized graph document: {len(text)} bytes (stable across runs)")
