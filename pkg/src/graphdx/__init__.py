"""graphdx: knowledge-graph-grounded conversational diagnosis.

A typed diagnostic knowledge graph, hypothesis-driven 3-hop subgraph
extraction, interchangeable disease scorers, a question-vs-diagnosis
verifier, a persona-driven patient simulator, a full dialogue
orchestration loop with evaluation metrics, and an HTTP session service
for live role-played sessions.
"""

from .graph import (
    Edge,
    GraphValidationError,
    KnowledgeGraph,
    Node,
    Subgraph,
    expand_oracle_subgraph,
    expand_subgraph,
    grounding_ratio,
    linearize,
    load_graph,
    normalize_name,
    overlap_filter,
    parse_statement,
    save_graph,
)
from .hypotheses import (
    DiseaseScores,
    EvidenceLedger,
    HypothesisConfig,
    evidence_scores,
    generate_hypotheses,
    rerank_scores,
    retrieval_scores,
    select_anchors,
)
from .orchestration import (
    RunConfig,
    Transcript,
    generate_synthetic_dialogue,
    run_batch,
    run_session,
    tier_for,
    truncate_variants,
)
from .profiles import HpiEntry, PatientProfile, Persona, load_profile, load_profiles
from .simulator import PatientReply, answer, apply_specificity, opening_statement
from .verifier import (
    VerifierAction,
    VerifierConfig,
    cod_decide,
    format_action,
    parse_action,
    render_hv_prompt,
    resolve_diagnoses,
    rule_decide,
)
from .evaluation import (
    EvalReport,
    evaluate_run,
    hg_recall_at_k,
    max_recall1_bound,
    recall_at_k,
    stratified_split,
    subgraph_recall,
)

__version__ = "0.1.0"
