"""Run the full deterministic stack over the shipped profiles and score it.

Run:  python demos/run_sessions.py
"""

from graphdx import fixtures
from graphdx.evaluation import evaluate_run
from graphdx.orchestration import RunConfig, run_batch, run_session
from graphdx.profiles import Persona

g = fixtures.toy_graph()
profiles = fixtures.fixture_profiles()
config = RunConfig(n=1, tau=0.005, max_turns=50, seed=7)

# One session, narrated turn by turn.
profile = profiles[3]  # a pneumonia presentation
persona = Persona(specificity="low", personality="verbose")
print(f"--- session for {profile.id} (gold: {', '.join(profile.gold_diseases)}) ---")
transcript = run_session(g, profile, persona, config)
for i, record in enumerate(transcript.records, start=1):
    print(f"patient: {record.patient}")
    label = "asks" if record.action_kind == "question" else "diagnoses"
    print(f"turn {i}: system {label}: {record.action_text}")
print(f"outcome: {transcript.outcome} in {transcript.turns} turns\n")

# The whole batch, aggregated.
transcripts = run_batch(g, profiles, config)
report = evaluate_run(transcripts)
print(report.table())
print("\nper-persona slice (specificity):")
for value, metrics in report.persona_slices["specificity"].items():
    print(f"  {value:<8} sessions={int(metrics['sessions']):<3} "
          f"recall@4={metrics['recall@4']:.3f} avg_turns={metrics['avg_turns']:.2f}")
