"""Produce synthetic training dialogues, SFT examples, and truncation variants.

Run:  python demos/training_data.py
"""

from graphdx import fixtures
from graphdx.graph import grounding_ratio
from graphdx.orchestration import (
    RulePatient,
    generate_synthetic_dialogue,
    scripted_clinician_for,
    session_seed,
    tier_for,
    truncate_variants,
)
from graphdx.profiles import Persona

g = fixtures.toy_graph()
profile = next(p for p in fixtures.fixture_profiles() if p.id == "p013")

gamma = grounding_ratio(g, profile)
print(f"profile {profile.id}: grounding ratio {float(gamma):.2f} "
      f"-> instruction tier '{tier_for(gamma)}'")

clinician = scripted_clinician_for(g, profile)
patient = RulePatient(profile, Persona(), session_seed(0, profile.id))
transcript, examples = generate_synthetic_dialogue(profile, g, clinician, patient, seed=0)

print(f"\ngenerated dialogue: {transcript.turns} turns, outcome {transcript.outcome}")
print(f"emitted {len(examples)} supervised examples; final target:")
print(" ", examples[-1].target)

variants = truncate_variants(transcript, fraction=0.5, seed=0)
print(f"\ntruncation augmentation at fraction 0.5: {len(variants)} variant(s)")
for variant in variants:
    print(f"  prefix of {len(variant.history)} utterances, "
          f"labeled {list(variant.gold_ids)}, ends with: "
          f"{variant.history[-1][1][:60]!r}")
