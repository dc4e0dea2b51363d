from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest

from graphdx import fixtures
from graphdx.graph import expand_oracle_subgraph, grounding_ratio
from graphdx.hypotheses import EvidenceLedger, evidence_scores
from graphdx.orchestration import (
    ACTIVE,
    DIAGNOSED,
    ERROR,
    RunConfig,
    RulePatient,
    SchemaMismatchError,
    ScriptedClinician,
    SessionState,
    Transcript,
    TURN_LIMIT_FAILURE,
    TurnRecord,
    UnresolvableGoldError,
    generate_synthetic_dialogue,
    make_scorer,
    make_verifier,
    read_transcripts,
    rebuild_history,
    run_batch,
    run_session,
    scripted_clinician_for,
    session_seed,
    system_step,
    tier_for,
    truncate_variants,
    write_transcripts,
)
from graphdx.profiles import Persona, sample_persona
from graphdx.simulator import stable_rng
from graphdx.verifier import QUESTION, VerifierAction, match_question_attribute, parse_action
from conftest import GOLDEN_DIR


class TestTierBoundaries:
    def test_acceptance_boundary_floats(self):
        values = [0.29, 0.3, 0.31, 0.69, 0.7, 0.71]
        assert [tier_for(v) for v in values] == [
            "low", "low", "moderate", "moderate", "moderate", "high",
        ]

    def test_exact_rational_boundaries(self):
        # an exact 7/10 grounding ratio is a high-grounding case; the nearest
        # float below the boundary is not
        assert tier_for(Fraction(7, 10)) == "high"
        assert tier_for(Fraction(3, 10)) == "low"
        assert tier_for(Fraction(1, 2)) == "moderate"

    def test_interior_point(self):
        assert tier_for(0.5) == "moderate"

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            tier_for(1.5)

    def test_grounding_ratio_feeds_tiers_exactly(self, toy_graph):
        from graphdx.profiles import HpiEntry, PatientProfile

        # 7 of 10 items mappable -> exactly 7/10 -> high
        mappable = ["cough", "fever", "nausea", "diarrhea", "wheezing", "fatigue",
                    "heartburn"]
        profile = PatientProfile(
            id="x", age=30, gender="male", chief_complaint="many things",
            gold_diseases=("influenza",),
            hpi_affirmed=tuple(HpiEntry(name=n) for n in mappable),
            hpi_denied=("made up one", "made up two", "made up three"),
        )
        gamma = grounding_ratio(toy_graph, profile)
        assert gamma == Fraction(7, 10)
        assert tier_for(gamma) == "high"


class AlwaysQuestionVerifier:
    """Stub that never diagnoses, for turn-limit behavior."""

    def decide(self, g, sub, scores, ledger, asked, history, force):
        return VerifierAction(
            think="stub keeps asking", kind=QUESTION,
            question="Anything else you can share?",
        )


class TestRunSession:
    def config(self, **kw):
        base = dict(n=1, tau=0.005, max_turns=50, seed=7)
        base.update(kw)
        return RunConfig(**base)

    def test_single_candidate_diagnosed_at_turn_one(self, toy_graph, profiles_by_id):
        # p022's racing-heart complaint maps only to atrial fibrillation
        transcript = run_session(
            toy_graph, profiles_by_id["p022"], Persona(), self.config()
        )
        assert transcript.outcome == DIAGNOSED
        assert transcript.turns == 1
        assert transcript.diagnoses == ["atrial fibrillation"]

    def test_always_question_stub_hits_turn_limit(self, toy_graph, profiles_by_id):
        transcript = run_session(
            toy_graph, profiles_by_id["p001"], Persona(), self.config(),
            verifier=AlwaysQuestionVerifier(),
        )
        assert transcript.outcome == TURN_LIMIT_FAILURE
        assert transcript.turns == 50
        assert transcript.diagnoses == []
        assert len(transcript.records) == 50

    def test_turn_accounting_counts_diagnosis_response(self, toy_graph, profiles_by_id):
        transcript = run_session(
            toy_graph, profiles_by_id["p001"], Persona(), self.config()
        )
        assert transcript.turns == len(transcript.records)
        assert transcript.records[-1].action_kind == "diagnosis"

    def test_history_alternates_starting_with_patient(self, toy_graph, profiles_by_id):
        transcript = run_session(
            toy_graph, profiles_by_id["p004"], Persona(), self.config()
        )
        history = rebuild_history(transcript)
        assert history[0][0] == "patient"
        roles = [role for role, _ in history]
        assert roles == ["patient", "system"] * (len(history) // 2)

    def test_deterministic_repeat_runs_byte_identical(self, toy_graph, profiles):
        config = self.config()
        a = run_batch(toy_graph, profiles[:6], config)
        b = run_batch(toy_graph, profiles[:6], config)
        dump = lambda ts: [json.dumps(t.as_dict(), sort_keys=True) for t in ts]
        assert dump(a) == dump(b)

    def test_matches_stored_golden(self, toy_graph, profiles, tmp_path):
        config = RunConfig(n=1, tau=0.005, max_turns=50, seed=7)
        transcripts = run_batch(toy_graph, profiles, config)
        out = tmp_path / "transcripts.jsonl"
        write_transcripts(out, transcripts)
        golden = (GOLDEN_DIR / "fixture_transcripts.jsonl").read_bytes()
        assert out.read_bytes() == golden

    def test_ledger_soundness_per_turn(self, toy_graph, profiles_by_id):
        """After each question turn the ledger stance equals the simulator's."""
        from graphdx.graph import normalize_name

        profile = profiles_by_id["p004"]
        persona = Persona()
        config = self.config()
        patient = RulePatient(profile, persona, session_seed(config.seed, profile.id))
        scorer = make_scorer(config)
        verifier = make_verifier(config)
        state = SessionState()
        state.add_patient(toy_graph, patient.opening())
        while state.status == ACTIVE and state.turn < 30:
            action = system_step(toy_graph, state, config, scorer, verifier)
            if action.kind != QUESTION:
                break
            asked = match_question_attribute(toy_graph, action.question)
            reply = patient.reply(action.question)
            state.add_patient(toy_graph, reply, asked_attribute=asked)
            if reply.stance == "affirmed":
                for name in reply.disclosed:
                    assert normalize_name(name) in state.ledger.confirmed
            elif reply.stance == "denied":
                for name in reply.disclosed:
                    assert normalize_name(name) in state.ledger.denied
            else:
                assert normalize_name(toy_graph.name_of(asked)) in state.ledger.unknown
        assert state.status == DIAGNOSED

    def test_backend_error_marks_session(self, toy_graph, profiles_by_id):
        class ExplodingVerifier:
            def decide(self, **kw):
                raise RuntimeError("endpoint on fire")

        transcript = run_session(
            toy_graph, profiles_by_id["p001"], Persona(), self.config(),
            verifier=ExplodingVerifier(),
        )
        assert transcript.outcome == ERROR
        assert transcript.diagnoses == []
        assert "endpoint on fire" in transcript.records[-1].action_text

    def test_cod_backend_runs_and_terminates(self, toy_graph, profiles_by_id):
        config = self.config(verifier="cod", cod_threshold=0.5, cod_top=8)
        transcript = run_session(toy_graph, profiles_by_id["p010"], Persona(), config)
        assert transcript.outcome == DIAGNOSED
        assert 1 <= len(transcript.diagnoses) <= 4

    def test_retrieval_scorer_runs(self, toy_graph, profiles_by_id):
        config = self.config(scorer="retrieval", tau=0.4)
        transcript = run_session(toy_graph, profiles_by_id["p013"], Persona(), config)
        assert transcript.outcome == DIAGNOSED

    def test_max_turns_one_forces_immediate_decision(self, toy_graph, profiles_by_id):
        transcript = run_session(
            toy_graph, profiles_by_id["p004"], Persona(), self.config(max_turns=1)
        )
        assert transcript.turns == 1
        assert transcript.outcome == DIAGNOSED  # rule backend obeys the force signal


class TestSeeds:
    def test_session_seed_stable_and_distinct(self):
        assert session_seed(7, "p001") == session_seed(7, "p001")
        assert session_seed(7, "p001") != session_seed(7, "p002")
        assert session_seed(7, "p001") != session_seed(8, "p001")

    def test_persona_sampling_uniform_enumerations(self):
        personas = {sample_persona(stable_rng(i)).as_dict()["personality"]
                    for i in range(200)}
        assert personas == {"plain", "distrust", "overanxious", "verbose"}


class TestTranscriptIO:
    def test_roundtrip(self, toy_graph, profiles, tmp_path):
        config = RunConfig(n=1, seed=3)
        transcripts = run_batch(toy_graph, profiles[:3], config)
        path = tmp_path / "t.jsonl"
        write_transcripts(path, transcripts)
        again = read_transcripts(path)
        assert [t.as_dict() for t in again] == [t.as_dict() for t in transcripts]

    def test_schema_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"schema_version": 99}\n', encoding="utf-8")
        with pytest.raises(SchemaMismatchError):
            read_transcripts(path)


def make_transcript(turns: int, profile_id: str = "px") -> Transcript:
    records = []
    for i in range(turns):
        is_last = i == turns - 1
        records.append(
            TurnRecord(
                patient=f"patient line {i}",
                anchors=["D001"],
                candidates=["D001"],
                subgraph_nodes=3,
                action_kind="diagnosis" if is_last else "question",
                action_text="influenza" if is_last else f"question {i}?",
                think=f"thought {i}",
            )
        )
    return Transcript(
        profile_id=profile_id,
        persona={},
        gold_ids=["D001"],
        records=records,
        outcome=DIAGNOSED,
        diagnoses=["influenza"],
        diagnoses_resolved=["D001"],
        turns=turns,
        grounding=1.0,
    )


class TestTruncation:
    def test_count_law_sweep(self):
        for turns in range(1, 51):
            transcript = make_transcript(turns)
            variants = truncate_variants(transcript, fraction=0.2, seed=1)
            expected = min(max(1, turns // 5), turns - 1) if turns > 1 else 0
            assert len(variants) == expected, turns

    def test_t10_default_fraction_gives_two(self):
        assert len(truncate_variants(make_transcript(10), seed=4)) == 2

    def test_t1_has_no_interior_point(self):
        assert truncate_variants(make_transcript(1), seed=4) == []

    def test_seeded_variant_index_stable(self):
        a = truncate_variants(make_transcript(7), seed=42)
        b = truncate_variants(make_transcript(7), seed=42)
        assert len(a) == 1
        assert a == b

    def test_variants_are_strict_prefixes_ending_with_patient(self):
        transcript = make_transcript(9)
        history = rebuild_history(transcript)
        for variant in truncate_variants(transcript, seed=11):
            assert len(variant.history) < len(history)
            assert list(variant.history) == history[: len(variant.history)]
            assert variant.history[-1][0] == "patient"
            assert variant.gold_ids == ("D001",)


class TestSyntheticGeneration:
    def test_scripted_clinician_dialogue(self, toy_graph, profiles_by_id):
        profile = profiles_by_id["p013"]
        clinician = scripted_clinician_for(toy_graph, profile)
        patient = RulePatient(profile, Persona(), seed=5)
        transcript, examples = generate_synthetic_dialogue(
            profile, toy_graph, clinician, patient, seed=5
        )
        assert transcript.outcome == DIAGNOSED
        assert examples, "each clinician turn must emit an example"
        # every target must survive the action parser
        for example in examples:
            action = parse_action(example.target)
            assert action.kind in ("question", "diagnosis")
        final = parse_action(examples[-1].target)
        assert final.kind == "diagnosis"
        assert final.diagnoses[0] == "gastroenteritis"  # gold listed first

    def test_gamma_one_profile_yields_high_tier_examples(self, toy_graph, profiles_by_id):
        profile = profiles_by_id["p001"]
        assert float(grounding_ratio(toy_graph, profile)) == 1.0
        clinician = scripted_clinician_for(toy_graph, profile)
        patient = RulePatient(profile, Persona(), seed=2)
        _, examples = generate_synthetic_dialogue(
            profile, toy_graph, clinician, patient, seed=2
        )
        assert all(example.tier == "high" for example in examples)

    def test_generation_prompt_contains_forced_diagnosis_rule(self):
        from graphdx import assets

        template = assets.prompt("dialogue_generation")
        assert "you must make a final diagnosis" in template
        assert "{gold_disease}" in template and "{max_turn}" in template

    def test_gold_reordered_first_when_clinician_strays(self, toy_graph, profiles_by_id):
        class StrayingClinician:
            def respond(self, prompt, history):
                return (
                    "<think> settling early </think> "
                    "<diagnosis> asthma, gastroenteritis, influenza </diagnosis>"
                )

        profile = profiles_by_id["p013"]  # gold: gastroenteritis
        patient = RulePatient(profile, Persona(), seed=3)
        transcript, examples = generate_synthetic_dialogue(
            profile, toy_graph, StrayingClinician(), patient, seed=3
        )
        assert transcript.diagnoses[0] == "gastroenteritis"

    def test_unresolvable_gold_skipped_with_error(self, toy_graph):
        from graphdx.profiles import PatientProfile

        profile = PatientProfile(
            id="ghost", age=30, gender="female", chief_complaint="odd",
            gold_diseases=("dragon pox",),
        )
        with pytest.raises(UnresolvableGoldError):
            scripted_clinician_for(toy_graph, profile)

    def test_examples_reference_oracle_subgraph(self, toy_graph, profiles_by_id):
        from graphdx.graph import linearize

        profile = profiles_by_id["p019"]
        clinician = scripted_clinician_for(toy_graph, profile)
        patient = RulePatient(profile, Persona(), seed=8)
        _, examples = generate_synthetic_dialogue(
            profile, toy_graph, clinician, patient, seed=8
        )
        oracle = expand_oracle_subgraph(toy_graph, ["D007"])
        statements = tuple(linearize(oracle, toy_graph))
        assert all(example.statements == statements for example in examples)
