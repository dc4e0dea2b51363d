from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from graphdx import assets
from graphdx.profiles import HpiEntry, PatientProfile, Persona, sample_persona
from graphdx.simulator import (
    AFFIRMED,
    DENIED,
    UNKNOWN,
    answer,
    apply_specificity,
    contains_digits,
    generalize_location,
    opening_statement,
    question_stance,
    render_patient_prompt,
    stable_rng,
)

BANNED = assets.phrase_lexicon()["banned_sensory"]

PLAIN = Persona()
LOW_SPEC = Persona(specificity="low")


@pytest.fixture()
def appendicitis_profile():
    return PatientProfile(
        id="t1", age=24, gender="male",
        chief_complaint="right lower quadrant abdominal pain",
        gold_diseases=("acute appendicitis",),
        hpi_affirmed=(
            HpiEntry(name="abdominal pain", details={
                "location": "right lower quadrant",
                "character": "stabbing",
                "duration": "3 days",
                "onset": "3 days ago",
                "factors": "worse when walking",
            }),
            HpiEntry(name="nausea", details={"duration": "2 days"}),
        ),
        hpi_denied=("diarrhea", "heartburn"),
        past_medical=("appendectomy discussion in 2019",),
    )


class TestOpening:
    def test_low_specificity_generalizes_location(self, appendicitis_profile):
        reply = opening_statement(appendicitis_profile, LOW_SPEC, seed=3)
        assert "my belly" in reply.text
        assert "quadrant" not in reply.text.lower()

    def test_normal_specificity_is_verbatim(self, appendicitis_profile):
        reply = opening_statement(appendicitis_profile, PLAIN, seed=3)
        assert reply.text == appendicitis_profile.chief_complaint

    def test_verbose_is_strictly_longer_than_plain(self, appendicitis_profile):
        plain = opening_statement(appendicitis_profile, PLAIN, seed=5)
        verbose = opening_statement(
            appendicitis_profile, Persona(personality="verbose"), seed=5
        )
        assert len(verbose.text) > len(plain.text)

    def test_opening_discloses_chief_complaint_attributes(self, appendicitis_profile):
        reply = opening_statement(appendicitis_profile, LOW_SPEC, seed=3)
        assert reply.disclosed == ("abdominal pain",)
        assert reply.stance == AFFIRMED

    def test_opening_with_no_matching_attribute_is_unknown(self):
        profile = PatientProfile(
            id="t2", age=40, gender="female", chief_complaint="just not myself lately",
            gold_diseases=("influenza",),
            hpi_affirmed=(HpiEntry(name="cough"),),
        )
        reply = opening_statement(profile, PLAIN, seed=1)
        assert reply.stance == UNKNOWN
        assert reply.disclosed == ()

    def test_synonym_in_chief_complaint_discloses(self):
        profile = PatientProfile(
            id="t3", age=61, gender="male", chief_complaint="trouble breathing at night",
            gold_diseases=("congestive heart failure",),
            hpi_affirmed=(HpiEntry(name="shortness of breath"),),
        )
        reply = opening_statement(profile, PLAIN, seed=1)
        assert reply.disclosed == ("shortness of breath",)


class TestAnswer:
    def test_denied_attribute(self, appendicitis_profile):
        reply = answer(appendicitis_profile, PLAIN, "Have you experienced diarrhea?", seed=2)
        assert reply.stance == DENIED
        assert reply.disclosed == ("diarrhea",)
        assert "no" in reply.text.lower()

    def test_unlisted_information_is_unknown(self, appendicitis_profile):
        reply = answer(appendicitis_profile, PLAIN, "Have you experienced wheezing?", seed=2)
        assert reply.stance == UNKNOWN
        assert reply.disclosed == ()
        assert "sure" in reply.text.lower() or "know" in reply.text.lower()

    def test_affirmed_attribute_disclosed(self, appendicitis_profile):
        reply = answer(
            appendicitis_profile, PLAIN, "Have you experienced nausea?", seed=2
        )
        assert reply.stance == AFFIRMED
        assert reply.disclosed == ("nausea",)

    def test_low_specificity_duration_has_no_digits(self, appendicitis_profile):
        reply = answer(
            appendicitis_profile, LOW_SPEC,
            "Have you experienced abdominal pain?", seed=2,
        )
        assert reply.stance == AFFIRMED
        assert not contains_digits(reply.text)

    def test_normal_specificity_echoes_details(self, appendicitis_profile):
        reply = answer(
            appendicitis_profile, PLAIN, "Have you experienced abdominal pain?", seed=2
        )
        assert "right lower quadrant" in reply.text

    def test_background_answer_precision_depends_on_recall(self):
        profile = PatientProfile(
            id="t4", age=70, gender="female", chief_complaint="racing heart",
            gold_diseases=("atrial fibrillation",),
            hpi_affirmed=(HpiEntry(name="palpitations"),),
            past_medical=("high blood pressure",),
        )
        question = "Do you have high blood pressure or a history of it?"
        precise = answer(profile, Persona(recall="high"), question, seed=9)
        hedged = answer(profile, Persona(recall="low"), question, seed=9)
        assert precise.stance == AFFIRMED and hedged.stance == AFFIRMED
        assert "high blood pressure" in precise.text.lower()
        assert "remember" in hedged.text.lower() or "think" in hedged.text.lower()

    def test_compound_question_answers_first_match(self, appendicitis_profile):
        reply = answer(
            appendicitis_profile, PLAIN,
            "Any diarrhea or nausea these days?", seed=4,
        )
        assert reply.disclosed == ("diarrhea",)
        assert reply.stance == DENIED

    def test_empty_question_rejected(self, appendicitis_profile):
        with pytest.raises(ValueError):
            answer(appendicitis_profile, PLAIN, "   ", seed=0)

    def test_determinism(self, appendicitis_profile):
        a = answer(appendicitis_profile, LOW_SPEC, "Have you experienced nausea?", seed=11)
        b = answer(appendicitis_profile, LOW_SPEC, "Have you experienced nausea?", seed=11)
        assert a == b

    def test_question_stance_matches_answer(self, appendicitis_profile):
        for question in (
            "Have you experienced nausea?",
            "Have you experienced diarrhea?",
            "Have you experienced wheezing?",
        ):
            stance, disclosed = question_stance(appendicitis_profile, question)
            reply = answer(appendicitis_profile, PLAIN, question, seed=5)
            assert stance == reply.stance
            assert disclosed == reply.disclosed


class TestApplySpecificity:
    def test_character_replaced_with_vague_adjective(self):
        text = apply_specificity({"character": "stabbing"}, LOW_SPEC, seed=1)
        assert "stabbing" not in text
        assert any(adj in text for adj in ("weird", "uncomfortable", "bad", "annoying"))

    def test_empty_details(self):
        assert apply_specificity({}, LOW_SPEC, seed=1) == ""

    def test_duration_stripped_of_numerals(self):
        text = apply_specificity({"duration": "3 days"}, LOW_SPEC, seed=1)
        assert text and not contains_digits(text)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown detail key"):
            apply_specificity({"severity": "bad"}, LOW_SPEC, seed=1)

    def test_high_proficiency_swaps_in_self_diagnosis(self):
        text = apply_specificity(
            {"character": "squeezing"},
            Persona(specificity="low", proficiency="high"),
            seed=1,
        )
        assert "squeezing" not in text
        assert "research" in text or "looked it up" in text or "suspect" in text

    def test_verbose_appends_filler(self):
        short = apply_specificity({"character": "dull"}, LOW_SPEC, seed=2)
        long = apply_specificity(
            {"character": "dull"},
            Persona(specificity="low", personality="verbose"),
            seed=2,
        )
        assert len(long) > len(short)

    def test_location_generalization_lexicon(self):
        assert generalize_location("under the rib") == "my chest"
        assert generalize_location("lower right quadrant") == "my belly"
        assert generalize_location("somewhere odd") == "around here"


class TestLowSpecificityInvariants:
    @given(st.integers(min_value=0, max_value=2_000))
    @settings(max_examples=80, deadline=None)
    def test_no_banned_terms_or_digits(self, seed, ):
        rng = random.Random(seed)
        persona = sample_persona(rng)
        persona = Persona(**{**persona.as_dict(), "specificity": "low"})
        details = {}
        if rng.random() < 0.8:
            details["character"] = rng.choice(list(BANNED) + ["dull", "tight"])
        if rng.random() < 0.8:
            details["duration"] = f"{rng.randint(1, 30)} days"
        if rng.random() < 0.5:
            details["onset"] = f"{rng.randint(1, 12)} weeks ago"
        if rng.random() < 0.5:
            details["location"] = rng.choice(
                ["left upper quadrant", "under the rib", "behind the sternum"]
            )
        text = apply_specificity(details, persona, seed=seed)
        lowered = text.lower()
        for banned in BANNED:
            assert banned not in lowered
        assert not contains_digits(text)


class TestConsistencyFuzz:
    @given(st.integers(min_value=0, max_value=5_000))
    @settings(max_examples=100, deadline=None)
    def test_never_contradicts_profile(self, seed):
        rng = random.Random(seed)
        affirmed = rng.sample(["cough", "fever", "nausea", "fatigue"], rng.randint(1, 3))
        denied_pool = [n for n in ["wheezing", "diarrhea", "heartburn"] if n not in affirmed]
        denied = rng.sample(denied_pool, rng.randint(0, len(denied_pool)))
        profile = PatientProfile(
            id=f"fz{seed}", age=30, gender="other", chief_complaint="feeling off",
            gold_diseases=("influenza",),
            hpi_affirmed=tuple(HpiEntry(name=n) for n in affirmed),
            hpi_denied=tuple(denied),
        )
        persona = sample_persona(rng)
        topic = rng.choice(affirmed + denied + ["palpitations", "dizziness"])
        question = rng.choice(
            [f"Have you experienced {topic}?", f"Any {topic} lately?", f"Tell me about {topic}."]
        )
        reply = answer(profile, persona, question, seed=seed)
        if reply.stance == AFFIRMED:
            for name in reply.disclosed:
                assert name not in denied
        if reply.stance == DENIED:
            for name in reply.disclosed:
                assert name not in affirmed
        if reply.stance == UNKNOWN:
            assert reply.disclosed == ()
            assert topic not in affirmed and topic not in denied


class TestPromptAssembly:
    def test_low_spec_high_recall_blocks_present(self, appendicitis_profile):
        persona = Persona(specificity="low", recall="high")
        prompt = render_patient_prompt(appendicitis_profile, persona, [])
        assert "Low Specificity" in prompt
        assert "'High Recall' applies only to medical history" in prompt

    def test_normal_plain_has_no_conditional_blocks(self, appendicitis_profile):
        prompt = render_patient_prompt(appendicitis_profile, PLAIN, [])
        assert "Low Specificity" not in prompt
        assert "High Recall" not in prompt

    def test_verbose_high_proficiency_block_order(self, appendicitis_profile):
        persona = Persona(specificity="low", proficiency="high", personality="verbose")
        prompt = render_patient_prompt(appendicitis_profile, persona, [])
        proficiency_pos = prompt.index("self-diagnosed disease")
        verbose_pos = prompt.index("largely irrelevant text")
        assert proficiency_pos < verbose_pos

    def test_history_rendered_in_turn_order(self, appendicitis_profile):
        history = [("patient", "my belly hurts"), ("system", "Have you experienced nausea?")]
        prompt = render_patient_prompt(appendicitis_profile, PLAIN, history)
        assert prompt.index("Patient: my belly hurts") < prompt.index(
            "Doctor: Have you experienced nausea?"
        )

    def test_matches_golden(self, appendicitis_profile, tmp_path):
        from conftest import GOLDEN_DIR

        persona = Persona(specificity="low", recall="high", personality="verbose")
        prompt = render_patient_prompt(
            appendicitis_profile, persona, [("patient", "something feels bad in my belly")]
        )
        golden = GOLDEN_DIR / "patient_prompt.txt"
        assert prompt == golden.read_text(encoding="utf-8")


def test_stable_rng_is_stable():
    assert stable_rng(1, "a").random() == stable_rng(1, "a").random()
    assert stable_rng(1, "a").random() != stable_rng(1, "b").random()
