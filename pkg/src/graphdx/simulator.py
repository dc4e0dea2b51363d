"""Deterministic patient simulator and prompt assembly for a model-backed one.

The rule engine turns a profile + persona into utterances without any model
call: questions are matched against the profile by normalized-name
containment (plus a small synonym table), and low-specificity personas
render symptom details through vagueness lexicons instead of the precise
profile values.

Every reply also carries a machine-readable side channel (``disclosed``
attribute names and a ``stance``). This is what keeps the fully
deterministic pipeline model-free: the orchestrator updates its evidence
ledger from the stance directly, even when the surface text is vague.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass

from . import assets
from .graph import normalize_name
from .profiles import DETAIL_KEYS, HpiEntry, PatientProfile, Persona

AFFIRMED = "affirmed"
DENIED = "denied"
UNKNOWN = "unknown"

_DIGITS = re.compile(r"\d")


@dataclass(frozen=True)
class PatientReply:
    text: str
    disclosed: tuple[str, ...]
    stance: str

    def __post_init__(self):
        if self.stance not in (AFFIRMED, DENIED, UNKNOWN):
            raise ValueError(f"unknown stance {self.stance!r}")
        if self.stance == UNKNOWN and self.disclosed:
            raise ValueError("unknown stance must not disclose attributes")


def stable_rng(*parts) -> random.Random:
    """Seed an RNG from a stable hash of the given parts.

    ``hash()`` is salted per process, so goldens need a digest instead.
    """
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def generalize_location(text: str) -> str:
    """Map a precise location phrase to a vague region term."""
    normalized = normalize_name(text)
    for keyword, general in assets.location_lexicon():
        if keyword in normalized:
            return general
    return "around here"


def apply_specificity(details: dict[str, str], persona: Persona, seed) -> str:
    """Render a detail map the way a low-specificity patient would say it.

    Location is generalized through the vagueness lexicon, character terms
    become subjective adjectives, duration/onset lose all numerals, and
    factors turn into uncertainty phrases. High proficiency swaps the
    character description for a self-diagnosis remark and verbose personas
    append irrelevant filler. Recall level changes nothing here: it only
    affects medical-history answers, never current-symptom vagueness.
    """
    for key in details:
        if key not in DETAIL_KEYS:
            raise ValueError(f"unknown detail key {key!r}; allowed: {DETAIL_KEYS}")
    phrases = assets.phrase_lexicon()
    rng = stable_rng(seed, "specificity", *sorted(details.items()))
    parts: list[str] = []
    if "location" in details:
        parts.append(f"It's {generalize_location(details['location'])}, somewhere around there.")
    if "character" in details:
        if persona.proficiency == "high":
            parts.append(rng.choice(phrases["self_diagnosis"]))
        else:
            parts.append(f"It just feels {rng.choice(phrases['character'])}.")
    if "duration" in details:
        parts.append(f"It's been going on {rng.choice(phrases['duration'])}.")
    if "onset" in details:
        parts.append(f"It started {rng.choice(phrases['onset'])}.")
    if "factors" in details:
        parts.append(rng.choice(phrases["factors"]))
    if parts and persona.personality == "verbose":
        parts.append(rng.choice(phrases["filler"]))
    return " ".join(parts)


def _render_details_plain(details: dict[str, str]) -> str:
    parts = []
    if "location" in details:
        parts.append(f"It's in the {details['location']}.")
    if "character" in details:
        parts.append(f"It feels {details['character']}.")
    if "onset" in details:
        parts.append(f"It started {details['onset']}.")
    if "duration" in details:
        parts.append(f"It has lasted {details['duration']}.")
    if "factors" in details:
        parts.append(f"It changes with {details['factors']}.")
    return " ".join(parts)


def _decorate(text: str, persona: Persona, rng: random.Random) -> str:
    """Apply persona surface decorations shared by openings and answers."""
    phrases = assets.phrase_lexicon()
    if persona.proficiency == "low":
        # short, fragmented utterances: no added color
        return text
    if persona.personality == "distrust":
        text = f"{rng.choice(phrases['hedge'])} {text}"
    if persona.personality == "overanxious":
        text = f"{text} {rng.choice(phrases['worry'])}"
    if persona.personality == "verbose":
        text = f"{text} {rng.choice(phrases['filler'])}"
    if persona.confusion == "high":
        text = f"{text} {rng.choice(phrases['tangent'])}"
    return text


def _match_names(profile: PatientProfile, text: str):
    """Find profile attributes referenced in text by normalized containment.

    Returns (category, canonical name, HpiEntry or None) for the earliest
    match, preferring longer names on position ties; None when nothing in
    the profile is mentioned. Compound questions therefore resolve to the
    first mentioned attribute only.
    """
    haystack = f" {normalize_name(text)} "
    synonyms = assets.synonym_lexicon()
    candidates: list[tuple[int, int, ...]] = []

    def positions_of(name: str) -> list[tuple[int, int]]:
        hits = []
        needle = normalize_name(name)
        if needle and needle in haystack:
            hits.append((haystack.index(needle), len(needle)))
        for lay, canonical in synonyms.items():
            if normalize_name(canonical) == needle and lay in haystack:
                hits.append((haystack.index(lay), len(lay)))
        return hits

    for entry in profile.hpi_affirmed:
        for pos, length in positions_of(entry.name):
            candidates.append((pos, -length, 0, AFFIRMED, entry.name, entry))
    for name in profile.hpi_denied:
        for pos, length in positions_of(name):
            candidates.append((pos, -length, 1, DENIED, name, None))
    for name in profile.background_entries():
        for pos, length in positions_of(name):
            candidates.append((pos, -length, 2, "background", name, None))
    if not candidates:
        return None
    _, _, _, category, name, entry = min(candidates)
    return category, name, entry


def opening_statement(profile: PatientProfile, persona: Persona, seed) -> PatientReply:
    """The patient's first utterance, derived from the chief complaint."""
    rng = stable_rng(seed, profile.id, "opening")
    phrases = assets.phrase_lexicon()
    if persona.specificity == "low":
        region = generalize_location(profile.chief_complaint)
        adjective = rng.choice(phrases["character"])
        text = f"Something feels {adjective} in {region}."
        if region == "around here":
            text = f"I just haven't been feeling right. Something is {adjective}."
    else:
        text = profile.chief_complaint
    text = _decorate(text, persona, rng)

    disclosed = []
    complaint = f" {normalize_name(profile.chief_complaint)} "
    synonyms = assets.synonym_lexicon()
    for entry in profile.hpi_affirmed:
        needle = normalize_name(entry.name)
        mentioned = needle in complaint or any(
            lay in complaint
            for lay, canonical in synonyms.items()
            if normalize_name(canonical) == needle
        )
        if mentioned:
            disclosed.append(entry.name)
    stance = AFFIRMED if disclosed else UNKNOWN
    return PatientReply(text=text, disclosed=tuple(disclosed), stance=stance)


def answer(profile: PatientProfile, persona: Persona, question: str, seed) -> PatientReply:
    """Answer a clarifying question from the profile.

    Affirmed attributes yield an affirmation (vague or plain depending on
    specificity), denied ones a negation, and anything absent from the
    profile an unknown reply.
    """
    if not question.strip():
        raise ValueError("question must be non-empty")
    rng = stable_rng(seed, profile.id, "answer", question)
    phrases = assets.phrase_lexicon()
    match = _match_names(profile, question)

    if match is None:
        return PatientReply(
            text=rng.choice(phrases["unknown"]), disclosed=(), stance=UNKNOWN
        )

    category, name, entry = match
    if category == AFFIRMED:
        assert isinstance(entry, HpiEntry)
        if persona.specificity == "low":
            detail_text = apply_specificity(dict(entry.details), persona, seed)
            text = f"Yes, something like that. {detail_text}".strip()
        else:
            text = f"Yes, I have {entry.name.lower()}. {_render_details_plain(dict(entry.details))}".strip()
        if persona.proficiency == "low":
            text = "Yes. " + text.partition(". ")[0].removeprefix("Yes, ")
        return PatientReply(
            text=_decorate(text, persona, rng), disclosed=(name,), stance=AFFIRMED
        )
    if category == DENIED:
        text = rng.choice(phrases["denial"])
        if persona.proficiency == "low":
            text = "No."
        return PatientReply(
            text=_decorate(text, persona, rng), disclosed=(name,), stance=DENIED
        )

    # background history: precision depends on recall level
    if persona.recall == "high":
        text = f"Yes. {name}."
    else:
        text = f"I think so, something like {name.lower()}, if I remember right."
    return PatientReply(
        text=_decorate(text, persona, rng), disclosed=(name,), stance=AFFIRMED
    )


def question_stance(profile: PatientProfile, question: str) -> tuple[str, tuple[str, ...]]:
    """Ground-truth (stance, disclosed) a profile implies for a question.

    Used to interpret live sessions replayed against a known profile: the
    clinical facts decide the stance regardless of how the reply was worded.
    """
    match = _match_names(profile, question)
    if match is None:
        return UNKNOWN, ()
    category, name, _ = match
    if category == DENIED:
        return DENIED, (name,)
    return AFFIRMED, (name,)


def render_patient_prompt(
    profile: PatientProfile,
    persona: Persona,
    history: list[tuple[str, str]],
) -> str:
    """Assemble the system prompt for a model-backed patient.

    The base persona instructions come first; when specificity is low, the
    low-specificity block is appended, followed by each persona-conditional
    block whose condition holds, in fixed order: high recall, high
    proficiency, verbose.
    """
    record_lines = []
    for entry in profile.hpi_affirmed:
        details = "; ".join(f"{k}: {v}" for k, v in entry.details.items())
        record_lines.append(f"- Has: {entry.name}" + (f" ({details})" if details else ""))
    for name in profile.hpi_denied:
        record_lines.append(f"- Does not have: {name}")
    for name in profile.background_entries():
        record_lines.append(f"- History: {name}")

    blocks = [
        assets.prompt("patient_base").format(
            age=profile.age,
            gender=profile.gender,
            chief_complaint=profile.chief_complaint,
            proficiency=persona.proficiency,
            personality=persona.personality,
            recall=persona.recall,
            confusion=persona.confusion,
            record="\n".join(record_lines) if record_lines else "(no further details)",
        )
    ]
    if persona.specificity == "low":
        blocks.append(assets.prompt("patient_low_specificity"))
        if persona.recall == "high":
            blocks.append(assets.prompt("patient_high_recall"))
        if persona.proficiency == "high":
            blocks.append(assets.prompt("patient_high_proficiency"))
        if persona.personality == "verbose":
            blocks.append(assets.prompt("patient_verbose"))

    lines = []
    for role, text in history:
        speaker = "Patient" if role == "patient" else "Doctor"
        lines.append(f"{speaker}: {text}")
    blocks.append("Dialogue so far:\n" + ("\n".join(lines) if lines else "(none)"))
    return "\n\n".join(blocks)


def contains_digits(text: str) -> bool:
    return bool(_DIGITS.search(text))
