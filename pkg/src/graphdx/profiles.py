"""Patient profiles and personas.

A profile is the ground truth a simulated patient answers from: basic
information, the history of present illness (affirmed and denied
attributes), and background history. A persona is the behavioral overlay
that shapes how the same facts come out in conversation.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

DETAIL_KEYS = ("location", "character", "duration", "onset", "factors")

PROFICIENCY_LEVELS = ("low", "medium", "high")
PERSONALITIES = ("plain", "distrust", "overanxious", "verbose")
RECALL_LEVELS = ("low", "high")
CONFUSION_LEVELS = ("low", "high")
SPECIFICITY_LEVELS = ("low", "normal")

GENDERS = ("female", "male", "other")


@dataclass(frozen=True)
class Persona:
    """Behavioral trait bundle driving the patient simulator."""

    proficiency: str = "medium"
    personality: str = "plain"
    recall: str = "high"
    confusion: str = "low"
    specificity: str = "normal"

    def __post_init__(self):
        checks = [
            ("proficiency", self.proficiency, PROFICIENCY_LEVELS),
            ("personality", self.personality, PERSONALITIES),
            ("recall", self.recall, RECALL_LEVELS),
            ("confusion", self.confusion, CONFUSION_LEVELS),
            ("specificity", self.specificity, SPECIFICITY_LEVELS),
        ]
        for name, value, allowed in checks:
            if value not in allowed:
                raise ValueError(f"persona {name} must be one of {allowed}, got {value!r}")

    def as_dict(self) -> dict[str, str]:
        return {
            "confusion": self.confusion,
            "personality": self.personality,
            "proficiency": self.proficiency,
            "recall": self.recall,
            "specificity": self.specificity,
        }


def sample_persona(rng: random.Random) -> Persona:
    """Uniform draw over every persona dimension."""
    return Persona(
        proficiency=rng.choice(PROFICIENCY_LEVELS),
        personality=rng.choice(PERSONALITIES),
        recall=rng.choice(RECALL_LEVELS),
        confusion=rng.choice(CONFUSION_LEVELS),
        specificity=rng.choice(SPECIFICITY_LEVELS),
    )


@dataclass(frozen=True)
class HpiEntry:
    """One affirmed present-illness attribute with its detail map."""

    name: str
    details: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for key in self.details:
            if key not in DETAIL_KEYS:
                raise ValueError(
                    f"unknown detail key {key!r} on {self.name!r}; "
                    f"allowed: {DETAIL_KEYS}"
                )


@dataclass(frozen=True)
class PatientProfile:
    id: str
    age: int
    gender: str
    chief_complaint: str
    gold_diseases: tuple[str, ...]
    hpi_affirmed: tuple[HpiEntry, ...] = ()
    hpi_denied: tuple[str, ...] = ()
    past_medical: tuple[str, ...] = ()
    family: tuple[str, ...] = ()
    social: tuple[str, ...] = ()

    def __post_init__(self):
        if not 1 <= len(self.gold_diseases) <= 4:
            raise ValueError(
                f"profile {self.id!r}: expected 1-4 gold diseases, "
                f"got {len(self.gold_diseases)}"
            )
        affirmed = {e.name.lower().strip() for e in self.hpi_affirmed}
        denied = {n.lower().strip() for n in self.hpi_denied}
        overlap = affirmed & denied
        if overlap:
            raise ValueError(
                f"profile {self.id!r}: attributes both affirmed and denied: "
                f"{sorted(overlap)}"
            )
        if self.gender not in GENDERS:
            raise ValueError(f"profile {self.id!r}: unknown gender {self.gender!r}")

    def background_entries(self) -> Iterator[str]:
        yield from self.past_medical
        yield from self.family
        yield from self.social


def profile_from_dict(doc: Mapping) -> PatientProfile:
    background = doc.get("background", {})
    return PatientProfile(
        id=str(doc["id"]),
        age=int(doc["age"]),
        gender=str(doc["gender"]),
        chief_complaint=str(doc["chief_complaint"]),
        gold_diseases=tuple(doc["gold_diseases"]),
        hpi_affirmed=tuple(
            HpiEntry(name=str(e["name"]), details=dict(e.get("details", {})))
            for e in doc.get("hpi_affirmed", [])
        ),
        hpi_denied=tuple(doc.get("hpi_denied", [])),
        past_medical=tuple(background.get("past_medical", [])),
        family=tuple(background.get("family", [])),
        social=tuple(background.get("social", [])),
    )


def profile_to_dict(profile: PatientProfile) -> dict:
    return {
        "id": profile.id,
        "age": profile.age,
        "gender": profile.gender,
        "chief_complaint": profile.chief_complaint,
        "gold_diseases": list(profile.gold_diseases),
        "hpi_affirmed": [
            {"name": e.name, "details": dict(e.details)} for e in profile.hpi_affirmed
        ],
        "hpi_denied": list(profile.hpi_denied),
        "background": {
            "past_medical": list(profile.past_medical),
            "family": list(profile.family),
            "social": list(profile.social),
        },
    }


def load_profile(source: str | Path | Mapping) -> PatientProfile:
    if isinstance(source, Mapping):
        return profile_from_dict(source)
    return profile_from_dict(json.loads(Path(source).read_text(encoding="utf-8")))


def load_profiles(directory: str | Path) -> list[PatientProfile]:
    """Load every ``*.json`` profile in a directory, sorted by filename."""
    paths = sorted(Path(directory).glob("*.json"))
    return [load_profile(p) for p in paths]
