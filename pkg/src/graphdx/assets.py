"""Loaders for the prompt templates and lexicon data files shipped with the package."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

PROMPT_VERSIONS = {
    "verifier": "verifier_v1.txt",
    "dialogue_generation": "dialogue_generation_v1.txt",
    "patient_base": "patient_base_v1.txt",
    "patient_low_specificity": "patient_low_specificity_v1.txt",
    "patient_high_recall": "patient_high_recall_v1.txt",
    "patient_high_proficiency": "patient_high_proficiency_v1.txt",
    "patient_verbose": "patient_verbose_v1.txt",
    "evidence_extraction": "evidence_extraction_v1.txt",
}


@lru_cache(maxsize=None)
def prompt(name: str) -> str:
    filename = PROMPT_VERSIONS[name]
    ref = resources.files("graphdx").joinpath("assets/prompts").joinpath(filename)
    return ref.read_text(encoding="utf-8")


def _lexicon_lines(name: str) -> list[tuple[str, str]]:
    ref = resources.files("graphdx").joinpath("assets/lexicons").joinpath(name)
    pairs: list[tuple[str, str]] = []
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            continue
        pairs.append((key.strip(), value.strip()))
    return pairs


@lru_cache(maxsize=None)
def location_lexicon() -> tuple[tuple[str, str], ...]:
    """Ordered (keyword, general term) pairs; first contained keyword wins."""
    return tuple(_lexicon_lines("locations.txt"))


@lru_cache(maxsize=None)
def phrase_lexicon() -> dict[str, tuple[str, ...]]:
    """Phrase lists keyed by purpose (character, duration, filler, ...)."""
    return {
        key: tuple(part.strip() for part in value.split("|") if part.strip())
        for key, value in _lexicon_lines("phrases.txt")
    }


@lru_cache(maxsize=None)
def synonym_lexicon() -> dict[str, str]:
    """Lay phrasing -> canonical attribute name."""
    return {key: value for key, value in _lexicon_lines("synonyms.txt")}
