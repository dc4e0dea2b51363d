"""HTTP clients for the model-served roles (scorer, verifier, patient).

Two wire contracts:

- chat completion: OpenAI-style ``POST {base_url}/chat/completions`` with
  ``{model, messages, temperature}``, answering
  ``{choices: [{message: {content}}]}``. Used for the verifier, the
  synthetic-dialogue clinician, the model-backed patient, and evidence
  extraction.
- scorer: ``POST {url}`` with ``{history: [{role, text}, ...]}``, answering
  ``{scores: {disease name: probability}}`` covering every disease.

Transport failures, malformed payloads, missing diseases, and
out-of-range probabilities each raise their own error type; callers
decide whether to retry or fall back.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import httpx

from .graph import KnowledgeGraph
from .hypotheses import DiseaseScores, EXTERNAL
from . import assets

ENV_ENDPOINT = "GRAPHDX_MODEL_ENDPOINT"
ENV_API_KEY = "GRAPHDX_MODEL_API_KEY"
ENV_MODEL = "GRAPHDX_MODEL_NAME"
ENV_TIMEOUT = "GRAPHDX_MODEL_TIMEOUT"


class EndpointError(Exception):
    """Base class for model-endpoint failures."""


class TransportError(EndpointError):
    """Network failure or non-2xx status after exhausting retries."""


class MalformedResponseError(EndpointError):
    """Response body does not match the wire contract."""


class CoverageError(EndpointError):
    """Scorer response is missing at least one graph disease."""


class RangeError(EndpointError):
    """Scorer response contains a probability outside [0, 1]."""


@dataclass
class EndpointConfig:
    base_url: str
    api_key: str = ""
    model: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    backoff: float = 1.0

    @classmethod
    def from_env(cls) -> "EndpointConfig":
        url = os.environ.get(ENV_ENDPOINT, "")
        if not url:
            raise ValueError(f"{ENV_ENDPOINT} is not set")
        return cls(
            base_url=url,
            api_key=os.environ.get(ENV_API_KEY, ""),
            model=os.environ.get(ENV_MODEL, ""),
            timeout=float(os.environ.get(ENV_TIMEOUT, "30")),
        )


class _HttpClient:
    def __init__(self, config: EndpointConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = httpx.Client(
            timeout=config.timeout, headers=headers, transport=transport
        )

    def post_json(self, url: str, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                response = self._client.post(url, json=payload)
                response.raise_for_status()
                return response.json()
            except (httpx.HTTPError, json.JSONDecodeError) as exc:
                last_error = exc
                if attempt < self.config.max_retries and self.config.backoff > 0:
                    time.sleep(self.config.backoff * (attempt + 1))
        raise TransportError(
            f"request to {url} failed after {self.config.max_retries + 1} attempt(s): "
            f"{last_error!r}"
        )

    def close(self) -> None:
        self._client.close()


class ChatCompletionClient(_HttpClient):
    """Minimal OpenAI-compatible chat client with retry."""

    def complete(self, messages: list[dict[str, str]]) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        body = self.post_json(url, payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected chat payload: {body!r}") from exc
        if not isinstance(content, str):
            raise MalformedResponseError(f"content is not text: {content!r}")
        return content

    def complete_user(self, prompt: str) -> str:
        return self.complete([{"role": "user", "content": prompt}])


class ScoreEndpointClient(_HttpClient):
    """Client for the disease-scorer wire contract."""

    def score(self, history: list[tuple[str, str]]) -> dict[str, float]:
        payload = {"history": [{"role": role, "text": text} for role, text in history]}
        body = self.post_json(self.config.base_url, payload)
        scores = body.get("scores")
        if not isinstance(scores, dict):
            raise MalformedResponseError(f"no scores map in response: {body!r}")
        out: dict[str, float] = {}
        for name, value in scores.items():
            if not isinstance(value, (int, float)):
                raise MalformedResponseError(f"score for {name!r} is not numeric")
            out[str(name)] = float(value)
        return out


def external_scores(
    client: ScoreEndpointClient,
    g: KnowledgeGraph,
    history: list[tuple[str, str]],
) -> DiseaseScores:
    """Fetch per-disease probabilities and validate coverage and range.

    Response names are resolved through the graph's name index; every
    disease node must be covered and every value must lie in [0, 1].
    """
    by_name = client.score(history)
    scores: dict[str, float] = {}
    for name, value in by_name.items():
        node_id = g.resolve_name(name)
        if node_id is not None:
            if not 0.0 <= value <= 1.0:
                raise RangeError(f"probability for {name!r} out of range: {value}")
            scores[node_id] = value
    missing = [d for d in g.disease_ids if d not in scores]
    if missing:
        names = ", ".join(g.name_of(d) for d in missing[:5])
        raise CoverageError(
            f"scorer response missing {len(missing)} disease(s), e.g. {names}"
        )
    return DiseaseScores(scores=scores, source=EXTERNAL)


def extract_evidence(
    client: ChatCompletionClient,
    history: list[tuple[str, str]],
) -> tuple[list[str], list[str]]:
    """Model-based extraction of confirmed/denied attributes from a dialogue.

    Returns (positive, negative) attribute name lists parsed from the
    model's JSON reply.
    """
    from .verifier import render_dialogue

    prompt = assets.prompt("evidence_extraction").format(dialogue=render_dialogue(history))
    raw = client.complete_user(prompt)
    start = raw.find("{")
    end = raw.rfind("}")
    if start < 0 or end <= start:
        raise MalformedResponseError(f"no JSON object in extraction reply: {raw!r}")
    try:
        doc = json.loads(raw[start : end + 1])
    except json.JSONDecodeError as exc:
        raise MalformedResponseError(f"bad JSON in extraction reply: {raw!r}") from exc
    positive = doc.get("positive", [])
    negative = doc.get("negative", [])
    if not isinstance(positive, list) or not isinstance(negative, list):
        raise MalformedResponseError(f"extraction lists malformed: {doc!r}")
    return [str(x) for x in positive], [str(x) for x in negative]
