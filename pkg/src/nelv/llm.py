"""Optional language-model turn extractor.

Configured entirely from the environment (NELV_LLM_URL, NELV_LLM_KEY,
NELV_LLM_MODEL, NELV_LLM_TIMEOUT_MS) and used as a pre-parser in front
of the rule grammar. Every failure path returns None so a missing or
broken model never blocks parsing.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Sequence

import httpx

from .parsing import SurveyRequest, TurnUpdate

log = logging.getLogger(__name__)

_SYSTEM_PROMPT = (
    "Extract flight-mission fields from the user's message. Reply with one "
    "JSON object, no prose. Keys (omit what the message does not state): "
    'start, end (airport names), fleet_size (int), preference (one of '
    '"balanced", "cheapest", "fastest", "shortest"), visit (list of place '
    "categories), survey {category, center, radius_m}, max_duration_s. "
    "Known categories: {categories}."
)


@dataclass(frozen=True)
class LlmConfig:
    url: str
    model: str
    key: str | None = None
    timeout_ms: float = 10_000.0


class LlmExtractor:
    """Chat-completions client mapping one turn to a TurnUpdate."""

    def __init__(self, config: LlmConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        headers = {"Authorization": f"Bearer {config.key}"} if config.key else {}
        self._client = httpx.Client(
            base_url=config.url,
            headers=headers,
            timeout=config.timeout_ms / 1000.0,
            transport=transport,
        )

    def try_extract(self, turn: str, categories: Sequence[str]) -> TurnUpdate | None:
        try:
            response = self._client.post(
                "/chat/completions",
                json={
                    "model": self.config.model,
                    "messages": [
                        {"role": "system", "content": _SYSTEM_PROMPT.replace("{categories}", ", ".join(categories))},
                        {"role": "user", "content": turn},
                    ],
                    "temperature": 0,
                },
            )
            response.raise_for_status()
            content = response.json()["choices"][0]["message"]["content"]
            return _update_from_json(json.loads(content))
        except Exception as exc:
            log.warning("language-model extraction failed, falling back to rules: %s", exc)
            return None


def _update_from_json(data: dict) -> TurnUpdate:
    survey = None
    if isinstance(data.get("survey"), dict):
        raw = data["survey"]
        radius = raw.get("radius_m")
        survey = SurveyRequest(
            category_ref=str(raw["category"]),
            center_ref=str(raw["center"]) if raw.get("center") else None,
            radius_m=float(radius) if radius is not None else None,
        )
    visit = data.get("visit") or ()
    return TurnUpdate(
        start_ref=str(data["start"]) if data.get("start") else None,
        end_ref=str(data["end"]) if data.get("end") else None,
        fleet_size=int(data["fleet_size"]) if data.get("fleet_size") is not None else None,
        preference=str(data["preference"]) if data.get("preference") else None,
        visit_refs=tuple(str(v) for v in visit),
        survey=survey,
        max_duration_s=float(data["max_duration_s"]) if data.get("max_duration_s") is not None else None,
    )


def from_env(environ=os.environ) -> LlmExtractor | None:
    """Build the extractor when NELV_LLM_URL is set; otherwise None."""
    url = environ.get("NELV_LLM_URL")
    if not url:
        return None
    config = LlmConfig(
        url=url,
        model=environ.get("NELV_LLM_MODEL", "default"),
        key=environ.get("NELV_LLM_KEY"),
        timeout_ms=float(environ.get("NELV_LLM_TIMEOUT_MS", "10000")),
    )
    return LlmExtractor(config)
