"""Natural-language mission instructions to a structured mission spec.

Each conversation turn is reduced to a partial update (rule-based regex
grammar, optionally preceded by a language-model extractor); the updates
fold left to right over the defaults, so later turns override earlier
ones. References are resolved against the catalog only after folding,
which keeps a corrected reference from producing stale prompts.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

from .errors import ResolutionError
from .geodata import Airport, DataCatalog
from .geodesy import great_circle_distance

PREFERENCES = ("balanced", "cheapest", "fastest", "shortest")

# Distance thresholds for the leg-length regime a mission falls into.
SHORT_RANGE_MAX_M = 20_000.0
MEDIUM_RANGE_MAX_M = 500_000.0

_PREFERENCE_WORDS = {
    "balanced": "balanced",
    "balance": "balanced",
    "cheapest": "cheapest",
    "cheaply": "cheapest",
    "cheap": "cheapest",
    "economical": "cheapest",
    "fastest": "fastest",
    "quickest": "fastest",
    "quickly": "fastest",
    "fast": "fastest",
    "shortest": "shortest",
}

_REF = r"[^,.;]+?"
_BOUNDARY = r"(?=$|[,.;]|\s+(?:and|then|visit|check|survey|inspect|using|with|via|stopping)\b)"

_FROM_TO = re.compile(rf"\bfrom\s+(?P<a>{_REF})\s+to\s+(?P<b>{_REF}){_BOUNDARY}", re.I)
_START_ONLY = re.compile(rf"\b(?:take\s+off|start|depart|launch)\s+(?:from|at)\s+(?P<a>{_REF}){_BOUNDARY}", re.I)
_END_ONLY = re.compile(rf"\b(?:land|arrive|end|finish)\s+(?:at|in)\s+(?P<b>{_REF}){_BOUNDARY}", re.I)
_FLEET = re.compile(r"\b(?:i\s+have\s+|use\s+|with\s+|send\s+)?(\d+)\s+(?:uav|drone|aircraft|vehicle)s?\b", re.I)
_SURVEY = re.compile(
    rf"\b(?:check|survey|inspect|cover)\s+(?:all|every)(?:\s+the)?\s+(?P<cat>{_REF})"
    rf"(?:\s+near\s+(?P<center>{_REF}))?"
    r"(?:\s+within\s+(?P<radius>\d+(?:\.\d+)?)\s*(?P<unit>km|kilometers?|kilometres?|m|meters?|metres?))?"
    rf"\s*{_BOUNDARY}",
    re.I,
)
_VISIT = re.compile(rf"\bvisit\s+(?P<items>{_REF})(?=$|[,.;]|\s+(?:on|along|during|before)\b)", re.I)
_DURATION = re.compile(
    r"\b(?:arrive\s+)?within\s+(?P<value>\d+(?:\.\d+)?)\s*(?P<unit>hours?|hrs?|h|minutes?|mins?)\b", re.I
)
_ARTICLE = re.compile(r"^(?:a|an|the|one)\s+", re.I)


@dataclass(frozen=True)
class SurveyRequest:
    """Cover every POI of a category around a reference location."""

    category_ref: str
    center_ref: str | None = None
    radius_m: float | None = None


@dataclass(frozen=True)
class TurnUpdate:
    """Fields one conversation turn contributes; None means unchanged."""

    start_ref: str | None = None
    end_ref: str | None = None
    fleet_size: int | None = None
    preference: str | None = None
    visit_refs: tuple[str, ...] = ()
    survey: SurveyRequest | None = None
    max_duration_s: float | None = None

    def is_empty(self) -> bool:
        return self == TurnUpdate()


@dataclass(frozen=True)
class MissionSpec:
    """Resolved mission parameters; airport fields hold catalog ids."""

    start_id: str | None = None
    end_id: str | None = None
    fleet_size: int = 1
    preference: str = "balanced"
    visit_categories: tuple[str, ...] = ()
    survey_category: str | None = None
    survey_center_id: str | None = None
    survey_radius_m: float | None = None
    max_duration_s: float | None = None

    @property
    def is_survey(self) -> bool:
        return self.survey_category is not None


@dataclass(frozen=True)
class ParseResult:
    spec: MissionSpec
    missing: tuple[str, ...] = ()

    @property
    def ready(self) -> bool:
        return not self.missing


class TurnExtractor(Protocol):
    def try_extract(self, turn: str, categories: Sequence[str]) -> TurnUpdate | None: ...


def _to_meters(value: float, unit: str) -> float:
    return value * 1000.0 if unit.lower().startswith("k") else value


def _to_seconds(value: float, unit: str) -> float:
    return value * 3600.0 if unit.lower().startswith("h") else value * 60.0


def _strip_article(text: str) -> str:
    return _ARTICLE.sub("", text.strip())


def extract_update(turn: str) -> TurnUpdate:
    """Rule-based extraction of one turn; unknown phrasing yields no fields."""
    update = TurnUpdate()
    match = _FROM_TO.search(turn)
    if match:
        update = replace(update, start_ref=match["a"].strip(), end_ref=match["b"].strip())
    match = _START_ONLY.search(turn)
    if match:
        update = replace(update, start_ref=match["a"].strip())
    match = _END_ONLY.search(turn)
    if match:
        update = replace(update, end_ref=match["b"].strip())
    match = _FLEET.search(turn)
    if match:
        update = replace(update, fleet_size=int(match[1]))
    match = _SURVEY.search(turn)
    if match:
        radius = match["radius"]
        update = replace(
            update,
            survey=SurveyRequest(
                category_ref=match["cat"].strip(),
                center_ref=match["center"].strip() if match["center"] else None,
                radius_m=_to_meters(float(radius), match["unit"]) if radius else None,
            ),
        )
    match = _VISIT.search(turn)
    if match:
        items = re.split(r",|\band\b", match["items"], flags=re.I)
        refs = tuple(_strip_article(item) for item in items if item.strip())
        update = replace(update, visit_refs=refs)
    match = _DURATION.search(turn)
    if match:
        update = replace(update, max_duration_s=_to_seconds(float(match["value"]), match["unit"]))
    lowered = turn.lower()
    for word, preference in _PREFERENCE_WORDS.items():
        if re.search(rf"\b{word}\b", lowered):
            update = replace(update, preference=preference)
            break
    return update


def fold_updates(updates: Sequence[TurnUpdate]) -> TurnUpdate:
    """Later turns override; visit requests accumulate without duplicates."""
    folded = TurnUpdate()
    visits: list[str] = []
    for update in updates:
        folded = replace(
            folded,
            start_ref=update.start_ref or folded.start_ref,
            end_ref=update.end_ref or folded.end_ref,
            fleet_size=update.fleet_size if update.fleet_size is not None else folded.fleet_size,
            preference=update.preference or folded.preference,
            survey=update.survey or folded.survey,
            max_duration_s=update.max_duration_s if update.max_duration_s is not None else folded.max_duration_s,
        )
        for ref in update.visit_refs:
            if ref.lower() not in [v.lower() for v in visits]:
                visits.append(ref)
    return replace(folded, visit_refs=tuple(visits))


def resolve_airport(catalog: DataCatalog, reference: str) -> Airport:
    """Exact id match first, then unique case-insensitive name substring."""
    needle = reference.strip().strip('"').strip()
    if not needle:
        raise ResolutionError(reference, ())
    for airport in catalog.airports:
        if airport.id.lower() == needle.lower():
            return airport
    matches = [a for a in catalog.airports if needle.lower() in a.name.lower()]
    if len(matches) == 1:
        return matches[0]
    if matches:
        raise ResolutionError(reference, tuple(a.name for a in matches[:3]))
    names = [a.name for a in catalog.airports]
    suggestions = difflib.get_close_matches(needle, names, n=3, cutoff=0.5)
    raise ResolutionError(reference, tuple(suggestions))


def _singular(word: str) -> str:
    if word.endswith("ies"):
        return word[:-3] + "y"
    if word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def resolve_category(catalog: DataCatalog, reference: str) -> str:
    categories = sorted({p.category for p in catalog.pois})
    by_norm = {c.lower(): c for c in categories}
    needle = _strip_article(reference).lower().replace("-", "_").replace(" ", "_")
    for candidate in (needle, _singular(needle), "_".join(_singular(w) for w in needle.split("_"))):
        if candidate in by_norm:
            return by_norm[candidate]
    suggestions = difflib.get_close_matches(needle, list(by_norm), n=3, cutoff=0.4)
    raise ResolutionError(reference, tuple(by_norm[s] for s in suggestions))


def parse_instructions(
    turns: Sequence[str],
    catalog: DataCatalog,
    llm: TurnExtractor | None = None,
) -> ParseResult:
    """Parse a whole conversation into a mission spec plus open questions.

    The optional language-model extractor is consulted per turn and any
    failure in it falls back to the rule grammar, so parsing never
    depends on the model being reachable.
    """
    categories = sorted({p.category for p in catalog.pois})
    updates = []
    for turn in turns:
        update = None
        if llm is not None:
            try:
                update = llm.try_extract(turn, categories)
            except Exception:
                update = None
        if update is None:
            update = extract_update(turn)
        updates.append(update)
    folded = fold_updates(updates)

    missing: list[str] = []
    spec = MissionSpec()
    if folded.fleet_size is not None:
        if folded.fleet_size < 1:
            missing.append("How many aircraft are available? A fleet needs at least one.")
        else:
            spec = replace(spec, fleet_size=folded.fleet_size)
    if folded.preference is not None:
        spec = replace(spec, preference=folded.preference)
    if folded.max_duration_s is not None:
        spec = replace(spec, max_duration_s=folded.max_duration_s)

    def resolve_or_prompt(reference: str | None, resolver, prompt_prefix: str):
        if reference is None:
            return None
        try:
            return resolver(catalog, reference)
        except ResolutionError as exc:
            missing.append(f"{prompt_prefix}: {exc}")
            return None

    start = resolve_or_prompt(folded.start_ref, resolve_airport, "Which airport is the start")
    end = resolve_or_prompt(folded.end_ref, resolve_airport, "Which airport is the destination")
    if start is not None:
        spec = replace(spec, start_id=start.id)
    if end is not None:
        spec = replace(spec, end_id=end.id)

    if folded.survey is not None:
        category = resolve_or_prompt(folded.survey.category_ref, resolve_category, "Which sites should be covered")
        center_ref = folded.survey.center_ref or folded.start_ref
        center = resolve_or_prompt(center_ref, resolve_airport, "Where is the patrol area centred")
        if center_ref is None:
            missing.append("Where is the patrol area centred? Name an airport to operate from.")
        if category is not None:
            spec = replace(spec, survey_category=category)
        if center is not None:
            spec = replace(
                spec,
                survey_center_id=center.id,
                start_id=spec.start_id or center.id,
                end_id=spec.end_id or center.id,
            )
        if folded.survey.radius_m is not None:
            spec = replace(spec, survey_radius_m=folded.survey.radius_m)
    else:
        if folded.start_ref is None:
            missing.append("Where should the flight start? Name the departure airport.")
        if folded.end_ref is None:
            missing.append("Where should the flight land? Name the destination airport.")

    for reference in folded.visit_refs:
        category = resolve_or_prompt(reference, resolve_category, "Which kind of stop is that")
        if category is not None and category not in spec.visit_categories:
            spec = replace(spec, visit_categories=spec.visit_categories + (category,))

    return ParseResult(spec=spec, missing=tuple(missing))


def range_class_m(distance_m: float) -> str:
    """Distance regime used to pick altitude bands and mission defaults."""
    if distance_m < SHORT_RANGE_MAX_M:
        return "short"
    if distance_m < MEDIUM_RANGE_MAX_M:
        return "medium"
    return "long"


def range_class(spec: MissionSpec, catalog: DataCatalog) -> str:
    """Leg-length regime: survey missions are short by construction."""
    if spec.is_survey:
        return "short"
    if spec.start_id is None or spec.end_id is None:
        raise ValueError("range class needs a resolved start and end")
    start = catalog.airport_by_id(spec.start_id)
    end = catalog.airport_by_id(spec.end_id)
    return range_class_m(great_circle_distance(start.location, end.location))
