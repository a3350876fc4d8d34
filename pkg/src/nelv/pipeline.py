"""Stage machine turning one conversation into an uploadable mission.

A session walks parsed -> routed -> pathed -> trajectoried -> uploaded.
A stage request may advance the session by exactly one stage or re-run
an already completed one; re-running drops every later artifact. New
instructions reset the session to parsed and re-read the whole
conversation, and upload freezes the session for good.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .errors import (
    IntegrityError,
    InvalidInputError,
    SessionFrozenError,
    StageOrderError,
)
from .fleet import plan_multi_uav
from .geodata import DataCatalog
from .geodesy import Waypoint3D
from .graph import PATROL_CELL, FlightGraph, build_graph, candidate_nodes, poi_type
from .mission_io import SESSION_STAGES, SessionRecord, stage_index
from .parsing import ParseResult, TurnExtractor, parse_instructions
from .pathing import PathConfig, PsoConfig, plan_path, revise_path
from .routing import (
    LABEL_ORDER,
    Constraints,
    Route,
    RouteQuery,
    VehicleModel,
    enumerate_alternatives,
    plan_route,
)
from .trajectory import build_trajectory

# Request names map one-to-one onto the stages they complete.
REQUEST_STAGES = ("route", "path", "trajectory", "upload")
_RESULT_STAGE = dict(zip(REQUEST_STAGES, SESSION_STAGES[1:]))

START_PROMPT = "Where should the flight start? Name the departure airport."
END_PROMPT = "Where should the flight land? Name the destination airport."
CENTER_PROMPT = "Where is the patrol area centred? Name an airport to operate from."


@dataclass(frozen=True)
class StageOptions:
    """Operator-adjustable knobs for one stage run."""

    preference: str | None = None
    label: str | None = None
    seed: int | None = None
    population: int | None = None
    generations: int | None = None
    waypoints: tuple[Waypoint3D, ...] | None = None

    def __post_init__(self):
        if self.preference is not None and self.preference not in LABEL_ORDER:
            raise InvalidInputError(f"preference {self.preference!r} not in {LABEL_ORDER}")


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def new_session() -> SessionRecord:
    stamp = _now()
    return SessionRecord(session_id=uuid.uuid4().hex[:12], created_at=stamp, updated_at=stamp)


def open_questions(record: SessionRecord) -> tuple[str, ...]:
    """Prompts still blocking the route stage, derived from the spec."""
    spec = record.spec
    missing = []
    if spec.is_survey and spec.survey_center_id is None:
        missing.append(CENTER_PROMPT)
    if spec.start_id is None:
        missing.append(START_PROMPT)
    if spec.end_id is None:
        missing.append(END_PROMPT)
    return tuple(missing)


def add_instruction(
    record: SessionRecord,
    text: str,
    catalog: DataCatalog,
    llm: TurnExtractor | None = None,
) -> tuple[SessionRecord, ParseResult]:
    """Append one turn and re-parse the whole conversation.

    Any new instruction invalidates every computed artifact, since the
    spec it was built from may have changed.
    """
    _ensure_unfrozen(record)
    if not text or not text.strip():
        raise InvalidInputError("instruction text is empty")
    conversation = record.conversation + (text,)
    result = parse_instructions(conversation, catalog, llm)
    updated = replace(
        record,
        conversation=conversation,
        spec=result.spec,
        stage="parsed",
        graph_summary=None,
        route=None,
        alternatives=(),
        path=None,
        trajectory=None,
        updated_at=_now(),
    )
    return updated, result


def _ensure_unfrozen(record: SessionRecord):
    if record.stage == "uploaded":
        raise SessionFrozenError(f"session {record.session_id} is uploaded and read-only")


def ensure_stage_allowed(record: SessionRecord, requested: str):
    """Allow advancing by one stage or re-running a completed one."""
    if requested not in REQUEST_STAGES:
        raise InvalidInputError(f"unknown stage {requested!r}; choose from {REQUEST_STAGES}")
    _ensure_unfrozen(record)
    if stage_index(_RESULT_STAGE[requested]) > stage_index(record.stage) + 1:
        raise StageOrderError(requested, REQUEST_STAGES[REQUEST_STAGES.index(requested) - 1])


def run_stage(
    record: SessionRecord,
    requested: str,
    catalog: DataCatalog,
    options: StageOptions | None = None,
) -> SessionRecord:
    ensure_stage_allowed(record, requested)
    options = options or StageOptions()
    runner = {
        "route": _run_route,
        "path": _run_path,
        "trajectory": _run_trajectory,
        "upload": _run_upload,
    }[requested]
    return replace(runner(record, options, catalog), updated_at=_now())


def mission_graph(record: SessionRecord, catalog: DataCatalog) -> FlightGraph:
    vehicle = VehicleModel()
    return build_graph(candidate_nodes(record.spec, catalog), range_limit=vehicle.max_leg_m())


def _select_alternative(alternatives: tuple[Route, ...], label: str) -> Route:
    for route in alternatives:
        if label == route.label or label in route.also_labels:
            return route
    known = ", ".join(route.label for route in alternatives)
    raise InvalidInputError(f"no route alternative labeled {label!r}; available: {known}")


def _run_route(record: SessionRecord, options: StageOptions, catalog: DataCatalog) -> SessionRecord:
    questions = open_questions(record)
    if questions:
        raise InvalidInputError("mission is not fully specified: " + " ".join(questions))
    spec = record.spec
    graph = mission_graph(record, catalog)
    summary = f"{len(graph.nodes)} nodes / {len(graph.edges)} edges"
    if spec.is_survey:
        targets = [node.id for node in graph.nodes if node.node_type == PATROL_CELL]
        tours = plan_multi_uav(graph, spec.start_id, targets, spec.fleet_size)
        alternatives = tuple(replace(t, label=f"tour-{i + 1}") for i, t in enumerate(tours))
        chosen = alternatives[0]
    else:
        query = RouteQuery(
            graph,
            spec.start_id,
            spec.end_id,
            required_types=tuple(poi_type(c) for c in spec.visit_categories),
            preference=spec.preference,
            constraints=Constraints(max_duration_s=spec.max_duration_s),
        )
        alternatives = tuple(enumerate_alternatives(query))
        if not alternatives:
            plan_route(query)  # surfaces the binding constraint
            raise IntegrityError("alternative enumeration returned nothing for a feasible query")
        wanted = options.preference or spec.preference
        chosen = next(
            (r for r in alternatives if wanted == r.label or wanted in r.also_labels), None
        )
        if chosen is None:
            if options.preference is not None:
                raise InvalidInputError(f"no feasible route for preference {wanted!r}")
            chosen = alternatives[0]
    return replace(
        record,
        stage="routed",
        graph_summary=summary,
        route=chosen,
        alternatives=alternatives,
        path=None,
        trajectory=None,
    )


def _path_config(options: StageOptions) -> PathConfig:
    pso = PsoConfig()
    overrides = {
        name: getattr(options, name)
        for name in ("seed", "population", "generations")
        if getattr(options, name) is not None
    }
    if overrides:
        pso = replace(pso, **overrides)
    return PathConfig(pso=pso)


def _run_path(record: SessionRecord, options: StageOptions, catalog: DataCatalog) -> SessionRecord:
    config = _path_config(options)
    if options.waypoints is not None:
        if options.label is not None:
            raise InvalidInputError("choose either a route alternative or a waypoint revision, not both")
        if record.path is None:
            raise InvalidInputError("no computed path to revise; run the path stage first")
        path = revise_path(record.path, options.waypoints, catalog, config)
        return replace(record, stage="pathed", path=path, trajectory=None)
    route = record.route
    if options.label is not None:
        route = _select_alternative(record.alternatives, options.label)
    graph = mission_graph(record, catalog)
    path = plan_path(route, graph, catalog, config)
    return replace(record, stage="pathed", route=route, path=path, trajectory=None)


def _run_trajectory(record: SessionRecord, options: StageOptions, catalog: DataCatalog) -> SessionRecord:
    trajectory = build_trajectory(record.path, catalog, record.spec)
    return replace(record, stage="trajectoried", trajectory=trajectory)


def _run_upload(record: SessionRecord, options: StageOptions, catalog: DataCatalog) -> SessionRecord:
    return replace(record, stage="uploaded")
