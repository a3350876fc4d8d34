"""HTTP face of the mission pipeline.

One app serves one data catalog; sessions live as JSON files under the
data directory and every artifact is recomputed through the pipeline.
Status mapping: unknown sessions and unavailable overlay layers are
404, out-of-order or frozen stage requests are 409, and everything the
pipeline rejects as bad input is 400. Error bodies are always
``{"error": <message>, "kind": <error class>}`` so clients can show
the message verbatim.

Configuration: NELV_CATALOG (bundled fixture name or manifest path),
NELV_DATA_DIR (session store), NELV_BIND_ADDR (host:port for the
module runner), NELV_LLM_* (optional instruction extractor).
"""

from __future__ import annotations

import logging
import os
import threading
from pathlib import Path as FsPath
from typing import Any, Mapping

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import llm as llm_module
from .errors import (
    InvalidInputError,
    NelvError,
    SessionFrozenError,
    SessionNotFoundError,
    StageOrderError,
)
from .fixtures import FIXTURE_NAMES, fixture_manifest
from .geodata import DataCatalog, load_catalog
from .geodesy import GeoPoint, Waypoint3D
from .mission_io import (
    airspace_overlay,
    export_mission,
    load_session,
    path_overlay,
    population_overlay,
    record_to_json,
    route_overlay,
    routes_overlay,
    save_session,
    spec_to_json,
    weather_overlay,
)
from .parsing import TurnExtractor
from .pipeline import StageOptions, add_instruction, new_session, run_stage
from .routing import Route

log = logging.getLogger(__name__)

OVERLAY_LAYERS = ("airspace", "population", "weather", "route", "path")

GEOJSON = "application/geo+json"


class InstructionBody(BaseModel):
    text: str


class StageBody(BaseModel):
    stage: str
    options: dict[str, Any] = Field(default_factory=dict)


def resolve_catalog(source: DataCatalog | str | FsPath) -> DataCatalog:
    """A catalog as given, by bundled fixture name, or by manifest path."""
    if isinstance(source, DataCatalog):
        return source
    name = str(source)
    if name in FIXTURE_NAMES:
        return load_catalog(fixture_manifest(name))
    return load_catalog(name)


def _parse_waypoint(item: Any) -> Waypoint3D:
    # same shape the session document uses: [lat, lon, alt] or [lat, lon, alt, agl]
    if not isinstance(item, (list, tuple)) or len(item) not in (3, 4):
        raise InvalidInputError(f"waypoint must be [lat, lon, alt(, agl)], got {item!r}")
    lat, lon, alt = (float(v) for v in item[:3])
    agl = bool(item[3]) if len(item) == 4 else False
    return Waypoint3D(GeoPoint(lat, lon), alt, agl=agl)


def _stage_options(raw: Mapping[str, Any]) -> StageOptions:
    known = {"preference", "label", "seed", "population", "generations", "waypoints"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise InvalidInputError(f"unknown stage options {unknown}; valid: {sorted(known)}")
    waypoints = raw.get("waypoints")
    try:
        return StageOptions(
            preference=raw.get("preference"),
            label=raw.get("label"),
            seed=None if raw.get("seed") is None else int(raw["seed"]),
            population=None if raw.get("population") is None else int(raw["population"]),
            generations=None if raw.get("generations") is None else int(raw["generations"]),
            waypoints=None if waypoints is None else tuple(_parse_waypoint(w) for w in waypoints),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad stage options: {exc}") from exc


def _route_summary(route: Route) -> dict[str, Any]:
    return {
        "label": route.label,
        "also_labels": list(route.also_labels),
        "node_ids": list(route.node_ids),
        "total_distance_m": route.total_distance_m,
        "total_fuel_l": route.total_fuel_l,
        "total_fuel_cost": route.total_fuel_cost,
        "total_duration_s": route.total_duration_s,
        "fallback_direct": route.fallback_direct,
    }


def _stage_payload(record) -> dict[str, Any]:
    payload: dict[str, Any] = {"session_id": record.session_id, "stage": record.stage}
    if record.stage == "routed":
        payload["graph"] = record.graph_summary
        payload["alternatives"] = [_route_summary(r) for r in record.alternatives]
        payload["selected"] = record.route.label
    elif record.stage == "pathed":
        path = record.path
        payload["path"] = {
            "node_ids": list(path.node_ids),
            "waypoint_count": len(path.waypoints),
            "total_length_m": path.total_length_m,
            "weather_risk": sum(s.weather_risk for s in path.segments),
            "ground_exposure": sum(s.ground_exposure for s in path.segments),
            "violation_m": sum(s.violation_m for s in path.segments),
        }
    elif record.stage == "trajectoried":
        payload["trajectory"] = {
            "command_count": len(record.trajectory.commands),
            "kinds": [c.kind for c in record.trajectory.commands],
        }
    elif record.stage == "uploaded":
        payload["uploaded"] = True
    return payload


def _mission_locations(catalog: DataCatalog) -> dict[str, GeoPoint]:
    locations = {airport.id: airport.location for airport in catalog.airports}
    locations.update({poi.id: poi.location for poi in catalog.pois})
    return locations


class _NotFound(NelvError):
    """Resource addressed by the URL does not exist for this session."""


_STATUS = (
    ((SessionNotFoundError, _NotFound), 404),
    ((StageOrderError, SessionFrozenError), 409),
)


def _status_for(exc: NelvError) -> int:
    for types, status in _STATUS:
        if isinstance(exc, types):
            return status
    return 400


def create_app(
    catalog: DataCatalog | str | FsPath,
    data_dir: FsPath | str | None = None,
    llm: TurnExtractor | None = None,
) -> FastAPI:
    catalog = resolve_catalog(catalog)
    locations = _mission_locations(catalog)
    app = FastAPI(title="nelv planner", docs_url=None, redoc_url=None)
    # The operator console is served from its own origin during development.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    locks: dict[str, threading.Lock] = {}
    registry = threading.Lock()

    def session_lock(session_id: str) -> threading.Lock:
        with registry:
            return locks.setdefault(session_id, threading.Lock())

    @app.exception_handler(NelvError)
    async def nelv_error(request: Request, exc: NelvError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": str(exc), "kind": type(exc).__name__},
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": str(exc.detail), "kind": "HTTPError"},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc), "kind": "ValidationError"})

    @app.post("/sessions", status_code=201)
    def create_session():
        record = new_session()
        save_session(record, data_dir)
        return {"session_id": record.session_id, "stage": record.stage, "created_at": record.created_at}

    @app.post("/sessions/{session_id}/instructions")
    def post_instruction(session_id: str, body: InstructionBody):
        with session_lock(session_id):
            record = load_session(session_id, data_dir)
            record, result = add_instruction(record, body.text, catalog, llm)
            save_session(record, data_dir)
        return {
            "session_id": record.session_id,
            "stage": record.stage,
            "spec": spec_to_json(record.spec),
            "missing": list(result.missing),
            "ready": result.ready,
        }

    @app.post("/sessions/{session_id}/stages")
    def post_stage(session_id: str, body: StageBody):
        options = _stage_options(body.options)
        with session_lock(session_id):
            record = load_session(session_id, data_dir)
            record = run_stage(record, body.stage, catalog, options)
            save_session(record, data_dir)
        return _stage_payload(record)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return record_to_json(load_session(session_id, data_dir))

    @app.get("/sessions/{session_id}/overlays/{layer}")
    def get_overlay(session_id: str, layer: str, band: str = "low"):
        record = load_session(session_id, data_dir)
        if layer == "airspace":
            data = airspace_overlay(catalog.airspace_zones)
        elif layer == "population":
            data = population_overlay(catalog.population_zones)
        elif layer == "weather":
            grid = catalog.weather
            if grid is None:
                raise _NotFound("no weather data for this catalog")
            if band in ("low", "high") and band not in grid.bands:
                raise _NotFound(f"weather band {band!r} not loaded; available: {grid.bands}")
            data = weather_overlay(grid, band)
        elif layer == "route":
            if record.route is None:
                raise _NotFound("route overlay requires the route stage")
            if record.spec.is_survey:
                data = routes_overlay(record.alternatives, locations)
            else:
                data = route_overlay(record.route, locations)
        elif layer == "path":
            if record.path is None:
                raise _NotFound("path overlay requires the path stage")
            data = path_overlay(record.path)
        else:
            raise _NotFound(f"unknown overlay layer {layer!r}; valid: {OVERLAY_LAYERS}")
        headers = {"ETag": f'"{session_id}-{record.stage}-{layer}-{band}"'}
        return Response(content=data, media_type=GEOJSON, headers=headers)

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str):
        record = load_session(session_id, data_dir)
        if record.trajectory is None:
            raise StageOrderError("export", "trajectory")
        return Response(content=export_mission(record.trajectory), media_type="text/plain; charset=utf-8")

    return app


def create_app_from_env() -> FastAPI:
    return create_app(
        os.environ.get("NELV_CATALOG", "us"),
        os.environ.get("NELV_DATA_DIR"),
        llm_module.from_env(),
    )


def main():
    import uvicorn

    host, _, port = os.environ.get("NELV_BIND_ADDR", "127.0.0.1:8420").rpartition(":")
    uvicorn.run(create_app_from_env(), host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
