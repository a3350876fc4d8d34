"""Persistence and bit-exact exports for sessions, routes, paths, trajectories.

Two export formats leave this module: the NELV-MISSION v1 flight plan (a
tab-separated text file, one line per flown waypoint) and GeoJSON feature
collections for the map overlays. Both print floats with fixed or shortest
round-trip formatting so identical inputs yield identical bytes.

Sessions persist as one JSON file each under a data directory (NELV_DATA_DIR
or ~/.nelv), written atomically via a temp file and rename so a crash never
leaves a torn record.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Any, Mapping, Sequence

from .errors import ExportError, FormatError, InvalidInputError, SessionNotFoundError
from .geodata.types import AirspaceZone, PopulationZone, WeatherGrid
from .geodesy import GeoPoint, Waypoint3D
from .parsing import MissionSpec
from .pathing import Path, SegmentCost
from .routing import Route, RouteLeg
from .trajectory import Trajectory, TrajectoryCommand

MISSION_HEADER = "NELV-MISSION 1"
SESSION_STAGES = ("parsed", "routed", "pathed", "trajectoried", "uploaded")

_DIRECTION_CODE = {"cw": 1.0, "ccw": -1.0}
_SESSION_ID = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


def stage_index(stage: str) -> int:
    if stage not in SESSION_STAGES:
        raise InvalidInputError(f"stage {stage!r} not in {SESSION_STAGES}")
    return SESSION_STAGES.index(stage)


# --- mission file ------------------------------------------------------------


def export_mission(trajectory: Trajectory) -> bytes:
    """Serialize a trajectory as NELV-MISSION v1 text.

    Header line, then one tab-separated line per flown waypoint: running
    index, command kind, lat and lon at 9 decimals, altitude at 3, and three
    parameters that carry radius, duration, and direction (1 clockwise,
    -1 counterclockwise) on loiter lines and zeros everywhere else. Circuit
    commands expand to one line per circuit vertex. LF endings throughout.
    """
    if not isinstance(trajectory, Trajectory):
        raise ExportError("mission export needs a complete trajectory")
    lines = [MISSION_HEADER]
    index = 0
    for command in trajectory.commands:
        if command.kind == "loiter":
            params = (command.radius_m, command.duration_s, _DIRECTION_CODE[command.direction])
        else:
            params = (0.0, 0.0, 0.0)
        for wp in command.waypoints:
            lines.append(
                "\t".join(
                    (
                        str(index),
                        command.kind,
                        f"{wp.lat:.9f}",
                        f"{wp.lon:.9f}",
                        f"{wp.alt:.3f}",
                        *(f"{p:g}" for p in params),
                    )
                )
            )
            index += 1
    return ("\n".join(lines) + "\n").encode()


# --- overlays ----------------------------------------------------------------


def _collection(features: list[dict[str, Any]]) -> bytes:
    payload = {"type": "FeatureCollection", "features": features}
    return (json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n").encode()


def _line_feature(coords: list[list[float]], properties: dict[str, Any]) -> dict[str, Any]:
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": properties,
    }


def _polygon_feature(ring: Sequence[GeoPoint], properties: dict[str, Any]) -> dict[str, Any]:
    coords = [[p.lon, p.lat] for p in ring]
    if coords and coords[0] != coords[-1]:
        coords.append(coords[0])
    return {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [coords]},
        "properties": properties,
    }


def _route_feature(route: Route, locations: Mapping[str, GeoPoint]) -> dict:
    coords = []
    for node_id in route.node_ids:
        if node_id not in locations:
            raise InvalidInputError(f"no location for route node {node_id!r}")
        p = locations[node_id]
        coords.append([p.lon, p.lat])
    properties = {
        "kind": "route",
        "label": route.label,
        "node_ids": list(route.node_ids),
        "total_distance_m": route.total_distance_m,
        "total_fuel_l": route.total_fuel_l,
        "total_fuel_cost": route.total_fuel_cost,
        "total_duration_s": route.total_duration_s,
        "fallback_direct": route.fallback_direct,
    }
    return _line_feature(coords, properties)


def route_overlay(route: Route, locations: Mapping[str, GeoPoint]) -> bytes:
    """One line feature through the route nodes, cost totals as properties."""
    return _collection([_route_feature(route, locations)])


def routes_overlay(routes: Sequence[Route], locations: Mapping[str, GeoPoint]) -> bytes:
    """One line feature per route; used for fleet tours on one map."""
    return _collection([_route_feature(route, locations) for route in routes])


def path_overlay(path: Path) -> bytes:
    """One line feature through every path waypoint, lon/lat/alt triples."""
    coords = [[wp.lon, wp.lat, wp.alt] for wp in path.waypoints]
    properties = {
        "kind": "path",
        "node_ids": list(path.node_ids),
        "node_indices": list(path.node_indices),
        "total_length_m": path.total_length_m,
        "weather_risk": sum(s.weather_risk for s in path.segments),
        "ground_exposure": sum(s.ground_exposure for s in path.segments),
        "violation_m": sum(s.violation_m for s in path.segments),
    }
    return _collection([_line_feature(coords, properties)])


def airspace_overlay(zones: Sequence[AirspaceZone]) -> bytes:
    features = [
        _polygon_feature(
            zone.boundary,
            {
                "kind": "airspace",
                "id": zone.id,
                "zone_class": zone.zone_class,
                "floor_alt": zone.floor_alt,
                "ceiling_alt": zone.ceiling_alt,
            },
        )
        for zone in sorted(zones, key=lambda z: z.id)
    ]
    return _collection(features)


def population_overlay(zones: Sequence[PopulationZone]) -> bytes:
    features = [
        _polygon_feature(
            zone.boundary,
            {"kind": "population", "id": zone.id, "density_weight": zone.density_weight},
        )
        for zone in sorted(zones, key=lambda z: z.id)
    ]
    return _collection(features)


def weather_overlay(grid: WeatherGrid | None, band: str = "low") -> bytes:
    """One polygon per grid cell with the band's composite risk."""
    if grid is None:
        return _collection([])
    if band not in grid.bands:
        raise InvalidInputError(f"band {band!r} not in {grid.bands}")
    risk = grid.risk[band]
    features = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            lat0 = grid.origin.lat + r * grid.cell_deg
            lon0 = grid.origin.lon + c * grid.cell_deg
            ring = (
                GeoPoint(lat0, lon0),
                GeoPoint(lat0, lon0 + grid.cell_deg),
                GeoPoint(lat0 + grid.cell_deg, lon0 + grid.cell_deg),
                GeoPoint(lat0 + grid.cell_deg, lon0),
            )
            features.append(
                _polygon_feature(
                    ring,
                    {"kind": "weather", "band": band, "row": r, "col": c, "risk": float(risk[r, c])},
                )
            )
    return _collection(features)


def export_overlay(artifact: Any, locations: Mapping[str, GeoPoint] | None = None, band: str = "low") -> bytes:
    """Feature-collection bytes for any overlayable artifact."""
    if isinstance(artifact, Route):
        if locations is None:
            raise InvalidInputError("a route overlay needs node locations")
        return route_overlay(artifact, locations)
    if isinstance(artifact, Path):
        return path_overlay(artifact)
    if isinstance(artifact, WeatherGrid) or artifact is None:
        return weather_overlay(artifact, band)
    if isinstance(artifact, (tuple, list)):
        if not artifact:
            return _collection([])
        if isinstance(artifact[0], AirspaceZone):
            return airspace_overlay(artifact)
        if isinstance(artifact[0], PopulationZone):
            return population_overlay(artifact)
    raise InvalidInputError(f"cannot overlay {type(artifact).__name__}")


# --- session records ---------------------------------------------------------


@dataclass(frozen=True)
class SessionRecord:
    """Everything one planning session has said and computed so far."""

    session_id: str
    conversation: tuple[str, ...] = ()
    spec: MissionSpec = MissionSpec()
    graph_summary: str | None = None
    route: Route | None = None
    alternatives: tuple[Route, ...] = ()
    path: Path | None = None
    trajectory: Trajectory | None = None
    stage: str = "parsed"
    created_at: str = ""
    updated_at: str = ""

    def __post_init__(self):
        object.__setattr__(self, "conversation", tuple(self.conversation))
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if not _SESSION_ID.match(self.session_id):
            raise InvalidInputError(f"session id {self.session_id!r} must be filename-safe")
        reached = stage_index(self.stage)
        for artifact, name, needed in (
            (self.route, "route", 1),
            (self.path, "path", 2),
            (self.trajectory, "trajectory", 3),
        ):
            if (artifact is not None) != (reached >= needed):
                raise InvalidInputError(f"{name} must be present exactly from stage {SESSION_STAGES[needed]!r} on")
        if bool(self.alternatives) != (reached >= 1):
            raise InvalidInputError("alternatives must be present exactly from stage 'routed' on")


# --- JSON codecs -------------------------------------------------------------


def _waypoint_to_json(wp: Waypoint3D) -> list[Any]:
    return [wp.lat, wp.lon, wp.alt, wp.agl]


def _waypoint_from_json(data: Sequence[Any]) -> Waypoint3D:
    lat, lon, alt, agl = data
    return Waypoint3D(GeoPoint(lat, lon), alt, bool(agl))


def spec_to_json(spec: MissionSpec) -> dict[str, Any]:
    return {
        "start_id": spec.start_id,
        "end_id": spec.end_id,
        "fleet_size": spec.fleet_size,
        "preference": spec.preference,
        "visit_categories": list(spec.visit_categories),
        "survey_category": spec.survey_category,
        "survey_center_id": spec.survey_center_id,
        "survey_radius_m": spec.survey_radius_m,
        "max_duration_s": spec.max_duration_s,
    }


def spec_from_json(data: Mapping[str, Any]) -> MissionSpec:
    return MissionSpec(
        start_id=data["start_id"],
        end_id=data["end_id"],
        fleet_size=data["fleet_size"],
        preference=data["preference"],
        visit_categories=tuple(data["visit_categories"]),
        survey_category=data["survey_category"],
        survey_center_id=data["survey_center_id"],
        survey_radius_m=data["survey_radius_m"],
        max_duration_s=data["max_duration_s"],
    )


def route_to_json(route: Route) -> dict[str, Any]:
    return {
        "node_ids": list(route.node_ids),
        "legs": [
            [leg.from_id, leg.to_id, leg.distance_m, leg.fuel_l, leg.fuel_cost, leg.duration_s]
            for leg in route.legs
        ],
        "total_distance_m": route.total_distance_m,
        "total_fuel_l": route.total_fuel_l,
        "total_fuel_cost": route.total_fuel_cost,
        "total_duration_s": route.total_duration_s,
        "label": route.label,
        "also_labels": list(route.also_labels),
        "fallback_direct": route.fallback_direct,
    }


def route_from_json(data: Mapping[str, Any]) -> Route:
    return Route(
        node_ids=tuple(data["node_ids"]),
        legs=tuple(RouteLeg(*leg) for leg in data["legs"]),
        total_distance_m=data["total_distance_m"],
        total_fuel_l=data["total_fuel_l"],
        total_fuel_cost=data["total_fuel_cost"],
        total_duration_s=data["total_duration_s"],
        label=data["label"],
        also_labels=tuple(data["also_labels"]),
        fallback_direct=data["fallback_direct"],
    )


def path_to_json(path: Path) -> dict[str, Any]:
    return {
        "waypoints": [_waypoint_to_json(wp) for wp in path.waypoints],
        "node_indices": list(path.node_indices),
        "node_ids": list(path.node_ids),
        "segments": [
            [s.length_m, s.weather_risk, s.ground_exposure, s.violation_m] for s in path.segments
        ],
    }


def path_from_json(data: Mapping[str, Any]) -> Path:
    return Path(
        waypoints=tuple(_waypoint_from_json(wp) for wp in data["waypoints"]),
        node_indices=tuple(data["node_indices"]),
        node_ids=tuple(data["node_ids"]),
        segments=tuple(SegmentCost(*s) for s in data["segments"]),
    )


def trajectory_to_json(trajectory: Trajectory) -> dict[str, Any]:
    return {
        "commands": [
            {
                "kind": c.kind,
                "waypoints": [_waypoint_to_json(wp) for wp in c.waypoints],
                "radius_m": c.radius_m,
                "duration_s": c.duration_s,
                "direction": c.direction,
            }
            for c in trajectory.commands
        ]
    }


def trajectory_from_json(data: Mapping[str, Any]) -> Trajectory:
    return Trajectory(
        tuple(
            TrajectoryCommand(
                kind=c["kind"],
                waypoints=tuple(_waypoint_from_json(wp) for wp in c["waypoints"]),
                radius_m=c["radius_m"],
                duration_s=c["duration_s"],
                direction=c["direction"],
            )
            for c in data["commands"]
        )
    )


def record_to_json(record: SessionRecord) -> dict[str, Any]:
    return {
        "session_id": record.session_id,
        "conversation": list(record.conversation),
        "spec": spec_to_json(record.spec),
        "graph_summary": record.graph_summary,
        "route": None if record.route is None else route_to_json(record.route),
        "alternatives": [route_to_json(r) for r in record.alternatives],
        "path": None if record.path is None else path_to_json(record.path),
        "trajectory": None if record.trajectory is None else trajectory_to_json(record.trajectory),
        "stage": record.stage,
        "created_at": record.created_at,
        "updated_at": record.updated_at,
    }


def record_from_json(data: Mapping[str, Any]) -> SessionRecord:
    return SessionRecord(
        session_id=data["session_id"],
        conversation=tuple(data["conversation"]),
        spec=spec_from_json(data["spec"]),
        graph_summary=data["graph_summary"],
        route=None if data["route"] is None else route_from_json(data["route"]),
        alternatives=tuple(route_from_json(r) for r in data["alternatives"]),
        path=None if data["path"] is None else path_from_json(data["path"]),
        trajectory=None if data["trajectory"] is None else trajectory_from_json(data["trajectory"]),
        stage=data["stage"],
        created_at=data["created_at"],
        updated_at=data["updated_at"],
    )


# --- session store -----------------------------------------------------------


def default_data_dir() -> FsPath:
    env = os.environ.get("NELV_DATA_DIR")
    return FsPath(env) if env else FsPath.home() / ".nelv"


def _session_file(root: FsPath, session_id: str) -> FsPath:
    if not _SESSION_ID.match(session_id):
        raise SessionNotFoundError(f"unknown session {session_id!r}")
    return root / f"{session_id}.json"


def save_session(record: SessionRecord, data_dir: FsPath | str | None = None) -> FsPath:
    """Write the record to its own file, atomically (temp file + rename)."""
    root = FsPath(data_dir) if data_dir is not None else default_data_dir()
    root.mkdir(parents=True, exist_ok=True)
    target = _session_file(root, record.session_id)
    payload = json.dumps(record_to_json(record), sort_keys=True, indent=2) + "\n"
    fd, tmp_name = tempfile.mkstemp(dir=root, prefix=f".{record.session_id}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(payload)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def load_session(session_id: str, data_dir: FsPath | str | None = None) -> SessionRecord:
    root = FsPath(data_dir) if data_dir is not None else default_data_dir()
    path = _session_file(root, session_id)
    if not path.exists():
        raise SessionNotFoundError(f"unknown session {session_id!r}")
    try:
        return record_from_json(json.loads(path.read_text(encoding="utf-8")))
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"corrupt session record: {exc}", path=str(path)) from exc


def list_sessions(data_dir: FsPath | str | None = None) -> tuple[str, ...]:
    root = FsPath(data_dir) if data_dir is not None else default_data_dir()
    if not root.exists():
        return ()
    return tuple(sorted(p.stem for p in root.glob("*.json") if _SESSION_ID.match(p.stem)))
