"""Executable trajectory assembly: circuits at the ends, loiters at stops.

A routed and path-planned mission still begins and ends at bare airport
nodes. This module replaces those terminals with standard traffic circuits
flown off a runway heading, attaches clockwise loiter commands at visit
stops, and passes every other path waypoint through untouched.

A circuit is generated from a fixed per-hop turn schedule accumulated onto
the runway heading: two straight hops out, three quarter turns onto the
reciprocal, a small jog and counter-jog that keep the midfield waypoint off
the runway line, then three more quarter turns back, and a final straight
hop. Left patterns negate every turn. Headings accumulate without wrapping
so consecutive differences reproduce the schedule exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError, NoAirportError
from .geodata.types import PATTERN_SIDES, Airport, DataCatalog, Runway
from .geodesy import GeoPoint, Waypoint3D, destination_point, great_circle_distance, initial_bearing
from .parsing import MissionSpec
from .pathing import Path

CIRCUIT_MODES = ("takeoff", "landing")
COMMAND_KINDS = ("waypoint", "loiter", "takeoff_circuit", "landing_circuit")
LOITER_DIRECTIONS = ("cw", "ccw")

# One heading increment per hop; entry 0 applies to the initial heading.
HOP_COUNT = 10
RIGHT_ANGLE_DEG = 90.0
INTERCEPT_DEG = 12.0

DEFAULT_HOP_M = 500.0
PATTERN_AGL_M = 300.0
CLIMB_HOPS = 3

LOITER_RADIUS_M = 300.0
LOITER_AGL_M = 300.0
LOITER_DURATION_S = 120.0

# Route endpoints sit exactly on airport locations, so the snap radius only
# needs to absorb fixture rounding, not genuine search.
AIRPORT_SNAP_RADIUS_M = 10_000.0


def pattern_sign(pattern: str) -> int:
    """-1 for Left-hand circuits, +1 for Right-hand ones."""
    if pattern not in PATTERN_SIDES:
        raise InvalidInputError(f"pattern {pattern!r} not in {PATTERN_SIDES}")
    return -1 if pattern == "Left" else 1


def turn_schedule(pattern: str) -> tuple[float, ...]:
    """Heading increment for the initial course and each of the 10 hops."""
    s = float(pattern_sign(pattern))
    ra = s * RIGHT_ANGLE_DEG
    ia = s * INTERCEPT_DEG
    return (0.0, 0.0, ra, ra, ra, ia, -2.0 * ia, ra, ra, ra, 0.0)


@dataclass(frozen=True)
class CircuitParams:
    """Inputs for one traffic circuit flown off a runway."""

    runway_center: GeoPoint
    start_alt: float
    runway_heading: float
    separations: tuple[float, ...]
    altitude_profile: tuple[float, ...]
    pattern: str = "Left"
    mode: str = "takeoff"

    def __post_init__(self):
        object.__setattr__(self, "separations", tuple(float(d) for d in self.separations))
        object.__setattr__(self, "altitude_profile", tuple(float(h) for h in self.altitude_profile))
        if not isinstance(self.runway_center, GeoPoint):
            raise InvalidInputError("runway_center must be a GeoPoint")
        if not (math.isfinite(self.start_alt) and self.start_alt >= 0.0):
            raise InvalidInputError(f"start altitude {self.start_alt} must be finite and non-negative")
        if not (math.isfinite(self.runway_heading) and 0.0 <= self.runway_heading < 360.0):
            raise InvalidInputError(f"runway heading {self.runway_heading} outside [0, 360)")
        if self.pattern not in PATTERN_SIDES:
            raise InvalidInputError(f"pattern {self.pattern!r} not in {PATTERN_SIDES}")
        if self.mode not in CIRCUIT_MODES:
            raise InvalidInputError(f"mode {self.mode!r} not in {CIRCUIT_MODES}")
        if len(self.separations) != len(self.altitude_profile):
            raise InvalidInputError(
                f"{len(self.separations)} separations vs {len(self.altitude_profile)} altitudes"
            )
        if any(not (math.isfinite(d) and d > 0.0) for d in self.separations):
            raise InvalidInputError("every separation must be finite and positive")
        if any(not (math.isfinite(h) and h >= 0.0) for h in self.altitude_profile):
            raise InvalidInputError("every profile altitude must be finite and non-negative")


@dataclass(frozen=True)
class Circuit:
    """A generated circuit: waypoints plus the headings that produced them.

    headings[k] is the course flown into waypoint k (headings[0] is the
    initial course). Values accumulate past 360 so that consecutive
    differences equal the turn schedule exactly. Courses are measured
    against north at the runway center; the bearing observed at a waypoint
    differs by meridian convergence, first order in circuit size over Earth
    radius (about 0.01 degrees for a 500 m pattern at mid latitudes).
    """

    waypoints: tuple[Waypoint3D, ...]
    headings: tuple[float, ...]
    sign: int
    right_angle_deg: float
    intercept_deg: float

    def __post_init__(self):
        if len(self.waypoints) != len(self.headings):
            raise InvalidInputError(
                f"{len(self.waypoints)} waypoints vs {len(self.headings)} headings"
            )


def generate_circuit(params: CircuitParams) -> Circuit:
    """Fly the fixed turn schedule off the runway heading.

    Waypoint 0 sits on the runway center at the start altitude. Hop k turns
    by schedule entry k, then advances separations[k-1] meters on the
    accumulated heading; altitudes come straight from the profile.

    Hops are accumulated in the tangent plane at the runway center and each
    waypoint is placed by range and azimuth from that one anchor. Stepping
    destination_point waypoint-to-waypoint instead would re-anchor every
    heading to a different local north, and the meridian convergence picked
    up that way breaks Left/Right mirror symmetry by ~3e-8 rad at circuit
    scale; anchoring at the center keeps the mirror exact and distorts hop
    lengths only at second order (within 1e-6 relative).
    """
    schedule = turn_schedule(params.pattern)
    hops = len(schedule) - 1
    if len(params.separations) != hops:
        raise InvalidInputError(
            f"circuit needs {hops} separations and altitudes, got {len(params.separations)}"
        )
    heading = params.runway_heading + schedule[0]
    headings = [heading]
    waypoints = [Waypoint3D(params.runway_center, params.start_alt)]
    east = north = 0.0
    for k in range(1, hops + 1):
        heading = heading + schedule[k]
        headings.append(heading)
        course = math.radians(heading)
        east += params.separations[k - 1] * math.sin(course)
        north += params.separations[k - 1] * math.cos(course)
        point = destination_point(
            params.runway_center, math.hypot(east, north), math.degrees(math.atan2(east, north))
        )
        waypoints.append(Waypoint3D(point, params.altitude_profile[k - 1]))
    s = pattern_sign(params.pattern)
    return Circuit(
        waypoints=tuple(waypoints),
        headings=tuple(headings),
        sign=s,
        right_angle_deg=s * RIGHT_ANGLE_DEG,
        intercept_deg=s * INTERCEPT_DEG,
    )


def default_circuit_profile(mode: str, field_elevation: float) -> tuple[float, tuple[float, ...]]:
    """(start altitude, per-hop altitudes) for a standard circuit.

    Takeoff climbs linearly from the field to pattern height by hop
    CLIMB_HOPS and holds; landing flies the same ladder reversed, descending
    to the field over the final hops.
    """
    if mode not in CIRCUIT_MODES:
        raise InvalidInputError(f"mode {mode!r} not in {CIRCUIT_MODES}")
    if not (math.isfinite(field_elevation) and field_elevation >= 0.0):
        raise InvalidInputError(f"field elevation {field_elevation} must be finite and non-negative")
    step = PATTERN_AGL_M / CLIMB_HOPS
    ladder = [field_elevation + step * min(k, CLIMB_HOPS) for k in range(HOP_COUNT + 1)]
    if mode == "landing":
        ladder.reverse()
    return ladder[0], tuple(ladder[1:])


def circuit_params_for_runway(runway: Runway, field_elevation: float, mode: str) -> CircuitParams:
    """Standard circuit inputs: uniform hops, climb-and-hold altitude ladder."""
    start_alt, profile = default_circuit_profile(mode, field_elevation)
    return CircuitParams(
        runway_center=runway.center,
        start_alt=start_alt,
        runway_heading=runway.heading,
        separations=(DEFAULT_HOP_M,) * HOP_COUNT,
        altitude_profile=profile,
        pattern=runway.pattern_side,
        mode=mode,
    )


def nearest_airport(catalog: DataCatalog, point: GeoPoint, max_radius_m: float) -> Airport:
    """Closest catalog airport within max_radius_m; ties break to the lower id."""
    if not max_radius_m > 0.0:
        raise InvalidInputError(f"search radius {max_radius_m} must be positive")
    best: tuple[float, str, Airport] | None = None
    for airport in catalog.airports:
        key = (great_circle_distance(point, airport.location), airport.id)
        if best is None or key < best[:2]:
            best = (*key, airport)
    if best is None or best[0] > max_radius_m:
        raise NoAirportError(f"no airport within {max_radius_m:g} m of {point}")
    return best[2]


@dataclass(frozen=True)
class TrajectoryCommand:
    """One executable step: fly somewhere, loiter there, or fly a circuit."""

    kind: str
    waypoints: tuple[Waypoint3D, ...]
    radius_m: float = 0.0
    duration_s: float = 0.0
    direction: str = ""

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if self.kind not in COMMAND_KINDS:
            raise InvalidInputError(f"command kind {self.kind!r} not in {COMMAND_KINDS}")
        if not self.waypoints:
            raise InvalidInputError("a command needs at least one waypoint")
        if self.kind == "loiter":
            if not self.radius_m > 0.0:
                raise InvalidInputError(f"loiter radius {self.radius_m} must be positive")
            if not self.duration_s > 0.0:
                raise InvalidInputError(f"loiter duration {self.duration_s} must be positive")
            if self.direction not in LOITER_DIRECTIONS:
                raise InvalidInputError(f"loiter direction {self.direction!r} not in {LOITER_DIRECTIONS}")
            if len(self.waypoints) != 1:
                raise InvalidInputError("a loiter has exactly one center waypoint")
        elif self.kind == "waypoint":
            if len(self.waypoints) != 1:
                raise InvalidInputError("a waypoint command has exactly one waypoint")
            if self.radius_m or self.duration_s or self.direction:
                raise InvalidInputError("waypoint commands carry no loiter parameters")
        else:
            if len(self.waypoints) < 2:
                raise InvalidInputError("a circuit command carries the full vertex list")
            if self.radius_m or self.duration_s or self.direction:
                raise InvalidInputError("circuit commands carry no loiter parameters")


@dataclass(frozen=True)
class Trajectory:
    """Command sequence: takeoff circuit, interior steps, landing circuit."""

    commands: tuple[TrajectoryCommand, ...]

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        if len(self.commands) < 2:
            raise InvalidInputError("a trajectory needs at least two commands")
        if self.commands[0].kind != "takeoff_circuit":
            raise InvalidInputError("a trajectory must begin with a takeoff circuit")
        if self.commands[-1].kind != "landing_circuit":
            raise InvalidInputError("a trajectory must end with a landing circuit")
        for command in self.commands[1:-1]:
            if command.kind not in ("waypoint", "loiter"):
                raise InvalidInputError("circuits may only appear at the trajectory ends")


def _course_gap(a: float, b: float) -> float:
    """Smallest absolute angle between two courses, in degrees."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def best_runway(airport: Airport, course: float) -> Runway:
    """Runway whose stored heading lies closest to the desired course."""
    return min(airport.runways, key=lambda r: (_course_gap(r.heading, course), r.heading))


def build_trajectory(
    path: Path,
    catalog: DataCatalog,
    mission: MissionSpec,
    max_airport_distance_m: float = AIRPORT_SNAP_RADIUS_M,
) -> Trajectory:
    """Assemble executable commands from a planned path.

    The first and last path waypoints must sit near catalog airports; they
    become takeoff and landing circuits flown off the runway that best
    aligns with the departure and arrival courses. Interior waypoints pass
    through as waypoint commands, and each visit stop additionally gains a
    clockwise loiter flown LOITER_AGL_M above the nearest field.
    """
    wps = path.waypoints
    start_airport = nearest_airport(catalog, wps[0].point, max_airport_distance_m)
    end_airport = nearest_airport(catalog, wps[-1].point, max_airport_distance_m)
    departure = best_runway(start_airport, initial_bearing(wps[0].point, wps[1].point))
    arrival = best_runway(end_airport, initial_bearing(wps[-2].point, wps[-1].point))
    takeoff = generate_circuit(circuit_params_for_runway(departure, start_airport.elevation, "takeoff"))
    landing = generate_circuit(circuit_params_for_runway(arrival, end_airport.elevation, "landing"))

    pois = {poi.id: poi for poi in catalog.pois}
    node_at = dict(zip(path.node_indices, path.node_ids))
    commands = [TrajectoryCommand("takeoff_circuit", takeoff.waypoints)]
    for i in range(1, len(wps) - 1):
        commands.append(TrajectoryCommand("waypoint", (wps[i],)))
        poi = pois.get(node_at.get(i, ""))
        if poi is None or poi.category not in mission.visit_categories:
            continue
        field = nearest_airport(catalog, poi.location, math.inf).elevation
        commands.append(
            TrajectoryCommand(
                "loiter",
                (Waypoint3D(poi.location, field + LOITER_AGL_M),),
                radius_m=LOITER_RADIUS_M,
                duration_s=LOITER_DURATION_S,
                direction="cw",
            )
        )
    commands.append(TrajectoryCommand("landing_circuit", landing.waypoints))
    return Trajectory(tuple(commands))
