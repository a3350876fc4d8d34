"""Circuit generation and trajectory assembly.

Geometry oracles come first: a 3D reflection across the runway great circle
for mirror symmetry, and distance/bearing recovery through the geodesy
primitives for hop fidelity. Expected heading sequences are integer sums of
the turn schedule, so equality checks are exact.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from nelv.errors import InvalidInputError, NoAirportError
from nelv.geodata.types import Airport, DataCatalog, Poi, Runway
from nelv.geodesy import (
    GeoPoint,
    Waypoint3D,
    destination_point,
    great_circle_distance,
    initial_bearing,
)
from nelv.parsing import MissionSpec
from nelv.pathing import Path, SegmentCost
from nelv.trajectory import (
    CLIMB_HOPS,
    DEFAULT_HOP_M,
    HOP_COUNT,
    LOITER_AGL_M,
    LOITER_DURATION_S,
    LOITER_RADIUS_M,
    CircuitParams,
    Trajectory,
    TrajectoryCommand,
    best_runway,
    build_trajectory,
    circuit_params_for_runway,
    default_circuit_profile,
    generate_circuit,
    nearest_airport,
    pattern_sign,
    turn_schedule,
)

CENTER = GeoPoint(40.412, -86.937)


# --- oracles -----------------------------------------------------------------


def unit_vector(p: GeoPoint) -> np.ndarray:
    lat, lon = math.radians(p.lat), math.radians(p.lon)
    return np.array(
        [math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)]
    )


def reflect_across_course(center: GeoPoint, heading_deg: float, p: GeoPoint) -> np.ndarray:
    """Mirror p across the great circle through center along heading_deg."""
    lat, lon = math.radians(center.lat), math.radians(center.lon)
    theta = math.radians(heading_deg)
    north = np.array(
        [-math.sin(lat) * math.cos(lon), -math.sin(lat) * math.sin(lon), math.cos(lat)]
    )
    east = np.array([-math.sin(lon), math.cos(lon), 0.0])
    direction = math.cos(theta) * north + math.sin(theta) * east
    normal = np.cross(unit_vector(center), direction)
    normal = normal / np.linalg.norm(normal)
    v = unit_vector(p)
    return v - 2.0 * np.dot(v, normal) * normal


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))


def scan_nearest(airports, point):
    return min(airports, key=lambda a: (great_circle_distance(point, a.location), a.id))


def wrap_deg(delta: float) -> float:
    return (delta + 180.0) % 360.0 - 180.0


# --- fixtures ----------------------------------------------------------------


VARIED_SEPARATIONS = (300.0, 450.0, 600.0, 750.0, 900.0, 1050.0, 1200.0, 400.0, 550.0, 700.0)
VARIED_ALTITUDES = tuple(200.0 + 10.0 * k for k in range(1, HOP_COUNT + 1))


def circuit(pattern="Right", heading=90.0, separations=None, altitudes=None, start_alt=190.0):
    params = CircuitParams(
        runway_center=CENTER,
        start_alt=start_alt,
        runway_heading=heading,
        separations=separations or (DEFAULT_HOP_M,) * HOP_COUNT,
        altitude_profile=altitudes or (490.0,) * HOP_COUNT,
        pattern=pattern,
    )
    return generate_circuit(params)


def runway(center: GeoPoint, heading=90.0, side="Left", length_m=1000.0) -> Runway:
    back = (heading + 180.0) % 360.0
    return Runway(
        end_a=destination_point(center, length_m / 2.0, back),
        end_b=destination_point(center, length_m / 2.0, heading),
        heading=heading,
        pattern_side=side,
    )


def airport(aid: str, center: GeoPoint, elevation=190.0, runways=None) -> Airport:
    return Airport(
        id=aid, name=aid, location=center, elevation=elevation,
        runways=runways or (runway(center),),
    )


def flight_path(waypoints, node_indices, node_ids) -> Path:
    return Path(
        waypoints=tuple(waypoints),
        node_indices=tuple(node_indices),
        node_ids=tuple(node_ids),
        segments=(SegmentCost(0.0, 0.0, 0.0, 0.0),),
    )


# --- turn schedule -----------------------------------------------------------


def test_turn_schedule_signs():
    left = turn_schedule("Left")
    right = turn_schedule("Right")
    assert left == (0.0, 0.0, -90.0, -90.0, -90.0, -12.0, 24.0, -90.0, -90.0, -90.0, 0.0)
    assert right == (0.0, 0.0, 90.0, 90.0, 90.0, 12.0, -24.0, 90.0, 90.0, 90.0, 0.0)
    assert right == tuple(-x for x in left)
    assert pattern_sign("Left") == -1
    assert pattern_sign("Right") == 1
    with pytest.raises(InvalidInputError):
        turn_schedule("left")


def test_right_circuit_heading_sequence():
    c = circuit(pattern="Right", heading=90.0)
    assert c.headings == (90.0, 90.0, 180.0, 270.0, 360.0, 372.0, 348.0, 438.0, 528.0, 618.0, 618.0)
    assert tuple(h % 360.0 for h in c.headings[:5]) == (90.0, 90.0, 180.0, 270.0, 0.0)
    assert c.sign == 1
    assert c.right_angle_deg == 90.0
    assert c.intercept_deg == 12.0


@pytest.mark.parametrize("pattern", ["Left", "Right"])
@pytest.mark.parametrize("heading", [0.0, 90.0, 235.0])
def test_heading_deltas_match_schedule_exactly(pattern, heading):
    c = circuit(pattern=pattern, heading=heading, separations=VARIED_SEPARATIONS)
    schedule = turn_schedule(pattern)
    assert c.headings[0] == heading + schedule[0]
    for k in range(1, HOP_COUNT + 1):
        assert c.headings[k] - c.headings[k - 1] == schedule[k]


# --- circuit geometry --------------------------------------------------------


@pytest.mark.parametrize("pattern", ["Left", "Right"])
@pytest.mark.parametrize("heading", [0.0, 90.0, 235.0])
def test_hop_fidelity(pattern, heading):
    c = circuit(pattern=pattern, heading=heading, separations=VARIED_SEPARATIONS)
    assert len(c.waypoints) == HOP_COUNT + 1
    for k in range(1, HOP_COUNT + 1):
        hop = great_circle_distance(c.waypoints[k - 1].point, c.waypoints[k].point)
        assert abs(hop - VARIED_SEPARATIONS[k - 1]) / VARIED_SEPARATIONS[k - 1] <= 1e-6


@pytest.mark.parametrize("pattern", ["Left", "Right"])
@pytest.mark.parametrize("heading", [0.0, 90.0, 235.0])
def test_heading_recovery(pattern, heading):
    # Courses anchor to north at the runway center so Left/Right stay exact
    # mirrors; bearings observed at the waypoints differ by meridian
    # convergence, bounded well under 0.05 deg at circuit scale.
    c = circuit(pattern=pattern, heading=heading, separations=VARIED_SEPARATIONS)
    for k in range(1, HOP_COUNT + 1):
        recovered = initial_bearing(c.waypoints[k - 1].point, c.waypoints[k].point)
        assert abs(wrap_deg(recovered - c.headings[k])) <= 0.05


def test_first_hop_bearing_is_exact():
    # Hop 1 leaves the anchor point itself, so there is no convergence term.
    for heading in (0.0, 90.0, 235.0):
        c = circuit(pattern="Right", heading=heading)
        recovered = initial_bearing(c.waypoints[0].point, c.waypoints[1].point)
        assert abs(wrap_deg(recovered - heading)) <= 1e-9


def test_waypoint_zero_and_altitudes():
    c = circuit(altitudes=VARIED_ALTITUDES, start_alt=123.0)
    assert c.waypoints[0].point == CENTER
    assert c.waypoints[0].alt == 123.0
    assert tuple(wp.alt for wp in c.waypoints[1:]) == VARIED_ALTITUDES


def test_uniform_hops_all_default_distance():
    c = circuit()
    for a, b in zip(c.waypoints, c.waypoints[1:]):
        hop = great_circle_distance(a.point, b.point)
        assert abs(hop - DEFAULT_HOP_M) / DEFAULT_HOP_M <= 1e-6


def test_mirror_symmetry():
    heading = 77.0
    left = circuit(pattern="Left", heading=heading, separations=VARIED_SEPARATIONS,
                   altitudes=VARIED_ALTITUDES)
    right = circuit(pattern="Right", heading=heading, separations=VARIED_SEPARATIONS,
                    altitudes=VARIED_ALTITUDES)
    for lw, rw in zip(left.waypoints, right.waypoints):
        mirrored = reflect_across_course(CENTER, heading, rw.point)
        assert angle_between(mirrored, unit_vector(lw.point)) <= 1e-9
        assert lw.alt == rw.alt


# --- parameter validation ----------------------------------------------------


def test_profile_length_mismatch():
    with pytest.raises(InvalidInputError):
        CircuitParams(CENTER, 190.0, 90.0, (500.0,) * 10, (490.0,) * 9)
    short = CircuitParams(CENTER, 190.0, 90.0, (500.0,) * 9, (490.0,) * 9)
    with pytest.raises(InvalidInputError):
        generate_circuit(short)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"runway_heading": 360.0},
        {"runway_heading": -0.1},
        {"pattern": "left"},
        {"mode": "cruise"},
        {"separations": (500.0,) * 9 + (0.0,)},
        {"altitude_profile": (490.0,) * 9 + (-1.0,)},
        {"start_alt": -1.0},
        {"start_alt": math.nan},
    ],
)
def test_params_validation(kwargs):
    base = dict(
        runway_center=CENTER,
        start_alt=190.0,
        runway_heading=90.0,
        separations=(500.0,) * HOP_COUNT,
        altitude_profile=(490.0,) * HOP_COUNT,
    )
    base.update(kwargs)
    with pytest.raises(InvalidInputError):
        CircuitParams(**base)


# --- default profiles --------------------------------------------------------


def test_default_takeoff_profile():
    start, profile = default_circuit_profile("takeoff", 190.0)
    assert start == 190.0
    assert profile == (290.0, 390.0, 490.0) + (490.0,) * (HOP_COUNT - CLIMB_HOPS)


def test_default_landing_profile():
    start, profile = default_circuit_profile("landing", 190.0)
    assert start == 490.0
    assert profile == (490.0,) * (HOP_COUNT - CLIMB_HOPS) + (390.0, 290.0, 190.0)


def test_default_profile_validation():
    with pytest.raises(InvalidInputError):
        default_circuit_profile("cruise", 190.0)
    with pytest.raises(InvalidInputError):
        default_circuit_profile("takeoff", -5.0)


def test_circuit_params_for_runway():
    rw = runway(CENTER, heading=45.0, side="Right")
    params = circuit_params_for_runway(rw, 250.0, "landing")
    assert params.runway_center == rw.center
    assert params.runway_heading == 45.0
    assert params.pattern == "Right"
    assert params.mode == "landing"
    assert params.start_alt == 550.0
    assert params.separations == (DEFAULT_HOP_M,) * HOP_COUNT
    c = generate_circuit(params)
    assert c.sign == 1
    assert c.waypoints[-1].alt == 250.0


# --- nearest airport ---------------------------------------------------------


def test_nearest_airport_matches_linear_scan():
    rng = np.random.default_rng(4)
    airports = tuple(
        airport(f"A{i:02d}", destination_point(CENTER, float(d), float(b)))
        for i, (d, b) in enumerate(zip(rng.uniform(0, 80_000, 40), rng.uniform(0, 360, 40)))
    )
    catalog = DataCatalog(airports=airports)
    for d, b in zip(rng.uniform(0, 90_000, 25), rng.uniform(0, 360, 25)):
        probe = destination_point(CENTER, float(d), float(b))
        assert nearest_airport(catalog, probe, math.inf) is scan_nearest(airports, probe)


def test_nearest_airport_exact_location():
    a = airport("AAA", CENTER)
    b = airport("BBB", destination_point(CENTER, 5000.0, 90.0))
    catalog = DataCatalog(airports=(a, b))
    assert nearest_airport(catalog, b.location, 1.0) is b


def test_nearest_airport_tie_breaks_to_lower_id():
    twin_b = airport("BBB", CENTER)
    twin_a = airport("AAA", CENTER)
    catalog = DataCatalog(airports=(twin_b, twin_a))
    assert nearest_airport(catalog, CENTER, 100.0) is twin_a


def test_nearest_airport_errors():
    catalog = DataCatalog(airports=(airport("AAA", CENTER),))
    far = destination_point(CENTER, 50_000.0, 10.0)
    with pytest.raises(NoAirportError):
        nearest_airport(catalog, far, 10_000.0)
    with pytest.raises(NoAirportError):
        nearest_airport(DataCatalog(), CENTER, 10_000.0)
    with pytest.raises(InvalidInputError):
        nearest_airport(catalog, CENTER, 0.0)


def test_best_runway_prefers_aligned_heading():
    rws = (runway(CENTER, heading=45.0), runway(CENTER, heading=90.0, side="Right"))
    field = airport("AAA", CENTER, runways=rws)
    assert best_runway(field, 80.0).heading == 90.0
    assert best_runway(field, 50.0).heading == 45.0
    # wraparound: 325 deg sits 40 deg from 45/405 but 125 deg from 90
    assert best_runway(field, 325.0).heading == 45.0


# --- trajectory assembly -----------------------------------------------------


def east(meters: float) -> GeoPoint:
    return destination_point(CENTER, meters, 90.0)


def two_airport_catalog():
    start = airport("AAA", CENTER, elevation=190.0)
    end = airport("BBB", east(30_000.0), elevation=250.0)
    pharmacy = Poi("ph1", "Corner Pharmacy", "pharmacy", east(10_000.0))
    market = Poi("mk1", "East Market", "supermarket", east(20_000.0))
    return DataCatalog(airports=(start, end), pois=(pharmacy, market))


def test_two_node_path_is_two_circuits():
    catalog = two_airport_catalog()
    path = flight_path(
        [Waypoint3D(CENTER, 500.0), Waypoint3D(east(30_000.0), 500.0)],
        (0, 1),
        ("AAA", "BBB"),
    )
    traj = build_trajectory(path, catalog, MissionSpec())
    assert [c.kind for c in traj.commands] == ["takeoff_circuit", "landing_circuit"]
    takeoff, landing = traj.commands
    assert len(takeoff.waypoints) == HOP_COUNT + 1
    assert takeoff.waypoints[0].alt == 190.0
    assert landing.waypoints[0].alt == 550.0
    assert landing.waypoints[-1].alt == 250.0


def test_loiters_at_visit_stops():
    catalog = two_airport_catalog()
    alt = 675.0
    points = [CENTER, east(5_000.0), east(10_000.0), east(15_000.0), east(20_000.0),
              east(25_000.0), east(30_000.0)]
    path = flight_path(
        [Waypoint3D(p, alt) for p in points],
        (0, 2, 4, 6),
        ("AAA", "ph1", "mk1", "BBB"),
    )
    mission = MissionSpec(visit_categories=("pharmacy", "supermarket"))
    traj = build_trajectory(path, catalog, mission)
    kinds = [c.kind for c in traj.commands]
    assert kinds == [
        "takeoff_circuit",
        "waypoint", "waypoint", "loiter", "waypoint", "waypoint", "loiter", "waypoint",
        "landing_circuit",
    ]
    interior = len(points) - 2
    assert len(traj.commands) == 2 + interior + 2
    pharmacy_loiter = traj.commands[3]
    market_loiter = traj.commands[6]
    assert pharmacy_loiter.radius_m == LOITER_RADIUS_M
    assert pharmacy_loiter.duration_s == LOITER_DURATION_S
    assert pharmacy_loiter.direction == "cw"
    assert pharmacy_loiter.waypoints[0].point == east(10_000.0)
    # terrain proxy: the nearest field sets the 300 m AGL conversion
    assert pharmacy_loiter.waypoints[0].alt == 190.0 + LOITER_AGL_M
    assert market_loiter.waypoints[0].alt == 250.0 + LOITER_AGL_M


def test_non_visit_poi_passes_through():
    catalog = two_airport_catalog()
    points = [CENTER, east(10_000.0), east(20_000.0), east(30_000.0)]
    path = flight_path(
        [Waypoint3D(p, 675.0) for p in points],
        (0, 1, 2, 3),
        ("AAA", "ph1", "mk1", "BBB"),
    )
    mission = MissionSpec(visit_categories=("pharmacy",))
    traj = build_trajectory(path, catalog, mission)
    kinds = [c.kind for c in traj.commands]
    assert kinds.count("loiter") == 1
    assert traj.commands[2].kind == "loiter"
    assert traj.commands[2].waypoints[0].point == east(10_000.0)


def test_distinct_runways_for_takeoff_and_landing():
    rws = (runway(CENTER, heading=45.0), runway(CENTER, heading=90.0, side="Right"))
    field = airport("AAA", CENTER, runways=rws)
    catalog = DataCatalog(airports=(field,))
    sw = destination_point(CENTER, 5_000.0, 225.0)
    points = [CENTER, east(5_000.0), destination_point(CENTER, 7_000.0, 180.0), sw, CENTER]
    path = flight_path(
        [Waypoint3D(p, 600.0) for p in points],
        (0, 4),
        ("AAA", "AAA"),
    )
    traj = build_trajectory(path, catalog, MissionSpec())
    takeoff = traj.commands[0]
    landing = traj.commands[-1]
    # departure runs due east, arrival comes up from the southwest
    course_out = initial_bearing(takeoff.waypoints[0].point, takeoff.waypoints[1].point)
    course_in = initial_bearing(landing.waypoints[0].point, landing.waypoints[1].point)
    assert abs(wrap_deg(course_out - 90.0)) <= 1e-6
    assert abs(wrap_deg(course_in - 45.0)) <= 1e-6
    assert len(traj.commands) == 2 + 3


def test_endpoint_off_airport_raises():
    catalog = two_airport_catalog()
    far = destination_point(CENTER, 100_000.0, 0.0)
    path = flight_path(
        [Waypoint3D(far, 500.0), Waypoint3D(east(30_000.0), 500.0)],
        (0, 1),
        ("XXX", "BBB"),
    )
    with pytest.raises(NoAirportError):
        build_trajectory(path, catalog, MissionSpec())


# --- command and trajectory validation ---------------------------------------


def make_circuit_command(kind="takeoff_circuit"):
    return TrajectoryCommand(kind, circuit().waypoints)


def test_command_validation():
    wp = Waypoint3D(CENTER, 500.0)
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("hover", (wp,))
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("loiter", (wp,), radius_m=0.0, duration_s=120.0, direction="cw")
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("loiter", (wp,), radius_m=300.0, duration_s=120.0, direction="spin")
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("loiter", (wp,), radius_m=300.0, duration_s=0.0, direction="cw")
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("waypoint", (wp, wp))
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("waypoint", (wp,), radius_m=300.0)
    with pytest.raises(InvalidInputError):
        TrajectoryCommand("takeoff_circuit", (wp,))


def test_trajectory_validation():
    wp_cmd = TrajectoryCommand("waypoint", (Waypoint3D(CENTER, 500.0),))
    takeoff = make_circuit_command("takeoff_circuit")
    landing = make_circuit_command("landing_circuit")
    Trajectory((takeoff, wp_cmd, landing))
    with pytest.raises(InvalidInputError):
        Trajectory((wp_cmd, landing))
    with pytest.raises(InvalidInputError):
        Trajectory((takeoff, wp_cmd))
    with pytest.raises(InvalidInputError):
        Trajectory((takeoff, make_circuit_command("takeoff_circuit"), landing))
    with pytest.raises(InvalidInputError):
        Trajectory((takeoff,))
