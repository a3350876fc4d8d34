"""PSO path refinement: 3D waypoints between consecutive route nodes.

Each route leg is optimized independently in a local tangent-plane
frame (east/north metres plus altitude). The swarm objective charges a
large penalty for metres flown inside restricted airspace and a small
fare for length, weather risk and populated-area exposure, so feasible
detours always beat violating shortcuts. The straight geodesic is
always seeded as particle 0, which keeps the no-obstacle answer exact.

Short and medium legs fly a low altitude band and pay ground risk;
long legs are fixed at cruise altitude with ground risk disabled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrityError, InvalidInputError
from .geodata import (
    DataCatalog,
    population_crossing_length,
    restricted_crossing_length,
    weather_risk_along,
)
from .geodesy import (
    EARTH_RADIUS_M,
    GeoPoint,
    Waypoint3D,
    great_circle_distance,
    intermediate_point,
    normalize_lon,
)
from .graph import FlightGraph
from .parsing import range_class_m
from .routing import Route

LOW_BAND_BOUNDS = (150.0, 1200.0)
HIGH_BAND_ALT_M = 9144.0
ALTITUDE_BANDS = ("low", "high")

# swarm exploration scales, as fractions of the leg length
JITTER_FRACTION = 0.05
VELOCITY_FRACTION = 0.10


@dataclass(frozen=True)
class PsoConfig:
    """Swarm hyperparameters; generations counts update iterations."""

    population: int = 40
    generations: int = 200
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise InvalidInputError(f"population {self.population} must be >= 2")
        if self.generations < 1:
            raise InvalidInputError(f"generations {self.generations} must be >= 1")
        for name in ("w", "c1", "c2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise InvalidInputError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class PathConfig:
    """Per-leg optimization settings.

    cost_weights is (length, weather, ground); the penalty weight
    beta_c must dominate the fare weight beta_f so that restricted-zone
    crossings are never traded against fare savings.
    """

    j_waypoints: int = 8
    beta_c: float = 1.0e6
    beta_f: float = 1.0
    cost_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    altitude_band: str = "low"
    alt_bounds: tuple[float, float] = LOW_BAND_BOUNDS
    pso: PsoConfig = field(default_factory=PsoConfig)

    def __post_init__(self):
        if not 0 <= self.j_waypoints <= 32:
            raise InvalidInputError(f"j_waypoints {self.j_waypoints} outside [0, 32]")
        if not self.beta_c > self.beta_f > 0.0:
            raise InvalidInputError(f"need beta_c > beta_f > 0, got {self.beta_c}, {self.beta_f}")
        if len(self.cost_weights) != 3 or any(w < 0.0 for w in self.cost_weights):
            raise InvalidInputError(f"cost_weights {self.cost_weights} must be three non-negative values")
        if self.altitude_band not in ALTITUDE_BANDS:
            raise InvalidInputError(f"altitude band {self.altitude_band!r} not in {ALTITUDE_BANDS}")
        lo, hi = self.alt_bounds
        if not 0.0 <= lo <= hi:
            raise InvalidInputError(f"alt_bounds {self.alt_bounds} must satisfy 0 <= min <= max")


def config_for_leg(config: PathConfig, leg_length_m: float) -> PathConfig:
    """Band-adjust a config for one leg: long legs cruise high."""
    if range_class_m(leg_length_m) == "long":
        if config.altitude_band == "high":
            return config
        w_len, w_weather, _ = config.cost_weights
        return replace(
            config,
            altitude_band="high",
            alt_bounds=(HIGH_BAND_ALT_M, HIGH_BAND_ALT_M),
            cost_weights=(w_len, w_weather, 0.0),
        )
    if config.altitude_band == "low":
        return config
    return replace(config, altitude_band="low", alt_bounds=LOW_BAND_BOUNDS)


@dataclass(frozen=True)
class PathLeg:
    """One route leg by endpoint coordinates."""

    start: GeoPoint
    end: GeoPoint


@dataclass(frozen=True)
class SegmentCost:
    """Additive cost terms of one optimized segment."""

    length_m: float
    weather_risk: float
    ground_exposure: float
    violation_m: float


@dataclass(frozen=True)
class PathSegment:
    """Optimized waypoints for one leg, endpoints included."""

    waypoints: tuple[Waypoint3D, ...]
    cost: SegmentCost
    objective: float

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise InvalidInputError("a segment needs at least its two endpoints")


@dataclass(frozen=True)
class Path:
    """Concatenated segments: route nodes interleaved with waypoints.

    node_indices marks where each route node sits in the waypoint list,
    aligned with node_ids.
    """

    waypoints: tuple[Waypoint3D, ...]
    node_indices: tuple[int, ...]
    node_ids: tuple[str, ...]
    segments: tuple[SegmentCost, ...]

    def __post_init__(self):
        if len(self.node_indices) != len(self.node_ids):
            raise IntegrityError("node_indices and node_ids must align")
        if list(self.node_indices) != sorted(set(self.node_indices)):
            raise IntegrityError("node_indices must be strictly increasing")
        if self.node_indices and (self.node_indices[0] != 0 or self.node_indices[-1] != len(self.waypoints) - 1):
            raise IntegrityError("path must start and end on route nodes")

    @property
    def total_length_m(self) -> float:
        return sum(segment.length_m for segment in self.segments)


def _anchor_altitude(config: PathConfig) -> float:
    lo, hi = config.alt_bounds
    return 0.5 * (lo + hi)


def _clamp_altitudes(waypoints: Sequence[Waypoint3D], bounds: tuple[float, float]) -> list[Waypoint3D]:
    lo, hi = bounds
    return [Waypoint3D(wp.point, min(hi, max(lo, wp.alt))) for wp in waypoints]


def segment_cost(waypoints: Sequence[Waypoint3D], catalog: DataCatalog, config: PathConfig) -> SegmentCost:
    """Cost terms of a waypoint chain; zero-weight terms are skipped."""
    _, w_weather, w_ground = config.cost_weights
    length = weather = ground = violation = 0.0
    for a, b in itertools.pairwise(waypoints):
        length += great_circle_distance(a.point, b.point)
        violation += restricted_crossing_length(a, b, catalog.airspace_zones)
        if w_weather > 0.0:
            weather += weather_risk_along(catalog.weather, config.altitude_band, a, b)
        if w_ground > 0.0:
            ground += population_crossing_length(a, b, catalog.population_zones)
    return SegmentCost(length, weather, ground, violation)


def cost_objective(cost: SegmentCost, config: PathConfig) -> float:
    w_len, w_weather, w_ground = config.cost_weights
    fare = w_len * cost.length_m + w_weather * cost.weather_risk + w_ground * cost.ground_exposure
    return config.beta_c * cost.violation_m + config.beta_f * fare


def path_objective(
    candidate: Sequence[Waypoint3D], leg: PathLeg, catalog: DataCatalog, config: PathConfig
) -> float:
    """Objective of one candidate (the intermediate waypoints only)."""
    anchor = _anchor_altitude(config)
    chain = [
        Waypoint3D(leg.start, anchor),
        *_clamp_altitudes(candidate, config.alt_bounds),
        Waypoint3D(leg.end, anchor),
    ]
    return cost_objective(segment_cost(chain, catalog, config), config)


@dataclass(frozen=True)
class _Frame:
    """Equirectangular east/north metres around a reference point."""

    center: GeoPoint
    cos_lat: float

    @classmethod
    def around(cls, point: GeoPoint) -> "_Frame":
        return cls(center=point, cos_lat=math.cos(math.radians(point.lat)))

    def to_local(self, waypoints: Sequence[Waypoint3D]) -> np.ndarray:
        out = np.empty((len(waypoints), 3))
        for i, wp in enumerate(waypoints):
            out[i, 0] = EARTH_RADIUS_M * math.radians(normalize_lon(wp.lon - self.center.lon)) * self.cos_lat
            out[i, 1] = EARTH_RADIUS_M * math.radians(wp.lat - self.center.lat)
            out[i, 2] = wp.alt
        return out

    def to_waypoints(self, local: np.ndarray) -> list[Waypoint3D]:
        points = []
        for x, y, z in np.asarray(local, dtype=float).reshape(-1, 3):
            lat = self.center.lat + math.degrees(y / EARTH_RADIUS_M)
            lon = self.center.lon + math.degrees(x / (EARTH_RADIUS_M * self.cos_lat))
            points.append(Waypoint3D(GeoPoint(lat, lon), z))
        return points


@dataclass(frozen=True)
class SwarmState:
    """One PSO generation: positions, velocities and bests."""

    positions: np.ndarray
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_objectives: np.ndarray
    gbest_position: np.ndarray
    gbest_objective: float

    def __post_init__(self):
        if not (self.positions.shape == self.velocities.shape == self.pbest_positions.shape):
            raise InvalidInputError("positions, velocities and personal bests must share a shape")
        if self.pbest_objectives.shape != (self.positions.shape[0],):
            raise InvalidInputError("one personal-best objective per particle required")
        if self.gbest_position.shape != self.positions.shape[1:]:
            raise InvalidInputError("global best must have a single particle's shape")
        if self.pbest_objectives.size and self.gbest_objective > float(np.min(self.pbest_objectives)):
            raise InvalidInputError("global best objective exceeds a personal best")


Objective = Callable[[np.ndarray], float]


def init_swarm(positions: np.ndarray, objective: Objective) -> SwarmState:
    """Zero-velocity swarm with personal bests at the start positions."""
    positions = np.array(positions, dtype=float)
    objectives = np.array([objective(p) for p in positions], dtype=float)
    best = int(np.argmin(objectives))
    return SwarmState(
        positions=positions,
        velocities=np.zeros_like(positions),
        pbest_positions=positions.copy(),
        pbest_objectives=objectives,
        gbest_position=positions[best].copy(),
        gbest_objective=float(objectives[best]),
    )


def pso_step(
    state: SwarmState,
    objective: Objective,
    config: PsoConfig,
    rng: np.random.Generator,
    v_max: float | None = None,
    alt_bounds: tuple[float, float] | None = None,
) -> SwarmState:
    """One velocity/position update with fresh uniform draws.

    Personal bests move only on strict improvement and the global best
    is the argmin over personal bests, so its objective never rises.
    """
    shape = state.positions.shape
    r_p = rng.random(shape)
    r_g = rng.random(shape)
    velocities = (
        config.w * state.velocities
        + config.c1 * r_p * (state.pbest_positions - state.positions)
        + config.c2 * r_g * (state.gbest_position[None, ...] - state.positions)
    )
    if v_max is not None:
        velocities = np.clip(velocities, -v_max, v_max)
    positions = state.positions + velocities
    if alt_bounds is not None and positions.size:
        positions[..., 2] = np.clip(positions[..., 2], *alt_bounds)
    objectives = np.array([objective(p) for p in positions], dtype=float)
    improved = objectives < state.pbest_objectives
    expand = improved.reshape(improved.shape[0], *([1] * (positions.ndim - 1)))
    pbest_positions = np.where(expand, positions, state.pbest_positions)
    pbest_objectives = np.where(improved, objectives, state.pbest_objectives)
    best = int(np.argmin(pbest_objectives))
    return SwarmState(
        positions=positions,
        velocities=velocities,
        pbest_positions=pbest_positions,
        pbest_objectives=pbest_objectives,
        gbest_position=pbest_positions[best].copy(),
        gbest_objective=float(pbest_objectives[best]),
    )


def plan_segment(leg: PathLeg, catalog: DataCatalog, config: PathConfig | None = None) -> PathSegment:
    """Optimize one leg; the straight geodesic is always particle 0."""
    config = config or PathConfig()
    anchor = _anchor_altitude(config)
    start_wp = Waypoint3D(leg.start, anchor)
    end_wp = Waypoint3D(leg.end, anchor)
    length = great_circle_distance(leg.start, leg.end)
    count = config.j_waypoints
    if count == 0 or length == 0.0:
        cost = segment_cost([start_wp, end_wp], catalog, config)
        return PathSegment((start_wp, end_wp), cost, cost_objective(cost, config))

    frame = _Frame.around(intermediate_point(leg.start, leg.end, 0.5))
    straight = frame.to_local(
        [
            Waypoint3D(intermediate_point(leg.start, leg.end, (j + 1) / (count + 1)), anchor)
            for j in range(count)
        ]
    )
    pso = config.pso
    rng = np.random.default_rng(pso.seed)
    positions = np.tile(straight, (pso.population, 1, 1))
    positions[1:, :, :2] += rng.normal(0.0, JITTER_FRACTION * length, size=(pso.population - 1, count, 2))
    lo, hi = config.alt_bounds
    if hi > lo:
        positions[1:, :, 2] = rng.uniform(lo, hi, size=(pso.population - 1, count))

    def objective(local: np.ndarray) -> float:
        return path_objective(frame.to_waypoints(local), leg, catalog, config)

    state = init_swarm(positions, objective)
    for _ in range(pso.generations):
        state = pso_step(
            state, objective, pso, rng, v_max=VELOCITY_FRACTION * length, alt_bounds=config.alt_bounds
        )
    waypoints = (start_wp, *_clamp_altitudes(frame.to_waypoints(state.gbest_position), config.alt_bounds), end_wp)
    cost = segment_cost(waypoints, catalog, config)
    return PathSegment(waypoints, cost, cost_objective(cost, config))


def concatenate_path(route: Route, segments: Sequence[PathSegment], graph: FlightGraph) -> Path:
    """Join per-leg segments into one path without duplicating nodes."""
    if len(segments) != len(route.node_ids) - 1:
        raise IntegrityError(
            f"route with {len(route.node_ids)} nodes needs {len(route.node_ids) - 1} segments, got {len(segments)}"
        )
    waypoints: list[Waypoint3D] = []
    node_indices: list[int] = []
    for i, segment in enumerate(segments):
        expected_a = graph.node(route.node_ids[i]).location
        expected_b = graph.node(route.node_ids[i + 1]).location
        if segment.waypoints[0].point != expected_a or segment.waypoints[-1].point != expected_b:
            raise IntegrityError(f"segment {i} endpoints do not match route nodes "
                                 f"{route.node_ids[i]!r} -> {route.node_ids[i + 1]!r}")
        if i == 0:
            waypoints.append(segment.waypoints[0])
            node_indices.append(0)
        waypoints.extend(segment.waypoints[1:])
        node_indices.append(len(waypoints) - 1)
    return Path(
        waypoints=tuple(waypoints),
        node_indices=tuple(node_indices),
        node_ids=route.node_ids,
        segments=tuple(segment.cost for segment in segments),
    )


def plan_path(
    route: Route, graph: FlightGraph, catalog: DataCatalog, config: PathConfig | None = None
) -> Path:
    """Optimize every leg of a route and concatenate the segments."""
    config = config or PathConfig()
    segments = []
    for a_id, b_id in itertools.pairwise(route.node_ids):
        a = graph.node(a_id).location
        b = graph.node(b_id).location
        leg_config = config_for_leg(config, great_circle_distance(a, b))
        segments.append(plan_segment(PathLeg(a, b), catalog, leg_config))
    return concatenate_path(route, segments, graph)


def revise_path(
    path: Path, waypoints: Sequence[Waypoint3D], catalog: DataCatalog, config: PathConfig | None = None
) -> Path:
    """Re-score a path whose intermediate waypoints an operator moved.

    Route nodes are pinned: the vertex count and every node vertex must
    match the original, and altitudes must stay inside the band of
    their leg. No optimization runs; segments are costed as given.
    """
    config = config or PathConfig()
    waypoints = tuple(waypoints)
    if len(waypoints) != len(path.waypoints):
        raise InvalidInputError(
            f"revised path must keep {len(path.waypoints)} waypoints, got {len(waypoints)}"
        )
    for i in path.node_indices:
        moved = great_circle_distance(waypoints[i].point, path.waypoints[i].point) > 1.0
        if moved or abs(waypoints[i].alt - path.waypoints[i].alt) > 1e-6:
            raise InvalidInputError(f"waypoint {i} is a route node and cannot move")
    segments = []
    for a, b in itertools.pairwise(path.node_indices):
        chain = waypoints[a : b + 1]
        leg_config = config_for_leg(config, great_circle_distance(chain[0].point, chain[-1].point))
        lo, hi = leg_config.alt_bounds
        for k in range(a + 1, b):
            if not lo <= waypoints[k].alt <= hi:
                raise InvalidInputError(
                    f"waypoint {k} altitude {waypoints[k].alt:.0f} m outside band [{lo:.0f}, {hi:.0f}] m"
                )
        segments.append(segment_cost(chain, catalog, leg_config))
    return Path(
        waypoints=waypoints,
        node_indices=path.node_indices,
        node_ids=path.node_ids,
        segments=tuple(segments),
    )
