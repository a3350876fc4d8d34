"""Flight-graph construction: mission nodes plus range-limited edges.

Nodes carry a type tag (takeoff, landing, refuel_airport, poi:<category>,
patrol_cell) and an attribute map; edges are undirected great-circle
distances. Fuel costs are per-leg quantities that depend on where fuel
was last bought, so they live in the route planner, not on the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import IntegrityError, InvalidInputError
from .geodata import DataCatalog, radius_search
from .geodesy import GeoPoint, great_circle_distance
from .parsing import MissionSpec

TAKEOFF = "takeoff"
LANDING = "landing"
REFUEL = "refuel_airport"
PATROL_CELL = "patrol_cell"


def poi_type(category: str) -> str:
    return f"poi:{category}"


@dataclass(frozen=True)
class VehicleModel:
    """Fixed-wing performance figures the planners need."""

    tank_l: float = 80.0
    burn_km_per_l: float = 10.95
    cruise_speed_mps: float = 40.0
    per_stop_overhead_l: float = 10.0

    def __post_init__(self):
        for name in ("tank_l", "burn_km_per_l", "cruise_speed_mps", "per_stop_overhead_l"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidInputError(f"vehicle {name} must be positive, got {value}")

    def max_leg_m(self, reserve_overhead: bool = False) -> float:
        """Longest flyable leg; optionally reserve the per-stop overhead.

        The default keeps the full-tank figure (80 L x 10.95 km/L =
        876 km); reserve_overhead subtracts the overhead litres first.
        """
        tank = self.tank_l - self.per_stop_overhead_l if reserve_overhead else self.tank_l
        if tank <= 0.0:
            raise InvalidInputError("per-stop overhead exceeds tank capacity")
        return max_leg_from_fuel(tank, self.burn_km_per_l)


def max_leg_from_fuel(tank_l: float, burn_km_per_l: float) -> float:
    """Range in metres from tank size and burn rate."""
    if not (tank_l > 0.0 and burn_km_per_l > 0.0):
        raise InvalidInputError(f"tank {tank_l} L and burn {burn_km_per_l} km/L must be positive")
    return tank_l * burn_km_per_l * 1000.0


@dataclass(frozen=True)
class FlightNode:
    id: str
    location: GeoPoint
    node_type: str
    attrs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "attrs", MappingProxyType(dict(self.attrs)))

    @property
    def fuel_price(self) -> float | None:
        return self.attrs.get("fuel_price")


@dataclass(frozen=True)
class FlightGraph:
    """Undirected distance-weighted graph over mission nodes.

    Edges are every node pair within range_limit, listed with the
    lexicographically smaller id first and sorted, so construction is
    deterministic.
    """

    nodes: tuple[FlightNode, ...]
    edges: tuple[tuple[str, str, float], ...]
    range_limit: float | None = None

    def __post_init__(self):
        by_id = {}
        for node in self.nodes:
            if node.id in by_id:
                raise IntegrityError(f"duplicate node id {node.id!r}")
            by_id[node.id] = node
        adjacency: dict[str, dict[str, float]] = {node.id: {} for node in self.nodes}
        for a, b, w in self.edges:
            adjacency[a][b] = w
            adjacency[b][a] = w
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_adjacency", adjacency)

    def node(self, node_id: str) -> FlightNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise KeyError(f"no node {node_id!r} in graph") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def neighbors(self, node_id: str) -> Mapping[str, float]:
        return MappingProxyType(self._adjacency[node_id])

    def edge_weight(self, a: str, b: str) -> float | None:
        return self._adjacency[a].get(b)

    def nodes_of_type(self, node_type: str) -> tuple[FlightNode, ...]:
        return tuple(node for node in self.nodes if node.node_type == node_type)

    def dump(self) -> str:
        """Plain-text description for debugging and overlay tooling."""
        lines = [f"nodes: {len(self.nodes)}  edges: {len(self.edges)}  range_limit: {self.range_limit}"]
        for node in self.nodes:
            lines.append(f"node {node.id} {node.node_type} {node.location.lat:.6f} {node.location.lon:.6f}")
        for a, b, w in self.edges:
            lines.append(f"edge {a} {b} {w:.1f}")
        return "\n".join(lines)


def build_graph(nodes: Iterable[FlightNode], range_limit: float | None = None) -> FlightGraph:
    """Complete graph minus edges longer than range_limit."""
    nodes = tuple(nodes)
    if len(nodes) < 2:
        raise InvalidInputError("graph needs at least two nodes")
    if range_limit is not None and range_limit <= 0.0:
        raise InvalidInputError(f"range_limit must be positive, got {range_limit}")
    ordered = sorted(nodes, key=lambda n: n.id)
    edges = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            w = great_circle_distance(a.location, b.location)
            if range_limit is None or w <= range_limit:
                edges.append((a.id, b.id, w))
    return FlightGraph(nodes=nodes, edges=tuple(edges), range_limit=range_limit)


def _airport_node(airport, node_type: str) -> FlightNode:
    attrs = {"elevation": airport.elevation}
    if airport.fuel_price is not None:
        attrs["fuel_price"] = airport.fuel_price
    return FlightNode(id=airport.id, location=airport.location, node_type=node_type, attrs=attrs)


def _poi_node(poi, node_type: str) -> FlightNode:
    attrs = {}
    if poi.rating is not None:
        attrs["rating"] = poi.rating
        attrs["review_count"] = float(poi.review_count)
    return FlightNode(id=poi.id, location=poi.location, node_type=node_type, attrs=attrs)


def candidate_nodes(
    spec: MissionSpec,
    catalog: DataCatalog,
    corridor_margin_m: float | None = None,
) -> list[FlightNode]:
    """Expand a resolved mission spec into flight-graph nodes.

    Refuel candidates are the priced airports whose start-to-end detour
    stays within corridor_margin_m (default: one full-range leg), which
    keeps continental catalogs from flooding a short mission's graph.
    """
    if spec.start_id is None or spec.end_id is None:
        raise InvalidInputError("mission spec must have resolved start and end airports")
    start = catalog.airport_by_id(spec.start_id)
    end = catalog.airport_by_id(spec.end_id)
    if start is None or end is None:
        raise IntegrityError("mission spec references airports missing from the catalog")

    nodes = [_airport_node(start, TAKEOFF)]
    if end.id != start.id:
        nodes.append(_airport_node(end, LANDING))

    if spec.is_survey:
        cells = [p for p in catalog.pois if p.category == spec.survey_category]
        center = catalog.airport_by_id(spec.survey_center_id or spec.start_id)
        if spec.survey_radius_m is not None:
            cells = [p for p, _ in radius_search(cells, center.location, spec.survey_radius_m)]
        nodes.extend(_poi_node(p, PATROL_CELL) for p in cells)
        return nodes

    for category in spec.visit_categories:
        nodes.extend(_poi_node(p, poi_type(category)) for p in catalog.pois if p.category == category)

    if corridor_margin_m is None:
        corridor_margin_m = VehicleModel().max_leg_m()
    direct = great_circle_distance(start.location, end.location)
    for airport in catalog.airports:
        if airport.id in (start.id, end.id) or airport.fuel_price is None:
            continue
        detour = (
            great_circle_distance(start.location, airport.location)
            + great_circle_distance(airport.location, end.location)
            - direct
        )
        if detour <= corridor_margin_m:
            nodes.append(_airport_node(airport, REFUEL))
    return nodes
