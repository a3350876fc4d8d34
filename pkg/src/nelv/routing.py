"""Route planning: pick the node sequence between takeoff and landing.

The search is an exact layered label-setting run. Layers are the
required POI types in a candidate visit order; inside a layer the
route may pass through any refuel airports. Fuel is priced where it
was last bought (carried price), so the search state is
(layer, node, carried price, used required nodes) and every candidate
permutation of required types is scored with the preference objective.

Tank state beyond the per-edge range limit is not modelled: the graph
already drops edges longer than one tank of fuel, matching the vehicle
model the figures come from. Airports without a fuel price can be
flown through but never update the carried price.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

from .errors import InfeasibleRouteError, InvalidInputError, PricingError
from .geodesy import great_circle_distance
from .graph import FlightGraph, LANDING, PATROL_CELL, REFUEL, TAKEOFF, VehicleModel
from .parsing import PREFERENCES

LABEL_ORDER = ("balanced", "cheapest", "fastest", "shortest")


@dataclass(frozen=True)
class Constraints:
    max_distance_m: float | None = None
    max_duration_s: float | None = None

    def __post_init__(self):
        for name in ("max_distance_m", "max_duration_s"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise InvalidInputError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class RouteQuery:
    graph: FlightGraph
    start: str
    end: str
    required_types: tuple[str, ...] = ()
    preference: str = "balanced"
    alpha: float = 0.5
    constraints: Constraints = field(default_factory=Constraints)
    vehicle: VehicleModel = field(default_factory=VehicleModel)

    def __post_init__(self):
        if not self.graph.has_node(self.start) or not self.graph.has_node(self.end):
            raise InvalidInputError(f"start {self.start!r} and end {self.end!r} must be graph nodes")
        if self.preference not in PREFERENCES:
            raise InvalidInputError(f"preference {self.preference!r} not in {PREFERENCES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError(f"alpha {self.alpha} outside [0, 1]")


@dataclass(frozen=True)
class RouteLeg:
    from_id: str
    to_id: str
    distance_m: float
    fuel_l: float
    fuel_cost: float | None
    duration_s: float


@dataclass(frozen=True)
class Route:
    node_ids: tuple[str, ...]
    legs: tuple[RouteLeg, ...]
    total_distance_m: float
    total_fuel_l: float
    total_fuel_cost: float | None
    total_duration_s: float
    label: str = ""
    also_labels: tuple[str, ...] = ()
    fallback_direct: bool = False


def leg_fuel_cost(distance_m: float, vehicle: VehicleModel, fuel_price: float | None) -> tuple[float, float | None]:
    """Litres burned on a leg plus cost at the given price (None if unknown)."""
    liters = distance_m / 1000.0 / vehicle.burn_km_per_l + vehicle.per_stop_overhead_l
    return liters, (liters * fuel_price if fuel_price is not None else None)


def _carried_price(node, previous: float | None) -> float | None:
    if node.node_type in (TAKEOFF, LANDING, REFUEL) and node.fuel_price is not None:
        return node.fuel_price
    return previous


def annotate_route(
    graph: FlightGraph,
    node_ids: Sequence[str],
    vehicle: VehicleModel,
    label: str = "",
    also_labels: tuple[str, ...] = (),
    fallback_direct: bool = False,
) -> Route:
    """Attach per-leg distance, fuel, cost and duration to a sequence."""
    node_ids = tuple(node_ids)
    if len(node_ids) < 2:
        raise InvalidInputError("a route needs at least two nodes")
    legs = []
    price = None
    for a, b in itertools.pairwise(node_ids):
        price = _carried_price(graph.node(a), price)
        distance = graph.edge_weight(a, b)
        if distance is None:
            raise InvalidInputError(f"nodes {a!r} and {b!r} are not connected")
        liters, cost = leg_fuel_cost(distance, vehicle, price)
        legs.append(RouteLeg(a, b, distance, liters, cost, distance / vehicle.cruise_speed_mps))
    costs = [leg.fuel_cost for leg in legs]
    return Route(
        node_ids=node_ids,
        legs=tuple(legs),
        total_distance_m=sum(leg.distance_m for leg in legs),
        total_fuel_l=sum(leg.fuel_l for leg in legs),
        total_fuel_cost=sum(costs) if None not in costs else None,
        total_duration_s=sum(leg.duration_s for leg in legs),
        label=label,
        also_labels=also_labels,
        fallback_direct=fallback_direct,
    )


def node_rewards(graph: FlightGraph) -> dict[str, float]:
    """Per-node visit reward in [0, 1]: rating-weighted review volume,
    min-max normalized over the graph's POI nodes; airports get 0."""
    raw = {}
    for node in graph.nodes:
        if node.node_type.startswith("poi:") or node.node_type == PATROL_CELL:
            rating = node.attrs.get("rating")
            reviews = node.attrs.get("review_count", 0.0)
            raw[node.id] = (rating / 5.0) * math.log2(1.0 + reviews) if rating is not None else 0.0
    rewards = {node.id: 0.0 for node in graph.nodes}
    if raw:
        lo, hi = min(raw.values()), max(raw.values())
        if hi > lo:
            rewards.update({k: (v - lo) / (hi - lo) for k, v in raw.items()})
    return rewards


@dataclass(frozen=True)
class _Scoring:
    """Per-query scoring context: effective alpha, rewards, norm bounds."""

    preference: str
    alpha: float
    cruise_speed_mps: float
    rewards: dict[str, float]
    cost_bounds: tuple[float, float] | None
    dist_bounds: tuple[float, float] | None

    def leg_measure(self, distance: float, liters: float, cost: float | None) -> float:
        if self.preference == "cheapest":
            return cost if cost is not None else math.inf
        if self.preference == "shortest":
            return distance
        if self.preference == "fastest":
            return distance / self.cruise_speed_mps
        cost_term = _normalize(cost, self.cost_bounds) if cost is not None else 0.0
        dist_term = _normalize(distance, self.dist_bounds)
        return self.alpha * cost_term + (1.0 - self.alpha) * dist_term

    def step(self, distance: float, liters: float, cost: float | None, arrival_id: str) -> float:
        return self.alpha * self.leg_measure(distance, liters, cost) - (1.0 - self.alpha) * self.rewards[arrival_id]


def _normalize(value: float, bounds: tuple[float, float] | None) -> float:
    if bounds is None:
        return 0.0
    lo, hi = bounds
    if hi <= lo:
        return 0.0
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


def _scoring(query: RouteQuery) -> _Scoring:
    graph, vehicle = query.graph, query.vehicle
    # non-balanced preferences score the pure leg quantity (alpha = 1)
    alpha = query.alpha if query.preference == "balanced" else 1.0
    cost_bounds = dist_bounds = None
    if query.preference == "balanced" and graph.edges:
        distances = [w for _, _, w in graph.edges]
        dist_bounds = (min(distances), max(distances))
        costs = []
        for a, b, w in graph.edges:
            liters, _ = leg_fuel_cost(w, vehicle, None)
            for departure in (a, b):
                price = graph.node(departure).fuel_price
                if price is not None:
                    costs.append(liters * price)
        if costs:
            cost_bounds = (min(costs), max(costs))
    return _Scoring(
        query.preference, alpha, vehicle.cruise_speed_mps, node_rewards(graph), cost_bounds, dist_bounds
    )


def route_objective(route: Route, query: RouteQuery) -> float:
    """Preference objective of an annotated route (lower is better)."""
    scoring = _scoring(query)
    total = 0.0
    for leg in route.legs:
        total += scoring.step(leg.distance_m, leg.fuel_l, leg.fuel_cost, leg.to_id)
    return total


def _duplicate_free_permutations(tags: Sequence[str]) -> Iterator[tuple[str, ...]]:
    return iter(sorted(set(itertools.permutations(tags))))


def _search_sequence(query: RouteQuery, scoring: _Scoring, order: tuple[str, ...]) -> tuple[float, tuple[str, ...]] | None:
    """Best (objective, node sequence) visiting the ordered required types.

    Exact label-setting over (layer, node, carried price, used nodes);
    refuel airports are free intermediates inside every layer. Rewards
    make layer-advancing steps possibly negative, but layers are acyclic
    so settling per layer keeps the run exact.
    """
    graph, vehicle = query.graph, query.vehicle
    start_node = graph.node(query.start)
    if query.preference == "cheapest" and start_node.fuel_price is None:
        raise PricingError(f"start node {query.start!r} has no fuel price for a cheapest search")
    layers = len(order)
    start_state = (query.start, _carried_price(start_node, None), frozenset())
    frontier: dict[tuple, tuple[float, tuple[str, ...]]] = {start_state: (0.0, (query.start,))}

    for layer in range(layers + 1):
        target_type = order[layer] if layer < layers else None
        heap: list[tuple[float, tuple[str, ...], str, float | None, frozenset]] = []
        for (node_id, price, used), (objective, path) in frontier.items():
            heapq.heappush(heap, (objective, path, node_id, price, used))
        settled: set[tuple] = set()
        arrivals: dict[tuple, tuple[float, tuple[str, ...]]] = {}
        while heap:
            objective, path, node_id, price, used = heapq.heappop(heap)
            key = (node_id, price)
            if key in settled:
                continue
            settled.add(key)
            for neighbor_id, distance in graph.neighbors(node_id).items():
                neighbor = graph.node(neighbor_id)
                liters, cost = leg_fuel_cost(distance, vehicle, price)
                if target_type is None:
                    if neighbor_id == query.end:
                        step = scoring.step(distance, liters, cost, neighbor_id)
                        state = (neighbor_id, price, used)
                        candidate = (objective + step, path + (neighbor_id,))
                        if state not in arrivals or candidate < arrivals[state]:
                            arrivals[state] = candidate
                elif neighbor.node_type == target_type and neighbor_id not in used and neighbor_id != query.start:
                    step = scoring.step(distance, liters, cost, neighbor_id)
                    state = (neighbor_id, _carried_price(neighbor, price), used | {neighbor_id})
                    candidate = (objective + step, path + (neighbor_id,))
                    if state not in arrivals or candidate < arrivals[state]:
                        arrivals[state] = candidate
                if neighbor.node_type == REFUEL and neighbor_id != query.end:
                    step = scoring.step(distance, liters, cost, neighbor_id)
                    next_price = _carried_price(neighbor, price)
                    if (neighbor_id, next_price) in settled:
                        continue
                    if math.isinf(step):
                        continue
                    heapq.heappush(heap, (objective + step, path + (neighbor_id,), neighbor_id, next_price, used))
        frontier = arrivals
        if not frontier:
            return None

    best = min((value, state) for state, value in frontier.items())[0]
    return best


def _direct_fallback(query: RouteQuery) -> Route:
    if query.graph.edge_weight(query.start, query.end) is None:
        start = query.graph.node(query.start)
        end = query.graph.node(query.end)
        distance = great_circle_distance(start.location, end.location)
        raise InfeasibleRouteError(
            f"no feasible route and the direct leg is {distance / 1000.0:.0f} km, over the range limit",
            binding_constraint="range_limit",
        )
    return annotate_route(query.graph, (query.start, query.end), query.vehicle, fallback_direct=True)


def _within_constraints(route: Route, constraints: Constraints) -> bool:
    if constraints.max_distance_m is not None and route.total_distance_m > constraints.max_distance_m:
        return False
    if constraints.max_duration_s is not None and route.total_duration_s > constraints.max_duration_s:
        return False
    return True


def plan_route(query: RouteQuery) -> Route:
    """Best route for the query preference; direct fallback when nothing fits.

    Every permutation of the required types is searched exactly; the
    constraint bounds prune permutations via the straight-line lower
    bound and filter the finished candidates.
    """
    scoring = _scoring(query)
    lower_bound = great_circle_distance(
        query.graph.node(query.start).location, query.graph.node(query.end).location
    )
    candidates: list[tuple[float, tuple[str, ...]]] = []
    for order in _duplicate_free_permutations(query.required_types):
        if query.constraints.max_distance_m is not None and lower_bound > query.constraints.max_distance_m:
            continue
        if (
            query.constraints.max_duration_s is not None
            and lower_bound / query.vehicle.cruise_speed_mps > query.constraints.max_duration_s
        ):
            continue
        found = _search_sequence(query, scoring, order)
        if found is not None:
            candidates.append(found)

    for objective, node_ids in sorted(candidates):
        route = annotate_route(query.graph, node_ids, query.vehicle)
        if _within_constraints(route, query.constraints):
            return route
    return _direct_fallback(query)


def enumerate_alternatives(query: RouteQuery) -> list[Route]:
    """One best route per preference label, deduplicated by node sequence.

    The first label in the stable order names a merged route; the other
    preferences that picked the same sequence land in also_labels.
    """
    found: list[tuple[str, Route]] = []
    for preference in LABEL_ORDER:
        try:
            route = plan_route(replace(query, preference=preference))
        except (InfeasibleRouteError, PricingError):
            continue
        found.append((preference, route))
    merged: list[Route] = []
    for preference, route in found:
        existing = next((i for i, r in enumerate(merged) if r.node_ids == route.node_ids), None)
        if existing is None:
            merged.append(replace(route, label=preference))
        else:
            merged[existing] = replace(merged[existing], also_labels=merged[existing].also_labels + (preference,))
    return merged
