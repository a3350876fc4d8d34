"""Route planner: leg economics, exact search vs independent oracles.

The cheapest/shortest searches are checked against networkx Dijkstra
runs on a directed graph whose edge weights re-derive the leg economics
from scratch; the required-stop search is checked against brute-force
enumeration of every visit order, POI choice and refuel insertion.
"""

from __future__ import annotations

import itertools
import math
import random

import networkx as nx
import pytest

from nelv.errors import InfeasibleRouteError, InvalidInputError, PricingError
from nelv.geodesy import GeoPoint, destination_point, great_circle_distance
from nelv.graph import (
    FlightNode,
    LANDING,
    REFUEL,
    TAKEOFF,
    VehicleModel,
    build_graph,
    max_leg_from_fuel,
    poi_type,
)
from nelv.routing import (
    Constraints,
    Route,
    RouteQuery,
    annotate_route,
    enumerate_alternatives,
    leg_fuel_cost,
    node_rewards,
    plan_route,
    route_objective,
)

VEHICLE = VehicleModel()
ORIGIN = GeoPoint(39.0, -95.0)


def node(id, node_type, lat, lon, price=None, rating=None, reviews=None):
    attrs = {}
    if price is not None:
        attrs["fuel_price"] = price
    if rating is not None:
        attrs["rating"] = rating
        attrs["review_count"] = float(reviews)
    return FlightNode(id=id, location=GeoPoint(lat, lon), node_type=node_type, attrs=attrs)


def place(distance_m, bearing):
    return destination_point(ORIGIN, distance_m, bearing)


# Leg economics.

def test_leg_fuel_cost_known_values():
    liters, cost = leg_fuel_cost(500_000.0, VEHICLE, 2.77)
    assert liters == pytest.approx(500.0 / 10.95 + 10.0, rel=1e-12)
    assert round(liters, 2) == 55.66
    assert round(cost, 2) == 154.18

    liters, cost = leg_fuel_cost(0.0, VEHICLE, 1.0)
    assert liters == 10.0 and cost == 10.0
    assert leg_fuel_cost(1000.0, VEHICLE, None) == (pytest.approx(10.0 + 1.0 / 10.95), None)


def test_annotate_route_carries_last_airport_price():
    a = place(0, 0)
    nodes = [
        node("S", TAKEOFF, a.lat, a.lon, price=2.0),
        node("P", poi_type("pharmacy"), *_coords(place(40_000, 90))),
        node("E", LANDING, *_coords(place(80_000, 90))),
    ]
    graph = build_graph(nodes)
    route = annotate_route(graph, ("S", "P", "E"), VEHICLE)
    # the leg out of the POI is still paid at the takeoff airport price
    assert route.legs[1].fuel_cost == pytest.approx(route.legs[1].fuel_l * 2.0, rel=1e-12)
    assert route.total_fuel_cost == pytest.approx(sum(l.fuel_cost for l in route.legs), rel=1e-12)
    assert route.total_distance_m == pytest.approx(sum(l.distance_m for l in route.legs), rel=1e-12)

    unpriced = build_graph([
        node("S", TAKEOFF, a.lat, a.lon),
        node("E", LANDING, *_coords(place(50_000, 90))),
    ])
    assert annotate_route(unpriced, ("S", "E"), VEHICLE).total_fuel_cost is None


def _coords(point):
    return point.lat, point.lon


# Reward model.

def test_node_rewards_normalized_over_pois():
    nodes = [
        node("S", TAKEOFF, 39.0, -95.0, price=1.0),
        node("E", LANDING, 39.5, -95.0, price=1.0),
        node("p_low", poi_type("pharmacy"), 39.1, -95.0, rating=3.0, reviews=7),
        node("p_high", poi_type("pharmacy"), 39.2, -95.0, rating=5.0, reviews=127),
        node("p_none", poi_type("pharmacy"), 39.3, -95.0),
    ]
    rewards = node_rewards(build_graph(nodes))
    assert rewards["S"] == 0.0 and rewards["E"] == 0.0
    assert rewards["p_none"] == 0.0
    assert rewards["p_high"] == 1.0
    raw_low = 3.0 / 5.0 * math.log2(8.0)
    raw_high = 5.0 / 5.0 * math.log2(128.0)
    assert rewards["p_low"] == pytest.approx(raw_low / raw_high, rel=1e-12)


# Oracle equivalence on airport-only graphs (cheapest and shortest).

def random_airport_graph(rng, n_extra):
    nodes = [
        node("A_start", TAKEOFF, *_coords(place(0, 0)), price=rng.uniform(0.74, 2.77)),
        node("Z_end", LANDING, *_coords(place(rng.uniform(300e3, 800e3), 90)), price=rng.uniform(0.74, 2.77)),
    ]
    for i in range(n_extra):
        point = place(rng.uniform(0, 800e3), rng.uniform(0, 360))
        nodes.append(node(f"R{i:02d}", REFUEL, point.lat, point.lon, price=rng.uniform(0.74, 2.77)))
    limit = rng.choice([max_leg_from_fuel(80.0, 10.95), 500_000.0, 350_000.0])
    return build_graph(nodes, range_limit=limit)


def oracle_path_length(graph, start, end, weight_of):
    """Dijkstra over directed legs; only refuel airports are intermediates."""
    directed = nx.DiGraph()
    for a, b, w in graph.edges:
        for u, v in ((a, b), (b, a)):
            if v == start or u == end:
                continue
            directed.add_edge(u, v, weight=weight_of(u, w))
    return nx.dijkstra_path_length(directed, start, end)


def oracle_cheapest(graph, start, end, vehicle):
    def weight(u, distance):
        liters = distance / 1000.0 / vehicle.burn_km_per_l + vehicle.per_stop_overhead_l
        return liters * graph.node(u).fuel_price

    return oracle_path_length(graph, start, end, weight)


def oracle_shortest(graph, start, end):
    return oracle_path_length(graph, start, end, lambda u, distance: distance)


def test_plan_route_matches_dijkstra_oracles():
    rng = random.Random(20260815)
    checked = infeasible = 0
    for trial in range(30):
        graph = random_airport_graph(rng, rng.randint(0, 10))
        query = RouteQuery(graph=graph, start="A_start", end="Z_end", preference="cheapest")
        try:
            route = plan_route(query)
        except InfeasibleRouteError:
            with pytest.raises((nx.NetworkXNoPath, nx.NodeNotFound)):
                oracle_cheapest(graph, "A_start", "Z_end", VEHICLE)
            infeasible += 1
            continue
        assert not route.fallback_direct
        assert route.total_fuel_cost == pytest.approx(
            oracle_cheapest(graph, "A_start", "Z_end", VEHICLE), rel=1e-9
        )
        shortest = plan_route(RouteQuery(graph=graph, start="A_start", end="Z_end", preference="shortest"))
        assert shortest.total_distance_m == pytest.approx(oracle_shortest(graph, "A_start", "Z_end"), rel=1e-9)
        # duration is a positive scale of distance, so fastest picks the same chain
        fastest = plan_route(RouteQuery(graph=graph, start="A_start", end="Z_end", preference="fastest"))
        assert fastest.node_ids == shortest.node_ids
        checked += 1
    assert checked >= 15


def test_cheapest_multi_stop_beats_expensive_direct():
    # expensive fuel at the start: hopping to a cheap airport wins
    start = node("S", TAKEOFF, *_coords(place(0, 0)), price=2.77)
    cheap = node("M", REFUEL, *_coords(place(400_000, 90)), price=0.74)
    end = node("E", LANDING, *_coords(place(800_000, 90)), price=1.5)
    graph = build_graph([start, cheap, end], range_limit=876_000.0)
    route = plan_route(RouteQuery(graph=graph, start="S", end="E", preference="cheapest"))
    assert route.node_ids == ("S", "M", "E")
    direct = annotate_route(graph, ("S", "E"), VEHICLE)
    assert route.total_fuel_cost < direct.total_fuel_cost
    # shortest still flies direct
    shortest = plan_route(RouteQuery(graph=graph, start="S", end="E", preference="shortest"))
    assert shortest.node_ids == ("S", "E")


# Required-stop search vs brute force.

def errand_graph(with_refuel=False):
    nodes = [
        node("S", TAKEOFF, *_coords(place(0, 0)), price=1.4),
        node("E", LANDING, *_coords(place(90_000, 90)), price=1.1),
        node("ph_a", poi_type("pharmacy"), *_coords(place(30_000, 80)), rating=4.5, reviews=120),
        node("ph_b", poi_type("pharmacy"), *_coords(place(45_000, 110)), rating=3.0, reviews=10),
        node("mk_a", poi_type("supermarket"), *_coords(place(60_000, 95)), rating=4.0, reviews=300),
        node("mk_b", poi_type("supermarket"), *_coords(place(20_000, 60)), rating=4.9, reviews=80),
    ]
    if with_refuel:
        nodes.append(node("rf", REFUEL, *_coords(place(50_000, 100)), price=0.9))
    return build_graph(nodes)


def brute_force_best(query):
    """Enumerate visit orders, POI choices and refuel insertions."""
    graph = query.graph
    by_type = {}
    for n in graph.nodes:
        by_type.setdefault(n.node_type, []).append(n.id)
    refuels = by_type.get(REFUEL, [])
    best = None
    for order in sorted(set(itertools.permutations(query.required_types))):
        pools = [by_type.get(tag, []) for tag in order]
        for picks in itertools.product(*pools):
            if len(set(picks)) != len(picks):
                continue
            waypoints = [query.start, *picks, query.end]
            gaps = len(waypoints) - 1
            for insertion in itertools.product([None, *refuels], repeat=gaps):
                sequence = []
                for i, wp in enumerate(waypoints[:-1]):
                    sequence.append(wp)
                    if insertion[i] is not None:
                        sequence.append(insertion[i])
                sequence.append(waypoints[-1])
                if any(graph.edge_weight(a, b) is None for a, b in itertools.pairwise(sequence)):
                    continue
                route = annotate_route(graph, sequence, query.vehicle)
                score = route_objective(route, query)
                key = (score, route.node_ids)
                if best is None or key < best:
                    best = key
    return best


@pytest.mark.parametrize("preference", ["balanced", "cheapest", "fastest", "shortest"])
@pytest.mark.parametrize("with_refuel", [False, True])
def test_required_stops_match_exhaustive_oracle(preference, with_refuel):
    graph = errand_graph(with_refuel)
    query = RouteQuery(
        graph=graph,
        start="S",
        end="E",
        required_types=(poi_type("pharmacy"), poi_type("supermarket")),
        preference=preference,
    )
    route = plan_route(query)
    score, node_ids = brute_force_best(query)
    assert route.node_ids == node_ids
    assert route_objective(route, query) == pytest.approx(score, rel=1e-9, abs=1e-12)
    assert not route.fallback_direct
    kinds = [graph.node(i).node_type for i in route.node_ids]
    assert kinds.count(poi_type("pharmacy")) == 1
    assert kinds.count(poi_type("supermarket")) == 1


def test_objective_examples():
    graph = errand_graph()
    query = RouteQuery(graph=graph, start="S", end="E", preference="shortest")
    route = plan_route(query)
    assert route_objective(route, query) == pytest.approx(route.total_distance_m, rel=1e-12)
    fastest = RouteQuery(graph=graph, start="S", end="E", preference="fastest")
    assert route_objective(plan_route(fastest), fastest) == pytest.approx(
        route.total_distance_m / VEHICLE.cruise_speed_mps, rel=1e-12
    )


def test_closed_tour_when_start_equals_end():
    depot = node("D", TAKEOFF, *_coords(place(0, 0)), price=1.2)
    cell = node("c1", poi_type("orchard"), *_coords(place(5_000, 45)))
    graph = build_graph([depot, cell])
    query = RouteQuery(graph=graph, start="D", end="D", required_types=(poi_type("orchard"),))
    route = plan_route(query)
    assert route.node_ids == ("D", "c1", "D")
    assert route.total_distance_m == pytest.approx(2.0 * graph.edge_weight("D", "c1"), rel=1e-12)


def test_fallback_and_infeasible_paths():
    start = node("S", TAKEOFF, *_coords(place(0, 0)), price=1.2)
    end = node("E", LANDING, *_coords(place(100_000, 90)), price=1.0)
    graph = build_graph([start, end])
    # required type has no candidates -> flagged direct fallback
    query = RouteQuery(graph=graph, start="S", end="E", required_types=(poi_type("pharmacy"),))
    route = plan_route(query)
    assert route.fallback_direct and route.node_ids == ("S", "E")

    far = node("F", LANDING, *_coords(place(900_000, 90)), price=1.0)
    sparse = build_graph([start, far], range_limit=876_000.0)
    with pytest.raises(InfeasibleRouteError) as err:
        plan_route(RouteQuery(graph=sparse, start="S", end="F"))
    assert err.value.binding_constraint == "range_limit"


def test_constraints_filter_routes():
    graph = errand_graph()
    base = RouteQuery(graph=graph, start="S", end="E", required_types=(poi_type("pharmacy"),), preference="shortest")
    unconstrained = plan_route(base)
    assert not unconstrained.fallback_direct
    # a bound below the best detour forces the direct fallback
    tight = RouteQuery(
        graph=graph,
        start="S",
        end="E",
        required_types=(poi_type("pharmacy"),),
        preference="shortest",
        constraints=Constraints(max_distance_m=unconstrained.total_distance_m - 1.0),
    )
    assert plan_route(tight).fallback_direct
    roomy = RouteQuery(
        graph=graph,
        start="S",
        end="E",
        required_types=(poi_type("pharmacy"),),
        preference="shortest",
        constraints=Constraints(max_duration_s=unconstrained.total_duration_s + 1.0),
    )
    assert plan_route(roomy).node_ids == unconstrained.node_ids


def test_cheapest_requires_priced_start():
    graph = build_graph([
        node("S", TAKEOFF, *_coords(place(0, 0))),
        node("E", LANDING, *_coords(place(50_000, 90)), price=1.0),
    ])
    with pytest.raises(PricingError):
        plan_route(RouteQuery(graph=graph, start="S", end="E", preference="cheapest"))


def test_tie_break_prefers_lexicographic_sequence():
    # two co-located refuel stops give an exact objective tie
    start = node("S", TAKEOFF, *_coords(place(0, 0)), price=1.0)
    end = node("E", LANDING, *_coords(place(600_000, 90)), price=1.0)
    mid = place(300_000, 90)
    a = node("RA", REFUEL, mid.lat, mid.lon, price=1.0)
    b = node("RB", REFUEL, mid.lat, mid.lon, price=1.0)
    graph = build_graph([start, end, b, a], range_limit=400_000.0)
    route = plan_route(RouteQuery(graph=graph, start="S", end="E", preference="shortest"))
    assert route.node_ids == ("S", "RA", "E")


def test_enumerate_alternatives_dedupes_with_labels():
    graph = errand_graph()
    query = RouteQuery(graph=graph, start="S", end="E")
    routes = enumerate_alternatives(query)
    assert 1 <= len(routes) <= 4
    labels = [r.label for r in routes]
    assert labels == sorted(labels, key=["balanced", "cheapest", "fastest", "shortest"].index)
    seen = set()
    for route in routes:
        assert route.node_ids not in seen
        seen.add(route.node_ids)
    all_labels = [label for r in routes for label in (r.label, *r.also_labels)]
    assert sorted(all_labels) == ["balanced", "cheapest", "fastest", "shortest"]

    two = build_graph([
        node("S", TAKEOFF, *_coords(place(0, 0)), price=1.0),
        node("E", LANDING, *_coords(place(50_000, 90)), price=1.0),
    ])
    routes = enumerate_alternatives(RouteQuery(graph=two, start="S", end="E"))
    assert len(routes) == 1
    assert routes[0].label == "balanced"
    assert routes[0].also_labels == ("cheapest", "fastest", "shortest")


def test_cheapest_vs_shortest_diverge_on_price_contrast():
    # near airport sells dear, far airport sells cheap: the cheapest chain
    # detours while the shortest flies the near chain
    start = node("S", TAKEOFF, *_coords(place(0, 0)), price=2.5)
    near = node("NEAR", REFUEL, *_coords(place(430_000, 85)), price=2.7)
    far = node("FAR", REFUEL, *_coords(place(430_000, 115)), price=0.74)
    end = node("E", LANDING, *_coords(place(860_000, 90)), price=1.0)
    graph = build_graph([start, near, far, end], range_limit=600_000.0)
    routes = enumerate_alternatives(RouteQuery(graph=graph, start="S", end="E"))
    by_label = {label: r for r in routes for label in (r.label, *r.also_labels)}
    assert by_label["cheapest"].node_ids == ("S", "FAR", "E")
    assert by_label["shortest"].node_ids == ("S", "NEAR", "E")


def test_query_validation():
    graph = errand_graph()
    with pytest.raises(InvalidInputError):
        RouteQuery(graph=graph, start="S", end="nope")
    with pytest.raises(InvalidInputError):
        RouteQuery(graph=graph, start="S", end="E", preference="scenic")
    with pytest.raises(InvalidInputError):
        RouteQuery(graph=graph, start="S", end="E", alpha=1.5)
    with pytest.raises(InvalidInputError):
        Constraints(max_distance_m=0.0)
