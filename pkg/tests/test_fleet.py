"""Multi-vehicle partitioning vs a brute-force min-max oracle."""

from __future__ import annotations

import itertools
import random

import pytest

from nelv.errors import InvalidInputError
from nelv.geodesy import GeoPoint, destination_point
from nelv.graph import FlightNode, PATROL_CELL, TAKEOFF, VehicleModel, build_graph
from nelv.fleet import EXACT_TARGET_LIMIT, plan_multi_uav, tour_length

DEPOT = GeoPoint(40.4, -86.9)


def make_graph(points):
    nodes = [FlightNode(id="depot", location=DEPOT, node_type=TAKEOFF)]
    for i, p in enumerate(points):
        nodes.append(FlightNode(id=f"t{i:02d}", location=p, node_type=PATROL_CELL))
    return build_graph(nodes)


def random_points(rng, count, spread_m=20_000.0):
    return [
        destination_point(DEPOT, rng.uniform(1_000.0, spread_m), rng.uniform(0.0, 360.0))
        for _ in range(count)
    ]


def graph_distance(graph):
    return lambda a, b: graph.edge_weight(a, b)


def set_partitions(items, k):
    """Every split of items into exactly k non-empty unlabeled groups."""
    if k == 1:
        yield [list(items)]
        return
    if len(items) == k:
        yield [[item] for item in items]
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest, k - 1):
        yield [[first], *smaller]
    for smaller in set_partitions(rest, k):
        for i in range(len(smaller)):
            yield [*smaller[:i], [first, *smaller[i]], *smaller[i + 1 :]]


def best_tour_brute(depot, group, distance):
    return min(tour_length(depot, order, distance) for order in itertools.permutations(group))


def oracle_min_max(graph, targets, k):
    distance = graph_distance(graph)
    return min(
        max(best_tour_brute("depot", group, distance) for group in partition)
        for partition in set_partitions(list(targets), k)
    )


def max_tour(routes):
    return max(route.total_distance_m for route in routes)


def check_cover(routes, targets):
    seen = []
    for route in routes:
        assert route.node_ids[0] == "depot" and route.node_ids[-1] == "depot"
        seen.extend(route.node_ids[1:-1])
    assert sorted(seen) == sorted(targets)


@pytest.mark.parametrize("count,k", [(5, 2), (6, 3), (7, 2), (8, 3)])
def test_exact_matches_brute_force_oracle(count, k):
    rng = random.Random(1000 * count + k)
    graph = make_graph(random_points(rng, count))
    targets = [f"t{i:02d}" for i in range(count)]
    routes = plan_multi_uav(graph, "depot", targets, k, method="exact")
    assert len(routes) == k
    check_cover(routes, targets)
    assert max_tour(routes) == pytest.approx(oracle_min_max(graph, targets, k), rel=1e-9)


def test_single_vehicle_is_optimal_tsp():
    rng = random.Random(7)
    graph = make_graph(random_points(rng, 7))
    targets = [f"t{i:02d}" for i in range(7)]
    [route] = plan_multi_uav(graph, "depot", targets, 1)
    distance = graph_distance(graph)
    assert route.total_distance_m == pytest.approx(
        best_tour_brute("depot", targets, distance), rel=1e-9
    )


def test_one_vehicle_per_target_gives_singletons():
    rng = random.Random(11)
    graph = make_graph(random_points(rng, 4))
    targets = [f"t{i:02d}" for i in range(4)]
    routes = plan_multi_uav(graph, "depot", targets, 4)
    assert [r.node_ids for r in routes] == [
        ("depot", "t00", "depot"),
        ("depot", "t01", "depot"),
        ("depot", "t02", "depot"),
        ("depot", "t03", "depot"),
    ]


@pytest.mark.parametrize("count,k", [(8, 2), (9, 3), (10, 4)])
def test_heuristic_within_ratio_of_exact(count, k):
    rng = random.Random(100 * count + k)
    graph = make_graph(random_points(rng, count))
    targets = [f"t{i:02d}" for i in range(count)]
    exact = plan_multi_uav(graph, "depot", targets, k, method="exact")
    heuristic = plan_multi_uav(graph, "depot", targets, k, method="heuristic")
    assert len(heuristic) == k
    check_cover(heuristic, targets)
    assert max_tour(heuristic) <= 1.3 * max_tour(exact) + 1e-9


def test_auto_switches_to_heuristic_above_limit():
    rng = random.Random(23)
    count = EXACT_TARGET_LIMIT + 5
    graph = make_graph(random_points(rng, count))
    targets = [f"t{i:02d}" for i in range(count)]
    routes = plan_multi_uav(graph, "depot", targets, 3)
    assert len(routes) == 3
    check_cover(routes, targets)
    # same call is deterministic
    again = plan_multi_uav(graph, "depot", targets, 3)
    assert [r.node_ids for r in again] == [r.node_ids for r in routes]


def test_tours_sorted_and_direction_canonical():
    rng = random.Random(31)
    graph = make_graph(random_points(rng, 6))
    targets = [f"t{i:02d}" for i in range(6)]
    routes = plan_multi_uav(graph, "depot", targets, 2)
    firsts = [r.node_ids[1] for r in routes]
    assert firsts == sorted(firsts)
    distance = graph_distance(graph)
    for route in routes:
        order = list(route.node_ids[1:-1])
        forward = tour_length("depot", order, distance)
        backward = tour_length("depot", list(reversed(order)), distance)
        assert forward <= backward


def test_validation_errors():
    rng = random.Random(3)
    graph = make_graph(random_points(rng, 3))
    targets = ["t00", "t01", "t02"]
    with pytest.raises(InvalidInputError):
        plan_multi_uav(graph, "depot", targets, 0)
    with pytest.raises(InvalidInputError):
        plan_multi_uav(graph, "depot", targets, 4)
    with pytest.raises(InvalidInputError):
        plan_multi_uav(graph, "depot", ["t00", "t00"], 1)
    with pytest.raises(InvalidInputError):
        plan_multi_uav(graph, "nope", targets, 1)
    with pytest.raises(InvalidInputError):
        plan_multi_uav(graph, "depot", ["t00", "ghost"], 1)
    with pytest.raises(InvalidInputError):
        plan_multi_uav(graph, "depot", targets, 1, method="magic")


def test_tour_annotation_uses_vehicle():
    rng = random.Random(5)
    graph = make_graph(random_points(rng, 3))
    vehicle = VehicleModel(cruise_speed_mps=20.0)
    [route] = plan_multi_uav(graph, "depot", ["t00", "t01", "t02"], 1, vehicle=vehicle)
    assert route.total_duration_s == pytest.approx(route.total_distance_m / 20.0, rel=1e-12)
    assert route.total_fuel_cost is None
