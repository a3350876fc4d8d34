"""Multi-vehicle coverage: split targets into depot-closed tours.

The objective is min-max tour length. Up to 10 targets the partition is
exact: closed-tour lengths for every target subset come from a
Held-Karp dynamic program and a subset DP picks the k-way split with
the smallest longest tour. Above that a sweep heuristic (sector by
bearing from the depot) is polished with 2-opt inside tours and
relocation between tours until neither improves.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

from .errors import InvalidInputError
from .geodesy import great_circle_distance, initial_bearing
from .graph import FlightGraph, VehicleModel
from .routing import Route, annotate_route

EXACT_TARGET_LIMIT = 10


def plan_multi_uav(
    graph: FlightGraph,
    depot: str,
    target_ids: Sequence[str],
    k: int,
    vehicle: VehicleModel | None = None,
    method: str = "auto",
) -> list[Route]:
    """k depot-closed tours covering every target exactly once.

    method: auto (exact up to 10 targets), exact, or heuristic.
    Tours come back sorted by their first target id; ordering inside a
    tour is the cheaper of the two directions, so results are stable.
    """
    targets = sorted(dict.fromkeys(target_ids))
    if len(targets) != len(tuple(target_ids)):
        raise InvalidInputError("duplicate target ids")
    if not graph.has_node(depot):
        raise InvalidInputError(f"depot {depot!r} is not a graph node")
    for target in targets:
        if not graph.has_node(target):
            raise InvalidInputError(f"target {target!r} is not a graph node")
    if k < 1 or k > len(targets):
        raise InvalidInputError(f"vehicle count {k} must be in [1, {len(targets)}]")
    if method not in ("auto", "exact", "heuristic"):
        raise InvalidInputError(f"unknown method {method!r}")
    vehicle = vehicle or VehicleModel()

    def distance(a: str, b: str) -> float:
        w = graph.edge_weight(a, b)
        if w is None:
            raise InvalidInputError(f"targets {a!r} and {b!r} are not connected in the graph")
        return w

    if method == "exact" or (method == "auto" and len(targets) <= EXACT_TARGET_LIMIT):
        orders = _exact_partition(depot, targets, k, distance)
    else:
        orders = _sweep_partition(graph, depot, targets, k, distance)
        orders = _improve(depot, orders, distance)
    orders = [_canonical_direction(depot, order, distance) for order in orders]
    orders.sort(key=lambda order: order[0])
    return [annotate_route(graph, (depot, *order, depot), vehicle) for order in orders]


def tour_length(depot: str, order: Sequence[str], distance) -> float:
    if not order:
        return 0.0
    total = distance(depot, order[0]) + distance(order[-1], depot)
    for a, b in itertools.pairwise(order):
        total += distance(a, b)
    return total


def _canonical_direction(depot: str, order: list[str], distance) -> list[str]:
    reverse = list(reversed(order))
    forward_len = tour_length(depot, order, distance)
    reverse_len = tour_length(depot, reverse, distance)
    if reverse_len < forward_len or (reverse_len == forward_len and reverse < order):
        return reverse
    return order


# Exact branch: Held-Karp closed tours per subset + min-max subset DP.

def _exact_partition(depot: str, targets: list[str], k: int, distance) -> list[list[str]]:
    n = len(targets)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def held_karp(mask: int) -> tuple[float, tuple[int, ...]]:
        """Best closed tour over the masked targets, anchored at the depot."""
        members = [i for i in range(n) if mask >> i & 1]
        # dp[(visited, last)] = (length, order)
        dp = {(1 << i, i): (distance(depot, targets[i]), (i,)) for i in members}
        for visited in sorted({m for m in range(1, mask + 1) if m & mask == m}, key=int.bit_count):
            for last in members:
                state = (visited, last)
                if state not in dp:
                    continue
                length, order = dp[state]
                for nxt in members:
                    if visited >> nxt & 1:
                        continue
                    candidate = (length + distance(targets[last], targets[nxt]), order + (nxt,))
                    nxt_state = (visited | 1 << nxt, nxt)
                    if nxt_state not in dp or candidate < dp[nxt_state]:
                        dp[nxt_state] = candidate
        best = min(
            (length + distance(targets[last], depot), order)
            for (visited, last), (length, order) in dp.items()
            if visited == mask
        )
        return best

    @lru_cache(maxsize=None)
    def split(mask: int, vehicles: int) -> tuple[float, tuple[int, ...]]:
        """(min-max length, chosen submask per vehicle) over the mask."""
        if vehicles == 1:
            return held_karp(mask)[0], (mask,)
        best: tuple[float, tuple[int, ...]] | None = None
        # iterate submasks containing the lowest set bit to avoid mirror splits
        low = mask & -mask
        sub = mask
        while sub:
            if sub & low and sub != mask:
                rest_count = (mask ^ sub).bit_count()
                if rest_count >= vehicles - 1:
                    here = held_karp(sub)[0]
                    rest, parts = split(mask ^ sub, vehicles - 1)
                    candidate = (max(here, rest), (sub, *parts))
                    if best is None or candidate < best:
                        best = candidate
            sub = (sub - 1) & mask
        return best

    _, parts = split(full, k)
    return [[targets[i] for i in held_karp(part)[1]] for part in parts]


# Heuristic branch: bearing sweep, then 2-opt and relocation passes.

def _signature(depot: str, orders: list[list[str]], distance) -> tuple[float, ...]:
    """Tour lengths sorted longest first; the lexicographic min-max order."""
    return tuple(sorted((tour_length(depot, order, distance) for order in orders), reverse=True))


def _sweep_partition(graph: FlightGraph, depot: str, targets: list[str], k: int, distance) -> list[list[str]]:
    """Split the bearing-sorted ring into k sectors, trying every boundary
    rotation (strided on large sets) and keeping the best post-2-opt split."""
    depot_point = graph.node(depot).location
    by_bearing = sorted(
        targets,
        key=lambda t: (initial_bearing(depot_point, graph.node(t).location), t),
    )
    n = len(by_bearing)
    best: tuple[tuple[float, ...], list[list[str]]] | None = None
    for rotation in range(0, n, max(1, n // 24)):
        ring = by_bearing[rotation:] + by_bearing[:rotation]
        groups = [
            _two_opt(depot, ring[round(i * n / k) : round((i + 1) * n / k)], distance)
            for i in range(k)
        ]
        candidate = (_signature(depot, groups, distance), groups)
        if best is None or candidate[0] < best[0]:
            best = candidate
    return best[1]


def _two_opt(depot: str, order: list[str], distance) -> list[str]:
    order = list(order)
    improved = True
    while improved:
        improved = False
        best_length = tour_length(depot, order, distance)
        for i in range(len(order) - 1):
            for j in range(i + 1, len(order)):
                candidate = order[:i] + order[i : j + 1][::-1] + order[j + 1 :]
                length = tour_length(depot, candidate, distance)
                if length < best_length - 1e-9:
                    order, best_length, improved = candidate, length, True
    return order


def _best_insertion(depot: str, order: list[str], target: str, distance) -> list[str]:
    best = None
    for position in range(len(order) + 1):
        candidate = order[:position] + [target] + order[position:]
        length = tour_length(depot, candidate, distance)
        if best is None or length < best[0]:
            best = (length, candidate)
    return best[1]


def _improve(depot: str, orders: list[list[str]], distance) -> list[list[str]]:
    """Relocate targets out of the longest tour while min-max shrinks."""

    def signature(current):
        return _signature(depot, current, distance)

    improved = True
    while improved:
        improved = False
        lengths = [tour_length(depot, order, distance) for order in orders]
        worst = max(range(len(orders)), key=lambda i: (lengths[i], i))
        for target in list(orders[worst]):
            for other in range(len(orders)):
                if other == worst:
                    continue
                trial = [list(order) for order in orders]
                trial[worst] = _two_opt(depot, [t for t in trial[worst] if t != target], distance)
                trial[other] = _two_opt(depot, _best_insertion(depot, trial[other], target, distance), distance)
                if trial[worst] and signature(trial) < signature(orders):
                    orders = trial
                    improved = True
                    break
            if improved:
                break
    return orders
