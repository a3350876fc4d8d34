"""Geometric queries against the catalog: radius search, zone crossings
and weather risk integrals along great-circle segments.

Crossing lengths are computed analytically: the segment and the zone
boundary are projected into a local equirectangular plane centred on the
segment midpoint (adequate below the ~1000 km leg lengths produced by
the planner), the inside portion is resolved to parametric t-intervals,
and interval length times geodesic length gives metres.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ..errors import CoverageError
from ..geodesy import EARTH_RADIUS_M, GeoPoint, Waypoint3D, great_circle_distance, normalize_lon
from .types import AirspaceZone, PopulationZone, WeatherGrid


def radius_search(items: Iterable, center: GeoPoint, radius_m: float) -> list[tuple[object, float]]:
    """Items (anything with a ``location``) within radius_m of center.

    Returns (item, distance_m) pairs sorted by distance, ties by id.
    """
    if not (math.isfinite(radius_m) and radius_m >= 0.0):
        raise ValueError(f"radius_m must be finite and non-negative, got {radius_m}")
    hits = []
    for item in items:
        d = great_circle_distance(item.location, center)
        if d <= radius_m:
            hits.append((item, d))
    hits.sort(key=lambda pair: (pair[1], pair[0].id))
    return hits


def _project(center: GeoPoint, points: Sequence[GeoPoint]) -> np.ndarray:
    """Local equirectangular coordinates (metres) of points around center."""
    scale = EARTH_RADIUS_M * math.cos(math.radians(center.lat))
    out = np.empty((len(points), 2))
    for i, p in enumerate(points):
        out[i, 0] = scale * math.radians(normalize_lon(p.lon - center.lon))
        out[i, 1] = EARTH_RADIUS_M * math.radians(p.lat - center.lat)
    return out


def _point_in_ring(x: float, y: float, ring: np.ndarray) -> bool:
    # Even-odd ray casting against a horizontal ray towards +x.
    inside = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x_cross > x:
                inside = not inside
    return inside


def _inside_intervals(a_xy: np.ndarray, b_xy: np.ndarray, ring: np.ndarray) -> list[tuple[float, float]]:
    """t-intervals of segment a->b (t in [0, 1]) lying inside the ring."""
    d = b_xy - a_xy
    cuts = {0.0, 1.0}
    n = len(ring)
    for i in range(n):
        p = ring[i]
        e = ring[(i + 1) % n] - p
        denom = d[0] * e[1] - d[1] * e[0]
        if denom == 0.0:
            continue  # parallel; overlap handled by the midpoint tests
        w = p - a_xy
        t = (w[0] * e[1] - w[1] * e[0]) / denom
        u = (w[0] * d[1] - w[1] * d[0]) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u < 1.0:
            cuts.add(t)
    knots = sorted(cuts)
    intervals = []
    for t0, t1 in zip(knots, knots[1:]):
        if t1 - t0 <= 0.0:
            continue
        tm = 0.5 * (t0 + t1)
        mid = a_xy + tm * d
        if _point_in_ring(mid[0], mid[1], ring):
            intervals.append((t0, t1))
    return intervals


def _altitude_interval(alt_a: float, alt_b: float, floor: float, ceiling: float) -> tuple[float, float] | None:
    """t-interval where linearly interpolated altitude stays in [floor, ceiling]."""
    lo, hi = 0.0, 1.0
    dalt = alt_b - alt_a
    if dalt == 0.0:
        return (0.0, 1.0) if floor <= alt_a <= ceiling else None
    t_floor = (floor - alt_a) / dalt
    t_ceiling = (ceiling - alt_a) / dalt
    t0, t1 = min(t_floor, t_ceiling), max(t_floor, t_ceiling)
    lo, hi = max(lo, t0), min(hi, t1)
    if hi <= lo:
        return None
    return (lo, hi)


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if not intervals:
        return []
    intervals.sort()
    merged = [list(intervals[0])]
    for t0, t1 in intervals[1:]:
        if t0 <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], t1)
        else:
            merged.append([t0, t1])
    return [(t0, t1) for t0, t1 in merged]


def _clip(interval: tuple[float, float], window: tuple[float, float]) -> tuple[float, float] | None:
    lo = max(interval[0], window[0])
    hi = min(interval[1], window[1])
    return (lo, hi) if hi > lo else None


def _segment_frame(a: GeoPoint, b: GeoPoint) -> tuple[GeoPoint, float]:
    length = great_circle_distance(a, b)
    center = GeoPoint(0.5 * (a.lat + b.lat), a.lon + 0.5 * normalize_lon(b.lon - a.lon))
    return center, length


def restricted_crossing_length(a: Waypoint3D, b: Waypoint3D, zones: Sequence[AirspaceZone]) -> float:
    """Metres of the segment inside any zone, horizontally and vertically.

    Overlapping zones are counted once (interval union). Altitudes are
    compared as given against the zone floor and ceiling.
    """
    center, length = _segment_frame(a.point, b.point)
    if length == 0.0 or not zones:
        return 0.0
    a_xy = _project(center, [a.point])[0]
    b_xy = _project(center, [b.point])[0]
    covered: list[tuple[float, float]] = []
    for zone in zones:
        window = _altitude_interval(a.alt, b.alt, zone.floor_alt, zone.ceiling_alt)
        if window is None:
            continue
        ring = _project(center, zone.boundary)
        for interval in _inside_intervals(a_xy, b_xy, ring):
            clipped = _clip(interval, window)
            if clipped is not None:
                covered.append(clipped)
    return length * sum(t1 - t0 for t0, t1 in _merge(covered))


def population_crossing_length(a: Waypoint3D, b: Waypoint3D, zones: Sequence[PopulationZone]) -> float:
    """Density-weighted metres over populated areas; altitude is ignored.

    Each zone contributes weight times its own crossing length, so the
    result is linear in the zone weights and overlaps accumulate.
    """
    center, length = _segment_frame(a.point, b.point)
    if length == 0.0 or not zones:
        return 0.0
    a_xy = _project(center, [a.point])[0]
    b_xy = _project(center, [b.point])[0]
    total = 0.0
    for zone in zones:
        ring = _project(center, zone.boundary)
        span = sum(t1 - t0 for t0, t1 in _inside_intervals(a_xy, b_xy, ring))
        total += zone.density_weight * span * length
    return total


def _unit_vectors(lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    lat_r = np.radians(lats)
    lon_r = np.radians(lons)
    cos_lat = np.cos(lat_r)
    return np.stack([cos_lat * np.cos(lon_r), cos_lat * np.sin(lon_r), np.sin(lat_r)], axis=-1)


def weather_risk_along(grid: WeatherGrid | None, band: str, a: Waypoint3D, b: Waypoint3D) -> float:
    """Integral of the risk field along the segment, in risk-metres.

    The segment is split into sub-segments of at most max(L/1024, 100 m)
    and the risk at each midpoint weighs its length. A sample outside the
    grid raises CoverageError naming the point.
    """
    length = great_circle_distance(a.point, b.point)
    if grid is None or length == 0.0:
        return 0.0
    step = max(length / 1024.0, 100.0)
    n = max(1, math.ceil(length / step))
    t = (np.arange(n) + 0.5) / n

    u_a = _unit_vectors(np.array(a.lat), np.array(a.lon))
    u_b = _unit_vectors(np.array(b.lat), np.array(b.lon))
    omega = math.atan2(float(np.linalg.norm(np.cross(u_a, u_b))), float(np.dot(u_a, u_b)))
    if omega < 1e-12:
        points = np.broadcast_to(u_a, (n, 3))
    else:
        w_a = np.sin((1.0 - t) * omega) / math.sin(omega)
        w_b = np.sin(t * omega) / math.sin(omega)
        points = w_a[:, None] * u_a[None, :] + w_b[:, None] * u_b[None, :]
        points = points / np.linalg.norm(points, axis=1, keepdims=True)
    lats = np.degrees(np.arcsin(np.clip(points[:, 2], -1.0, 1.0)))
    lons = np.degrees(np.arctan2(points[:, 1], points[:, 0]))

    outside = ~grid.covers(lats, lons)
    if np.any(outside):
        i = int(np.argmax(outside))
        raise CoverageError(
            f"weather grid does not cover sample point ({lats[i]:.6f}, {lons[i]:.6f}) "
            f"between ({a.lat:.6f}, {a.lon:.6f}) and ({b.lat:.6f}, {b.lon:.6f})"
        )
    risk = grid.risk_at(band, lats, lons)
    return float(np.sum(risk) * (length / n))
