"""Spherical-earth geometry primitives.

All public functions take and return angles in degrees; radians are used
internally. Longitudes are normalized to the canonical interval (-180, 180].
The sphere radius is fixed at 6.371e6 m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidInputError

EARTH_RADIUS_M = 6.371e6

# Beyond this latitude the longitude update of the direct problem degenerates;
# atan2(0, 0) == 0 keeps results deterministic there.
POLE_LAT_DEG = 89.999


def normalize_lon(lon: float) -> float:
    """Map a longitude to (-180, 180]."""
    return 180.0 - ((180.0 - lon) % 360.0)


@dataclass(frozen=True, order=True)
class GeoPoint:
    """Latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvalidInputError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidInputError(f"latitude {self.lat} outside [-90, 90]")
        object.__setattr__(self, "lon", normalize_lon(self.lon))


@dataclass(frozen=True)
class Waypoint3D:
    """A GeoPoint with an altitude in meters (AMSL unless agl is set)."""

    point: GeoPoint
    alt: float
    agl: bool = field(default=False)

    def __post_init__(self):
        if not math.isfinite(self.alt) or self.alt < 0.0:
            raise InvalidInputError(f"altitude {self.alt} must be finite and >= 0")

    @property
    def lat(self) -> float:
        return self.point.lat

    @property
    def lon(self) -> float:
        return self.point.lon


def great_circle_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine distance between two points, in meters."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def angular_distance(d: float) -> float:
    """Distance in meters over the sphere radius, in radians."""
    if not math.isfinite(d) or d < 0.0:
        raise InvalidInputError(f"distance {d} must be finite and >= 0")
    return d / EARTH_RADIUS_M


def destination_point(origin: GeoPoint, d: float, bearing: float) -> GeoPoint:
    """Solve the spherical direct problem: travel d meters on the given bearing."""
    if not math.isfinite(bearing):
        raise InvalidInputError(f"non-finite bearing {bearing}")
    delta = angular_distance(d)
    theta = math.radians(bearing % 360.0)
    lat1 = math.radians(origin.lat)
    lon1 = math.radians(origin.lon)

    sin_lat2 = math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    lat2 = math.asin(max(-1.0, min(1.0, sin_lat2)))
    y = math.sin(theta) * math.sin(delta) * math.cos(lat1)
    x = math.cos(delta) - math.sin(lat1) * math.sin(lat2)
    # At the poles both arguments vanish; atan2(0, 0) == 0 keeps the longitude.
    lon2 = lon1 + math.atan2(y, x)
    return GeoPoint(math.degrees(lat2), math.degrees(lon2))


def initial_bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Forward azimuth from a toward b, in [0, 360)."""
    if a == b:
        raise InvalidInputError(f"bearing undefined for coincident points {a}")
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlon = math.radians(b.lon - a.lon)
    y = math.sin(dlon) * math.cos(lat2)
    x = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return math.degrees(math.atan2(y, x)) % 360.0


def intermediate_point(a: GeoPoint, b: GeoPoint, fraction: float) -> GeoPoint:
    """Point at the given fraction of the great-circle arc from a to b."""
    if not 0.0 <= fraction <= 1.0:
        raise InvalidInputError(f"fraction {fraction} outside [0, 1]")
    if a == b or fraction == 0.0:
        return a
    if fraction == 1.0:
        return b
    d = great_circle_distance(a, b)
    return destination_point(a, fraction * d, initial_bearing(a, b))
