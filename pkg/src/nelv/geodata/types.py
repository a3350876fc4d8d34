"""Domain types for the service-data catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..errors import IntegrityError, InvalidInputError
from ..geodesy import GeoPoint

PATTERN_SIDES = ("Left", "Right")
WEATHER_BANDS = ("low", "high")

# Raw per-cell parameters carried for each altitude band.
WEATHER_PARAMS = (
    "temperature_c",
    "relative_humidity",
    "cloud_mixing_ratio",
    "vertical_velocity",
    "cape",
    "wind_shear",
    "wind_u",
    "wind_v",
)

# Composite-risk normalization bounds. The raw indicators are kept on the
# grid so a different scoring scheme can be swapped in without reloading.
RISK_NORM = {
    "cloud_mixing_ratio": (0.0, 1.0),    # g/kg
    "relative_humidity": (50.0, 100.0),  # percent
    "cape": (0.0, 2500.0),               # J/kg
    "wind_shear": (0.0, 20.0),           # m/s per km
    "vertical_velocity": (0.0, 5.0),     # |m/s|
}
ICING_TEMP_RANGE_C = (-20.0, 0.0)
RISK_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)  # icing, convective, turbulence


@dataclass(frozen=True)
class Runway:
    end_a: GeoPoint
    end_b: GeoPoint
    heading: float
    pattern_side: str

    def __post_init__(self):
        if not 0.0 <= self.heading < 360.0:
            raise InvalidInputError(f"runway heading {self.heading} outside [0, 360)")
        if self.pattern_side not in PATTERN_SIDES:
            raise InvalidInputError(f"pattern side {self.pattern_side!r} not in {PATTERN_SIDES}")

    @property
    def center(self) -> GeoPoint:
        from ..geodesy import great_circle_distance, initial_bearing, destination_point

        d = great_circle_distance(self.end_a, self.end_b)
        if d == 0.0:
            return self.end_a
        return destination_point(self.end_a, d / 2.0, initial_bearing(self.end_a, self.end_b))


@dataclass(frozen=True)
class Airport:
    id: str
    name: str
    location: GeoPoint
    elevation: float
    runways: tuple[Runway, ...]
    fuel_price: float | None = None

    def __post_init__(self):
        if not self.runways:
            raise InvalidInputError(f"airport {self.id}: runway list must be non-empty")
        if self.fuel_price is not None and not self.fuel_price > 0.0:
            raise InvalidInputError(f"airport {self.id}: fuel price {self.fuel_price} must be > 0")


@dataclass(frozen=True)
class Poi:
    """Point of interest. A rating is only meaningful alongside reviews."""

    id: str
    name: str
    category: str
    location: GeoPoint
    rating: float | None = None
    review_count: int | None = None

    def __post_init__(self):
        if not self.category:
            raise InvalidInputError(f"poi {self.id}: category must be non-empty")
        if self.rating is not None:
            if not 0.0 <= self.rating <= 5.0:
                raise InvalidInputError(f"poi {self.id}: rating {self.rating} outside [0, 5]")
            if self.review_count is None or self.review_count < 1:
                raise InvalidInputError(f"poi {self.id}: rating requires review_count >= 1")
        if self.review_count is not None and self.review_count < 0:
            raise InvalidInputError(f"poi {self.id}: negative review_count")


def _normalize_ring(boundary) -> tuple[GeoPoint, ...]:
    ring = tuple(boundary)
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring = ring[:-1]
    if len(set(ring)) < 3:
        raise InvalidInputError("polygon needs at least 3 distinct vertices")
    _reject_self_intersection(ring)
    return ring


def _reject_self_intersection(ring: tuple[GeoPoint, ...]):
    # planar check in raw degrees; adequate for the zone sizes in scope
    n = len(ring)
    segs = [((ring[i].lon, ring[i].lat), (ring[(i + 1) % n].lon, ring[(i + 1) % n].lat)) for i in range(n)]

    def crosses(s1, s2):
        (x1, y1), (x2, y2) = s1
        (x3, y3), (x4, y4) = s2
        d1 = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
        d2 = (x2 - x1) * (y4 - y1) - (y2 - y1) * (x4 - x1)
        d3 = (x4 - x3) * (y1 - y3) - (y4 - y3) * (x1 - x3)
        d4 = (x4 - x3) * (y2 - y3) - (y4 - y3) * (x2 - x3)
        return d1 * d2 < 0 and d3 * d4 < 0

    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # adjacent around the wrap
            if crosses(segs[i], segs[j]):
                raise InvalidInputError("polygon boundary is self-intersecting")


@dataclass(frozen=True)
class AirspaceZone:
    id: str
    boundary: tuple[GeoPoint, ...]
    floor_alt: float
    ceiling_alt: float
    zone_class: str = "unclassified"

    def __post_init__(self):
        object.__setattr__(self, "boundary", _normalize_ring(self.boundary))
        if not self.floor_alt < self.ceiling_alt:
            raise InvalidInputError(
                f"zone {self.id}: floor {self.floor_alt} must be below ceiling {self.ceiling_alt}"
            )


@dataclass(frozen=True)
class PopulationZone:
    id: str
    boundary: tuple[GeoPoint, ...]
    density_weight: float

    def __post_init__(self):
        object.__setattr__(self, "boundary", _normalize_ring(self.boundary))
        if not (math.isfinite(self.density_weight) and self.density_weight >= 0.0):
            raise InvalidInputError(f"zone {self.id}: weight {self.density_weight} must be finite and >= 0")


def _minmax(values: np.ndarray, bounds: tuple[float, float]) -> np.ndarray:
    lo, hi = bounds
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


def composite_risk(params: Mapping[str, np.ndarray]) -> np.ndarray:
    """Scalar [0, 1] risk per cell from the raw band parameters.

    icing: cloud water in a sub-freezing, near-saturated layer;
    convective: available potential energy; turbulence: shear plus
    vertical motion. Each term is a min-max normalization over the
    documented bounds, combined with equal weights and clamped.
    """
    temp = params["temperature_c"]
    in_icing_band = (temp >= ICING_TEMP_RANGE_C[0]) & (temp <= ICING_TEMP_RANGE_C[1])
    icing = (
        _minmax(params["cloud_mixing_ratio"], RISK_NORM["cloud_mixing_ratio"])
        * _minmax(params["relative_humidity"], RISK_NORM["relative_humidity"])
        * in_icing_band.astype(float)
    )
    convective = _minmax(params["cape"], RISK_NORM["cape"])
    turbulence = 0.5 * _minmax(params["wind_shear"], RISK_NORM["wind_shear"]) + 0.5 * _minmax(
        np.abs(params["vertical_velocity"]), RISK_NORM["vertical_velocity"]
    )
    w_i, w_c, w_t = RISK_WEIGHTS
    return np.clip(w_i * icing + w_c * convective + w_t * turbulence, 0.0, 1.0)


@dataclass(frozen=True)
class WeatherGrid:
    """Regular lat/lon grid with per-band raw parameters and composite risk.

    Row 0 starts at the origin (south-west corner); cell (r, c) covers
    lat in [origin.lat + r*cell_deg, +1 cell) and the analogous lon span.
    """

    origin: GeoPoint
    cell_deg: float
    rows: int
    cols: int
    params: Mapping[str, Mapping[str, np.ndarray]]
    risk: Mapping[str, np.ndarray] = field(default=None)  # band -> rows×cols

    def __post_init__(self):
        if self.cell_deg <= 0.0 or self.rows < 1 or self.cols < 1:
            raise InvalidInputError("weather grid must have positive cell size and extent")
        bands = {}
        for band, values in self.params.items():
            if band not in WEATHER_BANDS:
                raise InvalidInputError(f"unknown weather band {band!r}")
            missing = [p for p in WEATHER_PARAMS if p not in values]
            if missing:
                raise InvalidInputError(f"band {band!r} missing parameters: {missing}")
            for name, arr in values.items():
                if arr.shape != (self.rows, self.cols):
                    raise InvalidInputError(
                        f"band {band!r} parameter {name!r} has shape {arr.shape}, "
                        f"expected {(self.rows, self.cols)}"
                    )
            bands[band] = MappingProxyType(dict(values))
        object.__setattr__(self, "params", MappingProxyType(bands))
        risk = {band: composite_risk(values) for band, values in bands.items()}
        object.__setattr__(self, "risk", MappingProxyType(risk))

    @property
    def bands(self) -> tuple[str, ...]:
        return tuple(self.params.keys())

    def cell_index(self, lat: float, lon: float) -> tuple[int, int]:
        row = math.floor((lat - self.origin.lat) / self.cell_deg)
        col = math.floor((lon - self.origin.lon) / self.cell_deg)
        return row, col

    def covers(self, lat, lon):
        """Whether points fall on the grid; works elementwise on arrays."""
        rows = np.floor((np.asarray(lat) - self.origin.lat) / self.cell_deg)
        cols = np.floor((np.asarray(lon) - self.origin.lon) / self.cell_deg)
        return (rows >= 0) & (rows < self.rows) & (cols >= 0) & (cols < self.cols)

    def risk_at(self, band: str, lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
        """Vectorized per-point risk lookup; callers must pre-check coverage."""
        rows = np.floor((lats - self.origin.lat) / self.cell_deg).astype(int)
        cols = np.floor((lons - self.origin.lon) / self.cell_deg).astype(int)
        return self.risk[band][rows, cols]


@dataclass(frozen=True)
class DataCatalog:
    airports: tuple[Airport, ...] = ()
    pois: tuple[Poi, ...] = ()
    airspace_zones: tuple[AirspaceZone, ...] = ()
    population_zones: tuple[PopulationZone, ...] = ()
    weather: WeatherGrid | None = None

    def __post_init__(self):
        for label, items in (
            ("airport", self.airports),
            ("poi", self.pois),
            ("airspace zone", self.airspace_zones),
            ("population zone", self.population_zones),
        ):
            seen = set()
            for item in items:
                if item.id in seen:
                    raise IntegrityError(f"duplicate {label} id {item.id!r}")
                seen.add(item.id)

    def airport_by_id(self, airport_id: str) -> Airport | None:
        for airport in self.airports:
            if airport.id == airport_id:
                return airport
        return None
