"""Service-data catalog: airports, POIs, airspace and population zones, weather."""

from .types import (
    Airport,
    AirspaceZone,
    DataCatalog,
    Poi,
    PopulationZone,
    Runway,
    WeatherGrid,
    WEATHER_PARAMS,
)
from .types import composite_risk
from .loaders import (
    CatalogSources,
    load_airports,
    load_airspace_zones,
    load_catalog,
    load_pois,
    load_population_zones,
    load_weather,
    read_manifest,
)
from .queries import (
    population_crossing_length,
    radius_search,
    restricted_crossing_length,
    weather_risk_along,
)

__all__ = [
    "Airport",
    "AirspaceZone",
    "CatalogSources",
    "DataCatalog",
    "Poi",
    "PopulationZone",
    "Runway",
    "WeatherGrid",
    "WEATHER_PARAMS",
    "composite_risk",
    "load_airports",
    "load_airspace_zones",
    "load_catalog",
    "load_pois",
    "load_population_zones",
    "load_weather",
    "read_manifest",
    "population_crossing_length",
    "radius_search",
    "restricted_crossing_length",
    "weather_risk_along",
]
