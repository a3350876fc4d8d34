"""File ingestion for the data catalog.

All formats are plain text and carry a format_version marker; a version
mismatch or unreadable file is fatal, while a malformed row is reported
with its line number and skipped.

- airports: CSV, first line ``# format_version: 1``, columns
  id,name,lat,lon,elev_m,fuel_price_per_l,runways. Runways are encoded
  ``latA:lonA:latB:lonB:heading:side`` joined with ``;``.
- POIs: JSON lines, first line ``{"format_version": 1}``, then one object
  per line with id/name/category/lat/lon and optional rating/review_count.
- airspace / population: GeoJSON FeatureCollection with a top-level
  format_version; polygon features carry floor_alt_m/ceiling_alt_m/class
  or density_weight properties.
- weather: ``key: value`` header (format_version, origin_lat, origin_lon,
  cell_deg, rows, cols, band) followed by one ``param: <name>`` block per
  raw parameter, each a rows×cols row-major numeric body.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError, InvalidInputError
from ..geodesy import GeoPoint
from .types import (
    Airport,
    AirspaceZone,
    DataCatalog,
    Poi,
    PopulationZone,
    Runway,
    WEATHER_PARAMS,
    WeatherGrid,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

AIRPORT_COLUMNS = ["id", "name", "lat", "lon", "elev_m", "fuel_price_per_l", "runways"]


@dataclass(frozen=True)
class CatalogSources:
    """Paths to the catalog input files; every entry is optional."""

    airports: Path | None = None
    pois: Path | None = None
    airspace: Path | None = None
    population: Path | None = None
    weather: tuple[Path, ...] = field(default_factory=tuple)


def read_manifest(path: str | Path) -> CatalogSources:
    """Read a catalog manifest (JSON object of file paths, relative to it)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"unreadable manifest: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}", path=str(path)) from exc
    _check_version(data.get("format_version"), str(path))
    base = path.parent

    def resolve(key) -> Path | None:
        value = data.get(key)
        return base / value if value else None

    weather = data.get("weather") or []
    if isinstance(weather, str):
        weather = [weather]
    return CatalogSources(
        airports=resolve("airports"),
        pois=resolve("pois"),
        airspace=resolve("airspace"),
        population=resolve("population"),
        weather=tuple(base / w for w in weather),
    )


def _check_version(version, path: str):
    if version != FORMAT_VERSION:
        raise FormatError(f"format_version {version!r} does not match {FORMAT_VERSION}", path=path)


def _read_lines(path: Path) -> list[str]:
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FormatError(f"unreadable file: {exc}", path=str(path)) from exc


def _parse_version_comment(line: str, path: str):
    text = line.lstrip("#").strip()
    key, _, value = text.partition(":")
    if key.strip() != "format_version":
        raise FormatError("missing format_version line", path=path, line=1)
    try:
        version = int(value)
    except ValueError:
        version = value.strip()
    _check_version(version, path)


def _parse_runways(encoded: str) -> tuple[Runway, ...]:
    runways = []
    for chunk in encoded.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 6:
            raise ValueError(f"runway entry {chunk!r} needs 6 fields")
        lat_a, lon_a, lat_b, lon_b, heading = map(float, parts[:5])
        runways.append(
            Runway(
                end_a=GeoPoint(lat_a, lon_a),
                end_b=GeoPoint(lat_b, lon_b),
                heading=heading,
                pattern_side=parts[5],
            )
        )
    return tuple(runways)


def load_airports(path: str | Path) -> tuple[list[Airport], list[str]]:
    path = Path(path)
    lines = _read_lines(path)
    if not lines:
        raise FormatError("empty airports file", path=str(path))
    _parse_version_comment(lines[0], str(path))

    airports: list[Airport] = []
    diagnostics: list[str] = []
    reader = csv.DictReader(lines[1:])
    if reader.fieldnames != AIRPORT_COLUMNS:
        raise FormatError(f"unexpected header {reader.fieldnames}", path=str(path), line=2)
    for offset, row in enumerate(reader):
        line_no = offset + 3  # version line + header
        try:
            price = row["fuel_price_per_l"].strip()
            airports.append(
                Airport(
                    id=row["id"].strip(),
                    name=row["name"].strip(),
                    location=GeoPoint(float(row["lat"]), float(row["lon"])),
                    elevation=float(row["elev_m"]),
                    runways=_parse_runways(row["runways"]),
                    fuel_price=float(price) if price else None,
                )
            )
        except (ValueError, TypeError, AttributeError, InvalidInputError) as exc:
            diagnostics.append(f"{path}:{line_no}: skipped airport row: {exc}")
    return airports, diagnostics


def load_pois(path: str | Path) -> tuple[list[Poi], list[str]]:
    path = Path(path)
    lines = _read_lines(path)
    if not lines:
        raise FormatError("empty poi file (expected a format_version line)", path=str(path))
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad header line: {exc}", path=str(path), line=1) from exc
    _check_version(header.get("format_version"), str(path))

    pois: list[Poi] = []
    diagnostics: list[str] = []
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rating = obj.get("rating")
            reviews = obj.get("review_count")
            pois.append(
                Poi(
                    id=str(obj["id"]),
                    name=str(obj.get("name", obj["id"])),
                    category=str(obj["category"]),
                    location=GeoPoint(float(obj["lat"]), float(obj["lon"])),
                    rating=float(rating) if rating is not None else None,
                    review_count=int(reviews) if reviews is not None else None,
                )
            )
        except (ValueError, TypeError, KeyError, InvalidInputError) as exc:
            diagnostics.append(f"{path}:{idx}: skipped poi row: {exc}")
    return pois, diagnostics


def _load_feature_collection(path: Path) -> list[dict]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"unreadable file: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}", path=str(path)) from exc
    _check_version(data.get("format_version"), str(path))
    if data.get("type") != "FeatureCollection":
        raise FormatError("expected a FeatureCollection", path=str(path))
    return data.get("features", [])


def _polygon_ring(feature: dict) -> tuple[GeoPoint, ...]:
    geometry = feature.get("geometry") or {}
    if geometry.get("type") != "Polygon":
        raise ValueError(f"unsupported geometry type {geometry.get('type')!r}")
    ring = geometry["coordinates"][0]
    return tuple(GeoPoint(lat, lon) for lon, lat in ring)


def load_airspace_zones(path: str | Path) -> tuple[list[AirspaceZone], list[str]]:
    path = Path(path)
    zones: list[AirspaceZone] = []
    diagnostics: list[str] = []
    for idx, feature in enumerate(_load_feature_collection(path)):
        try:
            props = feature.get("properties") or {}
            zones.append(
                AirspaceZone(
                    id=str(props.get("id", f"airspace-{idx}")),
                    boundary=_polygon_ring(feature),
                    floor_alt=float(props["floor_alt_m"]),
                    ceiling_alt=float(props["ceiling_alt_m"]),
                    zone_class=str(props.get("class", "unclassified")),
                )
            )
        except (ValueError, TypeError, KeyError, IndexError, InvalidInputError) as exc:
            diagnostics.append(f"{path}: skipped airspace feature {idx}: {exc}")
    return zones, diagnostics


def load_population_zones(path: str | Path) -> tuple[list[PopulationZone], list[str]]:
    path = Path(path)
    zones: list[PopulationZone] = []
    diagnostics: list[str] = []
    for idx, feature in enumerate(_load_feature_collection(path)):
        try:
            props = feature.get("properties") or {}
            zones.append(
                PopulationZone(
                    id=str(props.get("id", f"population-{idx}")),
                    boundary=_polygon_ring(feature),
                    density_weight=float(props["density_weight"]),
                )
            )
        except (ValueError, TypeError, KeyError, IndexError, InvalidInputError) as exc:
            diagnostics.append(f"{path}: skipped population feature {idx}: {exc}")
    return zones, diagnostics


def load_weather_band(path: str | Path) -> tuple[dict, str]:
    """Read one weather file; returns (header+arrays dict, band name)."""
    path = Path(path)
    lines = _read_lines(path)
    header: dict[str, str] = {}
    cursor = 0
    while cursor < len(lines):
        line = lines[cursor].strip()
        if not line or line.startswith("param:"):
            break
        key, sep, value = line.partition(":")
        if not sep:
            raise FormatError(f"bad header line {line!r}", path=str(path), line=cursor + 1)
        header[key.strip()] = value.strip()
        cursor += 1

    try:
        version = int(header.get("format_version", "0"))
    except ValueError:
        version = header.get("format_version")
    _check_version(version, str(path))
    try:
        origin = GeoPoint(float(header["origin_lat"]), float(header["origin_lon"]))
        cell_deg = float(header["cell_deg"])
        rows = int(header["rows"])
        cols = int(header["cols"])
        band = header["band"]
    except (KeyError, ValueError, InvalidInputError) as exc:
        raise FormatError(f"bad weather header: {exc}", path=str(path)) from exc

    params: dict[str, np.ndarray] = {}
    while cursor < len(lines):
        line = lines[cursor].strip()
        if not line:
            cursor += 1
            continue
        if not line.startswith("param:"):
            raise FormatError(f"expected 'param:' block, got {line!r}", path=str(path), line=cursor + 1)
        name = line.partition(":")[2].strip()
        body = lines[cursor + 1 : cursor + 1 + rows]
        if len(body) < rows:
            raise FormatError(f"parameter {name!r} body truncated", path=str(path), line=cursor + 1)
        try:
            arr = np.array([[float(x) for x in row.split()] for row in body])
        except ValueError as exc:
            raise FormatError(f"bad numeric body for {name!r}: {exc}", path=str(path), line=cursor + 2) from exc
        if arr.shape != (rows, cols):
            raise FormatError(
                f"parameter {name!r} is {arr.shape}, expected {(rows, cols)}", path=str(path), line=cursor + 2
            )
        params[name] = arr
        cursor += 1 + rows

    missing = [p for p in WEATHER_PARAMS if p not in params]
    if missing:
        raise FormatError(f"missing parameters {missing}", path=str(path))
    return {"origin": origin, "cell_deg": cell_deg, "rows": rows, "cols": cols, "params": params}, band


def load_weather(paths: tuple[Path, ...]) -> WeatherGrid | None:
    if not paths:
        return None
    bands: dict[str, dict[str, np.ndarray]] = {}
    geometry = None
    for path in paths:
        meta, band = load_weather_band(path)
        key = (meta["origin"], meta["cell_deg"], meta["rows"], meta["cols"])
        if geometry is None:
            geometry = key
        elif geometry != key:
            raise FormatError("weather band files disagree on grid geometry", path=str(path))
        if band in bands:
            raise FormatError(f"duplicate weather band {band!r}", path=str(path))
        bands[band] = meta["params"]
    origin, cell_deg, rows, cols = geometry
    return WeatherGrid(origin=origin, cell_deg=cell_deg, rows=rows, cols=cols, params=bands)


def load_catalog(sources: CatalogSources | str | Path) -> DataCatalog:
    """Load every configured source into an immutable catalog.

    Per-row problems are logged and the row is skipped; only unreadable
    files and format_version mismatches abort the load.
    """
    if not isinstance(sources, CatalogSources):
        sources = read_manifest(sources)

    airports: list[Airport] = []
    pois: list[Poi] = []
    airspace: list[AirspaceZone] = []
    population: list[PopulationZone] = []
    diagnostics: list[str] = []

    if sources.airports:
        airports, diag = load_airports(sources.airports)
        diagnostics += diag
    if sources.pois:
        pois, diag = load_pois(sources.pois)
        diagnostics += diag
    if sources.airspace:
        airspace, diag = load_airspace_zones(sources.airspace)
        diagnostics += diag
    if sources.population:
        population, diag = load_population_zones(sources.population)
        diagnostics += diag
    weather = load_weather(sources.weather)

    for message in diagnostics:
        log.warning("%s", message)
    priced = sum(1 for a in airports if a.fuel_price is not None)
    log.info(
        "catalog loaded: %d airports (%d priced), %d pois, %d airspace zones, "
        "%d population zones, weather bands: %s",
        len(airports), priced, len(pois), len(airspace), len(population),
        ",".join(weather.bands) if weather else "none",
    )
    return DataCatalog(
        airports=tuple(airports),
        pois=tuple(pois),
        airspace_zones=tuple(airspace),
        population_zones=tuple(population),
        weather=weather,
    )
