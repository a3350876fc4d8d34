#!/usr/bin/env python3
"""Regenerate the bundled catalog fixtures under src/nelv/fixtures/.

Every value comes from fixed-seed generators, so reruns rewrite the
same bytes. After writing, each catalog is reloaded and checked for
the properties the test suite leans on: the continental inventory's
airport and price counts, patrol cells inside the survey radius, a
ferry corridor whose alternatives carry all four preference labels,
and scripted dialogues that resolve against their own catalog.
"""

from __future__ import annotations

import csv
import json
import math
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from nelv.geodesy import GeoPoint, destination_point, great_circle_distance
from nelv.geodata import CatalogSources, load_catalog
from nelv.graph import build_graph, candidate_nodes
from nelv.parsing import parse_instructions
from nelv.routing import LABEL_ORDER, RouteQuery, VehicleModel, enumerate_alternatives

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "nelv" / "fixtures"

US_TOTAL = 2577
US_PRICED = 2076
PRICE_MIN = 0.74
PRICE_MAX = 2.77

LAF = {
    "id": "LAF",
    "name": "Purdue University Airport",
    "lat": 40.4123,
    "lon": -86.9369,
    "elev": 186.2,
    "price": 1.32,
    "runways": [(100.0, 2100.0, "Left"), (50.0, 1280.0, "Left")],
}
IND = {
    "id": "IND",
    "name": "Indianapolis International Airport",
    "lat": 39.7173,
    "lon": -86.2944,
    "elev": 243.5,
    "price": 1.05,
    "runways": [(50.0, 3400.0, "Left"), (140.0, 2250.0, "Right")],
}

NAME_FIRST = (
    "Cedar", "Maple", "Granite", "Prairie", "Juniper", "Willow", "Aspen", "Bluff",
    "Canyon", "Delta", "Eagle", "Falcon", "Harbor", "Hickory", "Laurel", "Mesa",
    "Osprey", "Pine", "Quarry", "Ridge", "Saddle", "Sierra", "Summit", "Tallgrass",
    "Timber", "Trace", "Vista", "Wagon", "Walnut", "Whitetail",
)
NAME_SECOND = (
    "Bend", "Bluff", "Creek", "Crossing", "Falls", "Flats", "Fork", "Gap", "Grove",
    "Heights", "Hollow", "Junction", "Lake", "Meadow", "Mills", "Plains", "Point",
    "Prairie", "Rapids", "Ridge", "Run", "Springs", "Station", "Valley", "View",
)
NAME_SUFFIX = ("Municipal Airport", "Regional Airport", "County Airport", "Field", "Airpark")


def runway_cell(lat: float, lon: float, heading: float, length_m: float, side: str) -> str:
    center = GeoPoint(lat, lon)
    a = destination_point(center, length_m / 2.0, (heading + 180.0) % 360.0)
    b = destination_point(center, length_m / 2.0, heading)
    return f"{a.lat:.6f}:{a.lon:.6f}:{b.lat:.6f}:{b.lon:.6f}:{heading:g}:{side}"


def airport_row(spec: dict) -> list[str]:
    runways = ";".join(
        runway_cell(spec["lat"], spec["lon"], heading, length, side)
        for heading, length, side in spec["runways"]
    )
    price = "" if spec["price"] is None else f"{spec['price']:.2f}"
    return [
        spec["id"],
        spec["name"],
        f"{spec['lat']:.6f}",
        f"{spec['lon']:.6f}",
        f"{spec['elev']:.1f}",
        price,
        runways,
    ]


def write_airports(path: Path, specs: list[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("# format_version: 1\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "name", "lat", "lon", "elev_m", "fuel_price_per_l", "runways"])
        for spec in specs:
            writer.writerow(airport_row(spec))


def write_pois(path: Path, pois: list[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write('{"format_version": 1}\n')
        for poi in pois:
            fh.write(json.dumps(poi, sort_keys=True) + "\n")


def write_zones(path: Path, zones: list[dict]):
    features = []
    for zone in zones:
        ring = [[round(lon, 6), round(lat, 6)] for lat, lon in zone["ring"]]
        ring.append(ring[0])
        features.append(
            {
                "type": "Feature",
                "properties": zone["properties"],
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }
        )
    data = {"type": "FeatureCollection", "format_version": 1, "features": features}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def write_manifest(path: Path, entries: dict):
    data = {"format_version": 1, **entries}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def circle_ring(center_lat: float, center_lon: float, radius_m: float, vertices: int) -> list[tuple[float, float]]:
    dlat = radius_m / 111_000.0
    dlon = dlat / math.cos(math.radians(center_lat))
    ring = []
    for i in range(vertices):
        theta = 2.0 * math.pi * i / vertices
        ring.append((center_lat + dlat * math.sin(theta), center_lon + dlon * math.cos(theta)))
    return ring


def box_ring(south: float, west: float, north: float, east: float) -> list[tuple[float, float]]:
    return [(south, west), (south, east), (north, east), (north, west)]


# --- continental inventory ------------------------------------------------


def synth_name(rng: random.Random, taken: set[str]) -> str:
    while True:
        name = f"{rng.choice(NAME_FIRST)} {rng.choice(NAME_SECOND)} {rng.choice(NAME_SUFFIX)}"
        key = name.lower()
        if key not in taken and "purdue" not in key and "indianapolis" not in key:
            taken.add(key)
            return name


def gen_us():
    rng = random.Random(7001)
    taken = {LAF["name"].lower(), IND["name"].lower()}
    count = US_TOTAL - 2
    unpriced = set(rng.sample(range(count), US_TOTAL - US_PRICED))
    priced_order = [i for i in range(count) if i not in unpriced]
    floor_at, ceil_at = priced_order[411], priced_order[1200]
    specs = [LAF, IND]
    for i in range(count):
        if i in unpriced:
            price = None
        elif i == floor_at:
            price = PRICE_MIN
        elif i == ceil_at:
            price = PRICE_MAX
        else:
            price = round(rng.uniform(PRICE_MIN + 0.01, PRICE_MAX - 0.01), 2)
        heading = float(rng.randrange(0, 360, 5))
        specs.append(
            {
                "id": f"AP{i + 1:04d}",
                "name": synth_name(rng, taken),
                "lat": round(rng.uniform(25.5, 48.5), 6),
                "lon": round(rng.uniform(-123.5, -68.0), 6),
                "elev": round(rng.uniform(0.0, 2600.0), 1),
                "price": price,
                "runways": [(heading, float(rng.randrange(600, 3000, 50)), rng.choice(("Left", "Right")))],
            }
        )
    write_airports(FIXTURES / "us" / "airports.csv", specs)
    write_manifest(FIXTURES / "us" / "manifest.json", {"airports": "airports.csv"})


def check_us():
    started = time.perf_counter()
    catalog = load_catalog(FIXTURES / "us" / "manifest.json")
    elapsed = time.perf_counter() - started
    prices = [a.fuel_price for a in catalog.airports if a.fuel_price is not None]
    assert len(catalog.airports) == US_TOTAL, len(catalog.airports)
    assert len(prices) == US_PRICED, len(prices)
    assert min(prices) == PRICE_MIN and max(prices) == PRICE_MAX
    purdue = [a for a in catalog.airports if "purdue" in a.name.lower()]
    assert [a.id for a in purdue] == ["LAF"] and len(purdue[0].runways) == 2
    print(f"us: {len(catalog.airports)} airports, {len(prices)} priced, loaded in {elapsed:.2f}s")


# --- uc1: fleet patrol over forest cells ----------------------------------

UC1_SCRIPT = (
    "Survey all forest cells near Purdue within 5 km.",
    "Use 5 drones.",
)


def gen_uc1():
    base = destination_point(GeoPoint(LAF["lat"], LAF["lon"]), 2500.0, 270.0)
    steps = (-1800.0, -900.0, 0.0, 900.0, 1800.0)
    pois = []
    for r, north in enumerate(steps):
        for c, east in enumerate(steps):
            point = base
            if north:
                point = destination_point(point, abs(north), 0.0 if north > 0 else 180.0)
            if east:
                point = destination_point(point, abs(east), 90.0 if east > 0 else 270.0)
            index = r * len(steps) + c + 1
            pois.append(
                {
                    "id": f"fc-{index:02d}",
                    "name": f"Forest cell {index:02d}",
                    "category": "forest_cell",
                    "lat": round(point.lat, 6),
                    "lon": round(point.lon, 6),
                }
            )
    write_airports(FIXTURES / "uc1" / "airports.csv", [LAF])
    write_pois(FIXTURES / "uc1" / "pois.jsonl", pois)
    write_manifest(FIXTURES / "uc1" / "manifest.json", {"airports": "airports.csv", "pois": "pois.jsonl"})


def check_uc1():
    catalog = load_catalog(FIXTURES / "uc1" / "manifest.json")
    result = parse_instructions(UC1_SCRIPT, catalog)
    assert result.ready, result.missing
    spec = result.spec
    assert spec.survey_category == "forest_cell" and spec.survey_center_id == "LAF"
    assert spec.start_id == "LAF" and spec.end_id == "LAF"
    assert spec.fleet_size == 5 and spec.survey_radius_m == 5000.0
    center = catalog.airport_by_id("LAF").location
    cells = [p for p in catalog.pois if p.category == "forest_cell"]
    assert len(cells) == 25
    worst = max(great_circle_distance(center, p.location) for p in cells)
    assert worst < 5000.0, worst
    nodes = candidate_nodes(spec, catalog)
    assert len(nodes) == 26, len(nodes)
    print(f"uc1: 25 cells, max offset {worst:.0f} m, graph nodes {len(nodes)}")


# --- uc2: errand flight with zones and weather ----------------------------

UC2_SCRIPT = (
    "Fly from Purdue to Indianapolis.",
    "Visit a pharmacy and a supermarket on the way.",
)

UC2_AIRPORTS = [
    LAF,
    IND,
    {
        "id": "TYQ",
        "name": "Zionsville Executive Airport",
        "lat": 40.0309,
        "lon": -86.2514,
        "elev": 262.1,
        "price": 0.98,
        "runways": [(180.0, 1680.0, "Left")],
    },
    {
        "id": "HFY",
        "name": "Indy South Greenwood Airport",
        "lat": 39.6284,
        "lon": -86.0881,
        "elev": 250.3,
        "price": 1.65,
        "runways": [(10.0, 1250.0, "Right")],
    },
]

UC2_POIS = [
    {"id": "ph-laf", "name": "Wabash Corner Pharmacy", "category": "pharmacy",
     "lat": 40.4015, "lon": -86.8702, "rating": 4.2, "review_count": 120},
    {"id": "ph-leb", "name": "Lebanon Square Pharmacy", "category": "pharmacy",
     "lat": 40.0481, "lon": -86.4692, "rating": 4.6, "review_count": 85},
    {"id": "ph-ind", "name": "Speedway Pharmacy", "category": "pharmacy",
     "lat": 39.7931, "lon": -86.2570, "rating": 3.9, "review_count": 310},
    {"id": "sm-laf", "name": "Sagamore Supermarket", "category": "supermarket",
     "lat": 40.3856, "lon": -86.8611, "rating": 4.4, "review_count": 210},
    {"id": "sm-zio", "name": "Zionsville Market", "category": "supermarket",
     "lat": 39.9509, "lon": -86.2710, "rating": 4.1, "review_count": 95},
    {"id": "sm-ind", "name": "White River Supermarket", "category": "supermarket",
     "lat": 39.7642, "lon": -86.3328, "rating": 4.7, "review_count": 400},
]


def gen_uc2_weather(path: Path):
    rng = random.Random(7203)
    # wide margins: path optimization samples candidate waypoints well
    # outside the corridor, and uncovered samples abort the scoring
    rows, cols = 22, 29
    origin_lat, origin_lon, cell = 38.95, -88.05, 0.1
    pocket_r, pocket_c = 11, 15

    def bump(r: int, c: int) -> float:
        return math.exp(-((r - pocket_r) ** 2 + (c - pocket_c) ** 2) / (2.0 * 1.3**2))

    def field(base: float, swing: float, jitter: float, cap: float | None = None):
        grid = []
        for r in range(rows):
            line = []
            for c in range(cols):
                value = base + swing * bump(r, c) + rng.uniform(-jitter, jitter)
                if cap is not None:
                    value = min(value, cap)
                line.append(f"{value:.2f}")
            grid.append(" ".join(line))
        return grid

    params = {
        "temperature_c": field(21.0, 3.0, 1.5),
        "relative_humidity": field(58.0, 24.0, 4.0, cap=96.0),
        "cloud_mixing_ratio": field(0.08, 0.55, 0.03),
        "vertical_velocity": field(0.3, 2.4, 0.1),
        "cape": field(150.0, 1900.0, 60.0),
        "wind_shear": field(3.0, 9.0, 0.8),
        "wind_u": field(4.0, 0.0, 1.5),
        "wind_v": field(1.0, 0.0, 1.2),
    }
    lines = [
        "format_version: 1",
        f"origin_lat: {origin_lat}",
        f"origin_lon: {origin_lon}",
        f"cell_deg: {cell}",
        f"rows: {rows}",
        f"cols: {cols}",
        "band: low",
    ]
    for name, grid in params.items():
        lines.append(f"param: {name}")
        lines.extend(grid)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def gen_uc2():
    write_airports(FIXTURES / "uc2" / "airports.csv", UC2_AIRPORTS)
    write_pois(FIXTURES / "uc2" / "pois.jsonl", UC2_POIS)
    write_zones(
        FIXTURES / "uc2" / "airspace.json",
        [
            {
                "ring": circle_ring(39.75, -86.28, 7000.0, 8),
                "properties": {"id": "ind-class-c", "class": "C", "floor_alt_m": 0.0, "ceiling_alt_m": 1200.0},
            },
            {
                "ring": box_ring(40.02, -86.52, 40.08, -86.42),
                "properties": {"id": "r-lebanon", "class": "R", "floor_alt_m": 0.0, "ceiling_alt_m": 3000.0},
            },
        ],
    )
    write_zones(
        FIXTURES / "uc2" / "population.json",
        [
            {
                "ring": box_ring(39.85, -86.55, 40.00, -86.30),
                "properties": {"id": "north-suburbs", "density_weight": 0.8},
            },
            {
                "ring": box_ring(40.10, -86.90, 40.30, -86.70),
                "properties": {"id": "wabash-towns", "density_weight": 0.25},
            },
        ],
    )
    gen_uc2_weather(FIXTURES / "uc2" / "weather_low.txt")
    write_manifest(
        FIXTURES / "uc2" / "manifest.json",
        {
            "airports": "airports.csv",
            "pois": "pois.jsonl",
            "airspace": "airspace.json",
            "population": "population.json",
            "weather": ["weather_low.txt"],
        },
    )


def check_uc2():
    catalog = load_catalog(FIXTURES / "uc2" / "manifest.json")
    result = parse_instructions(UC2_SCRIPT, catalog)
    assert result.ready, result.missing
    spec = result.spec
    assert spec.start_id == "LAF" and spec.end_id == "IND"
    assert spec.visit_categories == ("pharmacy", "supermarket")
    assert len(catalog.airspace_zones) == 2 and len(catalog.population_zones) == 2
    assert catalog.weather is not None and catalog.weather.bands == ("low",)
    nodes = candidate_nodes(spec, catalog)
    graph = build_graph(nodes, range_limit=VehicleModel().max_leg_m())
    routes = enumerate_alternatives(
        RouteQuery(graph, spec.start_id, spec.end_id, required_types=("poi:pharmacy", "poi:supermarket"))
    )
    assert routes and routes[0].label == "balanced"
    print(f"uc2: graph nodes {len(nodes)}, alternatives {[r.label for r in routes]}")


# --- uc3: long ferry corridor ----------------------------------------------

UC3_SCRIPT = (
    "Fly from Relay Alpha to Relay Lima.",
    "Make it the cheapest.",
)

UC3_WORDS = (
    "Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot",
    "Golf", "Hotel", "India", "Juliett", "Kilo", "Lima",
)
# slot, lateral offset in degrees latitude, fuel price
UC3_PLAN = [
    (0, 0.0, 1.60), (1, 1.0, 0.78), (2, 0.0, 2.35), (3, -0.32, 1.20),
    (4, 0.0, 2.40), (5, 1.0, 0.75), (6, 0.0, 2.30), (7, 0.32, 1.15),
    (8, 0.0, 2.45), (9, -1.0, 0.76), (10, 0.0, 2.30), (11, 0.0, 1.60),
]


def gen_uc3():
    rng = random.Random(7301)
    specs = []
    for index, (slot, offset, price) in enumerate(UC3_PLAN):
        jitter = rng.uniform(-0.05, 0.05) if offset == 0.0 and 0 < slot < 11 else 0.0
        heading = float(rng.randrange(0, 360, 10))
        specs.append(
            {
                "id": f"R{index + 1:02d}",
                "name": f"Relay {UC3_WORDS[index]} Airport",
                "lat": round(38.0 + offset + jitter, 6),
                "lon": round(-119.8 + 4.82 * slot, 6),
                "elev": round(rng.uniform(100.0, 1600.0), 1),
                "price": price,
                "runways": [(heading, float(rng.randrange(1200, 3200, 100)), rng.choice(("Left", "Right")))],
            }
        )
    write_airports(FIXTURES / "uc3" / "airports.csv", specs)
    write_manifest(FIXTURES / "uc3" / "manifest.json", {"airports": "airports.csv"})


def check_uc3():
    catalog = load_catalog(FIXTURES / "uc3" / "manifest.json")
    result = parse_instructions(UC3_SCRIPT, catalog)
    assert result.ready, result.missing
    spec = result.spec
    assert spec.start_id == "R01" and spec.end_id == "R12" and spec.preference == "cheapest"
    max_leg = VehicleModel().max_leg_m()
    nodes = candidate_nodes(spec, catalog)
    graph = build_graph(nodes, range_limit=max_leg)
    routes = enumerate_alternatives(RouteQuery(graph, spec.start_id, spec.end_id))
    labels = {label for route in routes for label in (route.label, *route.also_labels)}
    assert labels == set(LABEL_ORDER), labels
    assert routes[0].label == "balanced"
    assert not any(route.fallback_direct for route in routes)
    sequences = {route.node_ids for route in routes}
    assert len(sequences) >= 3, sequences
    for route in routes:
        assert all(leg.distance_m <= max_leg for leg in route.legs)
    print(f"uc3: {len(routes)} alternatives")
    for route in routes:
        cost = "-" if route.total_fuel_cost is None else f"{route.total_fuel_cost:.0f}"
        print(
            f"  {route.label:<9} also={','.join(route.also_labels) or '-':<17}"
            f" {'>'.join(route.node_ids)}  {route.total_distance_m / 1000.0:.0f} km  cost {cost}"
        )


def main():
    gen_us()
    gen_uc1()
    gen_uc2()
    gen_uc3()
    check_us()
    check_uc1()
    check_uc2()
    check_uc3()
    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    main()
