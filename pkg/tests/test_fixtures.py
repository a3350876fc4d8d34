"""Bundled catalogs stay loadable and keep the properties tests lean on."""

import pytest

from nelv.errors import InvalidInputError
from nelv.fixtures import FIXTURE_NAMES, fixture_manifest
from nelv.geodata import load_catalog
from nelv.geodesy import great_circle_distance
from nelv.graph import build_graph, candidate_nodes
from nelv.parsing import parse_instructions
from nelv.routing import LABEL_ORDER, RouteQuery, VehicleModel, enumerate_alternatives


@pytest.fixture(scope="module")
def catalogs():
    return {name: load_catalog(fixture_manifest(name)) for name in FIXTURE_NAMES}


def test_every_manifest_resolves():
    for name in FIXTURE_NAMES:
        assert fixture_manifest(name).is_file()
    with pytest.raises(InvalidInputError):
        fixture_manifest("uc9")


def test_us_inventory_counts(catalogs):
    catalog = catalogs["us"]
    prices = [a.fuel_price for a in catalog.airports if a.fuel_price is not None]
    assert len(catalog.airports) == 2577
    assert len(prices) == 2076
    assert min(prices) == 0.74
    assert max(prices) == 2.77


def test_us_purdue_row(catalogs):
    matches = [a for a in catalogs["us"].airports if "purdue" in a.name.lower()]
    assert [a.id for a in matches] == ["LAF"]
    headings = sorted(r.heading for r in matches[0].runways)
    assert headings == [50.0, 100.0]


def test_uc1_patrol_dialogue(catalogs):
    result = parse_instructions(
        ("Survey all forest cells near Purdue within 5 km.", "Use 5 drones."), catalogs["uc1"]
    )
    assert result.ready
    spec = result.spec
    assert spec.survey_category == "forest_cell"
    assert (spec.start_id, spec.end_id, spec.survey_center_id) == ("LAF", "LAF", "LAF")
    assert spec.fleet_size == 5
    assert spec.survey_radius_m == 5000.0
    assert len(candidate_nodes(spec, catalogs["uc1"])) == 26


def test_uc1_cells_inside_radius(catalogs):
    catalog = catalogs["uc1"]
    center = catalog.airport_by_id("LAF").location
    cells = [p for p in catalog.pois if p.category == "forest_cell"]
    assert len(cells) == 25
    assert all(great_circle_distance(center, c.location) < 5000.0 for c in cells)


def test_uc2_errand_dialogue(catalogs):
    result = parse_instructions(
        ("Fly from Purdue to Indianapolis.", "Visit a pharmacy and a supermarket on the way."),
        catalogs["uc2"],
    )
    assert result.ready
    assert (result.spec.start_id, result.spec.end_id) == ("LAF", "IND")
    assert result.spec.visit_categories == ("pharmacy", "supermarket")


def test_uc2_layers_present(catalogs):
    catalog = catalogs["uc2"]
    assert len(catalog.airspace_zones) == 2
    assert len(catalog.population_zones) == 2
    assert catalog.weather is not None
    assert catalog.weather.bands == ("low",)
    rated = [p for p in catalog.pois if p.category in ("pharmacy", "supermarket")]
    assert len(rated) == 6
    assert all(p.rating is not None and p.review_count for p in rated)


def test_uc3_corridor_dialogue(catalogs):
    result = parse_instructions(
        ("Fly from Relay Alpha to Relay Lima.", "Make it the cheapest."), catalogs["uc3"]
    )
    assert result.ready
    assert (result.spec.start_id, result.spec.end_id) == ("R01", "R12")
    assert result.spec.preference == "cheapest"


def test_uc3_alternatives_carry_all_labels(catalogs):
    catalog = catalogs["uc3"]
    max_leg = VehicleModel().max_leg_m()
    spec = parse_instructions(("Fly from Relay Alpha to Relay Lima.",), catalog).spec
    graph = build_graph(candidate_nodes(spec, catalog), range_limit=max_leg)
    routes = enumerate_alternatives(RouteQuery(graph, "R01", "R12"))
    labels = {label for route in routes for label in (route.label, *route.also_labels)}
    assert labels == set(LABEL_ORDER)
    assert routes[0].label == "balanced"
    assert len({route.node_ids for route in routes}) >= 3
    assert not any(route.fallback_direct for route in routes)
    for route in routes:
        assert all(leg.distance_m <= max_leg for leg in route.legs)
