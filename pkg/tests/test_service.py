"""HTTP endpoints: session lifecycle, stage gating, overlays, export."""

import json
import re

import pytest
from fastapi.testclient import TestClient

from nelv.mission_io import MISSION_HEADER
from nelv.service import create_app

FAST = {"seed": 11, "population": 4, "generations": 3}

UC2_TURNS = (
    "Fly from Purdue to Indianapolis.",
    "Visit a pharmacy and a supermarket on the way.",
)


@pytest.fixture(scope="module")
def uc2(tmp_path_factory):
    with TestClient(create_app("uc2", tmp_path_factory.mktemp("uc2-store"))) as client:
        yield client


@pytest.fixture(scope="module")
def uc1(tmp_path_factory):
    with TestClient(create_app("uc1", tmp_path_factory.mktemp("uc1-store"))) as client:
        yield client


@pytest.fixture(scope="module")
def uc3(tmp_path_factory):
    with TestClient(create_app("uc3", tmp_path_factory.mktemp("uc3-store"))) as client:
        yield client


def new_session(client) -> str:
    response = client.post("/sessions")
    assert response.status_code == 201
    body = response.json()
    assert body["stage"] == "parsed"
    return body["session_id"]


def say(client, session_id, text):
    response = client.post(f"/sessions/{session_id}/instructions", json={"text": text})
    assert response.status_code == 200, response.text
    return response.json()


def stage(client, session_id, name, **options):
    return client.post(f"/sessions/{session_id}/stages", json={"stage": name, "options": options})


def pathed_session(client) -> str:
    session_id = new_session(client)
    for turn in UC2_TURNS:
        say(client, session_id, turn)
    assert stage(client, session_id, "route").status_code == 200
    assert stage(client, session_id, "path", **FAST).status_code == 200
    return session_id


def test_create_and_fetch_session(uc2):
    session_id = new_session(uc2)
    assert re.fullmatch(r"[0-9a-f]{12}", session_id)
    record = uc2.get(f"/sessions/{session_id}")
    assert record.status_code == 200
    body = record.json()
    assert body["stage"] == "parsed" and body["conversation"] == []


def test_unknown_session_is_404(uc2):
    for response in (
        uc2.get("/sessions/feedfacecafe"),
        uc2.post("/sessions/feedfacecafe/instructions", json={"text": "hello"}),
        uc2.post("/sessions/feedfacecafe/stages", json={"stage": "route"}),
        uc2.get("/sessions/feedfacecafe/overlays/route"),
        uc2.get("/sessions/feedfacecafe/export"),
    ):
        assert response.status_code == 404
        assert response.json()["kind"] == "SessionNotFoundError"


def test_instructions_update_spec(uc2):
    session_id = new_session(uc2)
    first = say(uc2, session_id, UC2_TURNS[0])
    assert first["ready"] and first["spec"]["start_id"] == "LAF"
    second = say(uc2, session_id, UC2_TURNS[1])
    assert second["spec"]["visit_categories"] == ["pharmacy", "supermarket"]
    assert second["stage"] == "parsed"


def test_gibberish_lists_missing_fields(uc2):
    session_id = new_session(uc2)
    body = say(uc2, session_id, "qwerty asdf zxcv")
    assert not body["ready"]
    assert any("start" in prompt for prompt in body["missing"])
    assert any("land" in prompt for prompt in body["missing"])


def test_stage_order_violation_is_409(uc2):
    session_id = new_session(uc2)
    for turn in UC2_TURNS:
        say(uc2, session_id, turn)
    response = stage(uc2, session_id, "path")
    assert response.status_code == 409
    body = response.json()
    assert body["kind"] == "StageOrderError"
    assert body["error"] == "stage 'path' requires 'route' to complete first"


def test_full_stage_flow(uc2):
    session_id = new_session(uc2)
    for turn in UC2_TURNS:
        say(uc2, session_id, turn)

    routed = stage(uc2, session_id, "route")
    assert routed.status_code == 200
    body = routed.json()
    assert body["stage"] == "routed" and body["selected"] == "balanced"
    assert body["alternatives"] and body["alternatives"][0]["label"] == "balanced"
    assert re.fullmatch(r"\d+ nodes / \d+ edges", body["graph"])

    pathed = stage(uc2, session_id, "path", **FAST)
    assert pathed.status_code == 200
    body = pathed.json()
    assert body["path"]["waypoint_count"] > 2
    assert body["path"]["node_ids"][0] == "LAF"

    trajectoried = stage(uc2, session_id, "trajectory")
    assert trajectoried.status_code == 200
    kinds = trajectoried.json()["trajectory"]["kinds"]
    assert kinds[0] == "takeoff_circuit" and kinds[-1] == "landing_circuit"

    uploaded = stage(uc2, session_id, "upload")
    assert uploaded.status_code == 200 and uploaded.json()["uploaded"] is True

    frozen = uc2.post(f"/sessions/{session_id}/instructions", json={"text": "change of plans"})
    assert frozen.status_code == 409 and frozen.json()["kind"] == "SessionFrozenError"
    assert stage(uc2, session_id, "route").status_code == 409


def test_artifact_overlays_follow_stages(uc2):
    session_id = new_session(uc2)
    for turn in UC2_TURNS:
        say(uc2, session_id, turn)
    assert uc2.get(f"/sessions/{session_id}/overlays/route").status_code == 404
    assert uc2.get(f"/sessions/{session_id}/overlays/path").status_code == 404

    stage(uc2, session_id, "route")
    response = uc2.get(f"/sessions/{session_id}/overlays/route")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/geo+json")
    assert "ETag" in response.headers
    features = response.json()["features"]
    assert len(features) == 1 and features[0]["properties"]["kind"] == "route"

    stage(uc2, session_id, "path", **FAST)
    features = uc2.get(f"/sessions/{session_id}/overlays/path").json()["features"]
    assert len(features) == 1
    assert all(len(pos) == 3 for pos in features[0]["geometry"]["coordinates"])


def test_catalog_overlays(uc2):
    session_id = new_session(uc2)
    airspace = uc2.get(f"/sessions/{session_id}/overlays/airspace").json()
    assert [f["properties"]["id"] for f in airspace["features"]] == ["ind-class-c", "r-lebanon"]
    population = uc2.get(f"/sessions/{session_id}/overlays/population").json()
    assert len(population["features"]) == 2
    weather = uc2.get(f"/sessions/{session_id}/overlays/weather").json()
    assert len(weather["features"]) == 22 * 29
    assert uc2.get(f"/sessions/{session_id}/overlays/weather?band=high").status_code == 404
    assert uc2.get(f"/sessions/{session_id}/overlays/weather?band=mid").status_code == 400
    assert uc2.get(f"/sessions/{session_id}/overlays/terrain").status_code == 404


def test_weather_layer_without_grid_is_404(uc3):
    session_id = new_session(uc3)
    assert uc3.get(f"/sessions/{session_id}/overlays/weather").status_code == 404
    airspace = uc3.get(f"/sessions/{session_id}/overlays/airspace").json()
    assert airspace["features"] == []


def test_waypoint_revision_roundtrip(uc2):
    session_id = pathed_session(uc2)
    record = uc2.get(f"/sessions/{session_id}").json()
    waypoints = record["path"]["waypoints"]
    nodes = set(record["path"]["node_indices"])
    mobile = next(i for i in range(len(waypoints)) if i not in nodes)
    waypoints[mobile][2] += 50.0

    revised = stage(uc2, session_id, "path", waypoints=waypoints, **FAST)
    assert revised.status_code == 200, revised.text
    after = uc2.get(f"/sessions/{session_id}").json()
    assert after["path"]["waypoints"][mobile][2] == waypoints[mobile][2]

    waypoints[mobile][2] = 40_000.0
    rejected = stage(uc2, session_id, "path", waypoints=waypoints)
    assert rejected.status_code == 400
    assert "outside band" in rejected.json()["error"]


def test_bad_stage_requests(uc2):
    session_id = new_session(uc2)
    assert stage(uc2, session_id, "simulate").status_code == 400
    response = stage(uc2, session_id, "route", verbosity=3)
    assert response.status_code == 400 and "verbosity" in response.json()["error"]
    assert stage(uc2, session_id, "path", population="many").status_code == 400
    bad_wp = stage(uc2, session_id, "path", waypoints=[[1.0, 2.0]])
    assert bad_wp.status_code == 400


def test_fleet_route_overlay_draws_all_tours(uc1):
    session_id = new_session(uc1)
    say(uc1, session_id, "Survey all forest cells near Purdue within 5 km.")
    say(uc1, session_id, "Use 5 drones.")
    body = stage(uc1, session_id, "route").json()
    assert body["selected"] == "tour-1"
    assert [alt["label"] for alt in body["alternatives"]] == [f"tour-{i}" for i in range(1, 6)]
    features = uc1.get(f"/sessions/{session_id}/overlays/route").json()["features"]
    assert len(features) == 5
    assert {f["properties"]["label"] for f in features} == {f"tour-{i}" for i in range(1, 6)}


def test_route_preference_option(uc3):
    session_id = new_session(uc3)
    say(uc3, session_id, "Fly from Relay Alpha to Relay Lima.")
    body = stage(uc3, session_id, "route", preference="shortest").json()
    selected = next(a for a in body["alternatives"] if a["label"] == body["selected"])
    assert "shortest" in (selected["label"], *selected["also_labels"])
    labels = {l for a in body["alternatives"] for l in (a["label"], *a["also_labels"])}
    assert labels == {"balanced", "cheapest", "fastest", "shortest"}


def test_export_requires_trajectory_then_is_deterministic(uc2):
    session_id = pathed_session(uc2)
    blocked = uc2.get(f"/sessions/{session_id}/export")
    assert blocked.status_code == 409
    assert blocked.json()["error"] == "stage 'export' requires 'trajectory' to complete first"

    stage(uc2, session_id, "trajectory")
    first = uc2.get(f"/sessions/{session_id}/export")
    assert first.status_code == 200
    assert first.text.startswith(MISSION_HEADER)

    stage(uc2, session_id, "path", **FAST)
    stage(uc2, session_id, "trajectory")
    second = uc2.get(f"/sessions/{session_id}/export")
    assert second.content == first.content


def test_sessions_are_independent(uc2):
    a, b = new_session(uc2), new_session(uc2)
    say(uc2, a, UC2_TURNS[0])
    assert uc2.get(f"/sessions/{a}").json()["conversation"] == [UC2_TURNS[0]]
    assert uc2.get(f"/sessions/{b}").json()["conversation"] == []
