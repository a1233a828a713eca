from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from publoop.service import create_app

TINY_YAML = """\
name: svc
seed: 5
horizon: 20
world:
  n_authors: 60
  n_human_reviewers: 24
  n_ai_reviewers: 6
  p_sub: 0.1
  keyword_universe_size: 12
pipeline:
  max_reviews_per_timestep: 24
"""


@pytest.fixture
def harness(tmp_path):
    scen_dir = tmp_path / "scenarios"
    scen_dir.mkdir()
    (scen_dir / "svc.yaml").write_text(TINY_YAML)
    root = tmp_path / "sessions"
    app = create_app(scenario_dir=scen_dir, sessions_root=root)
    with TestClient(app) as client:
        yield client, root


def _create(client, **kwargs) -> dict:
    resp = client.post("/sessions", json=kwargs)
    assert resp.status_code == 200, resp.text
    return resp.json()


def test_create_resolves_bare_name(harness):
    client, root = harness
    view = _create(client, scenario="svc", seed=3)
    assert view["session_id"] == "s0001"
    assert view["t"] == 0
    assert view["status"] == "paused"
    assert view["config"]["seed"] == 3
    assert view["config"]["name"] == "svc"
    assert (root / "s0001" / "events.jsonl").exists()


def test_create_with_overrides(harness):
    client, _ = harness
    view = _create(client, scenario="svc",
                   overrides={"horizon": 7, "world.p_sub": 0.2})
    assert view["horizon"] == 7
    assert view["config"]["world"]["p_sub"] == 0.2


def test_create_unknown_scenario_422(harness):
    client, _ = harness
    resp = client.post("/sessions", json={"scenario": "ghost"})
    assert resp.status_code == 422
    assert "ghost" in resp.json()["detail"]


def test_create_bad_override_422(harness):
    client, _ = harness
    resp = client.post("/sessions", json={"scenario": "svc",
                                          "overrides": {"world.p_pub": 0.5}})
    assert resp.status_code == 422


def test_unknown_session_404(harness):
    client, _ = harness
    assert client.post("/sessions/s9999/advance", json={}).status_code == 404
    assert client.get("/sessions/s9999/metrics").status_code == 404
    assert client.get("/sessions/s9999/summary").status_code == 404


def test_advance_steps_and_policy_shape(harness):
    client, _ = harness
    sid = _create(client, scenario="svc")["session_id"]
    body = client.post(f"/sessions/{sid}/advance", json={"steps": 5}).json()
    assert body["t"] == 5
    assert body["finished"] is False
    assert len(body["snapshots"]) == 5
    assert set(body["policy"]) == {"tau", "rho_ai", "escalation_enabled"}
    assert body["snapshots"][0]["t"] == 0


def test_advance_clamps_and_finalizes(harness):
    client, root = harness
    sid = _create(client, scenario="svc")["session_id"]
    body = client.post(f"/sessions/{sid}/advance", json={"steps": 99}).json()
    assert body["t"] == 20
    assert body["finished"] is True
    assert len(body["snapshots"]) == 20
    assert (root / sid / "summary.json").exists()
    again = client.post(f"/sessions/{sid}/advance", json={"steps": 1})
    assert again.status_code == 409
    noop = client.post(f"/sessions/{sid}/advance", json={"steps": 0})
    assert noop.status_code == 200


def test_inject_appends_window_and_event(harness):
    client, _ = harness
    sid = _create(client, scenario="svc")["session_id"]
    client.post(f"/sessions/{sid}/advance", json={"steps": 4})
    resp = client.post(f"/sessions/{sid}/inject",
                       json={"path": "noise_multiplier", "value": 3.0,
                             "duration": 5})
    assert resp.status_code == 200
    body = resp.json()
    assert body["window"] == {"start": 4, "end": 9,
                              "path": "noise_multiplier", "value": 3.0}
    events = client.get(f"/sessions/{sid}/events",
                        params={"since_seq": body["event_seq"]}).json()["events"]
    assert events[0]["kind"] == "run_meta"
    assert events[0]["payload"]["injected"]["path"] == "noise_multiplier"


def test_inject_duration_clamps_to_horizon(harness):
    client, _ = harness
    sid = _create(client, scenario="svc")["session_id"]
    client.post(f"/sessions/{sid}/advance", json={"steps": 18})
    body = client.post(f"/sessions/{sid}/inject",
                       json={"path": "arrival_multiplier", "value": 2.0,
                             "duration": 50}).json()
    assert body["window"]["end"] == 20


def test_inject_bad_path_422_finished_409(harness):
    client, _ = harness
    sid = _create(client, scenario="svc")["session_id"]
    bad = client.post(f"/sessions/{sid}/inject",
                      json={"path": "world.p_sub", "value": 0.5})
    assert bad.status_code == 422
    client.post(f"/sessions/{sid}/advance", json={"steps": 99})
    late = client.post(f"/sessions/{sid}/inject",
                       json={"path": "noise_multiplier", "value": 2.0})
    assert late.status_code == 409


def test_inject_changes_future_only(harness):
    client, _ = harness
    a = _create(client, scenario="svc")["session_id"]
    b = _create(client, scenario="svc")["session_id"]
    client.post(f"/sessions/{a}/advance", json={"steps": 10})
    client.post(f"/sessions/{b}/advance", json={"steps": 10})
    client.post(f"/sessions/{b}/inject",
                json={"path": "noise_multiplier", "value": 8.0})
    client.post(f"/sessions/{a}/advance", json={"steps": 10})
    client.post(f"/sessions/{b}/advance", json={"steps": 10})
    rows_a = client.get(f"/sessions/{a}/metrics").json()["rows"]
    rows_b = client.get(f"/sessions/{b}/metrics").json()["rows"]
    assert rows_a[:10] == rows_b[:10]
    assert rows_a[10:] != rows_b[10:]


def test_fork_matches_parent_exactly(harness):
    client, _ = harness
    parent = _create(client, scenario="svc")["session_id"]
    client.post(f"/sessions/{parent}/advance", json={"steps": 10})
    view = client.post(f"/sessions/{parent}/fork").json()
    child = view["session_id"]
    assert view["forked_from"] == parent
    assert view["t"] == 10
    client.post(f"/sessions/{parent}/advance", json={"steps": 99})
    client.post(f"/sessions/{child}/advance", json={"steps": 99})
    assert (client.get(f"/sessions/{parent}/metrics").json()["rows"]
            == client.get(f"/sessions/{child}/metrics").json()["rows"])
    assert (client.get(f"/sessions/{parent}/summary").json()
            == client.get(f"/sessions/{child}/summary").json())


def test_incremental_fetch_equals_full_buffers(harness):
    client, _ = harness
    sid = _create(client, scenario="svc")["session_id"]
    rows, events, next_t, next_seq = [], [], 0, 0
    for chunk in (3, 7, 10):
        client.post(f"/sessions/{sid}/advance", json={"steps": chunk})
        got = client.get(f"/sessions/{sid}/metrics",
                         params={"since_t": next_t}).json()["rows"]
        rows.extend(got)
        next_t = rows[-1]["t"] + 1
        evs = client.get(f"/sessions/{sid}/events",
                         params={"since_seq": next_seq}).json()["events"]
        events.extend(evs)
        next_seq = events[-1]["seq"] + 1
    assert rows == client.get(f"/sessions/{sid}/metrics").json()["rows"]
    assert events == client.get(f"/sessions/{sid}/events").json()["events"]
    assert [r["t"] for r in rows] == list(range(20))
    assert [e["seq"] for e in events] == list(range(len(events)))


def test_sessions_are_isolated_and_listed(harness):
    client, _ = harness
    a = _create(client, scenario="svc", seed=1)["session_id"]
    b = _create(client, scenario="svc", seed=2)["session_id"]
    client.post(f"/sessions/{a}/advance", json={"steps": 20})
    client.post(f"/sessions/{b}/advance", json={"steps": 20})
    rows_a = client.get(f"/sessions/{a}/metrics").json()["rows"]
    rows_b = client.get(f"/sessions/{b}/metrics").json()["rows"]
    assert rows_a != rows_b
    listed = client.get("/sessions").json()["sessions"]
    assert {s["session_id"] for s in listed} == {a, b}


def test_summary_available_mid_run(harness):
    client, _ = harness
    sid = _create(client, scenario="svc")["session_id"]
    client.post(f"/sessions/{sid}/advance", json={"steps": 6})
    body = client.get(f"/sessions/{sid}/summary").json()
    assert body["t"] == 6
    assert "final_backlog" in body and "chain_head" in body
