from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from mvtgg import io, resources
from mvtgg.history import ElementDelete, VersionCreate
from mvtgg.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app(session_limit=2))


@pytest.fixture
def docs():
    return resources.load("ast2cd"), resources.load("diamond")


def test_health(client):
    assert client.get("/health").json()["status"] == "ok"


def test_transform_project_compare(client, docs):
    tgg, hist = docs
    m = client.post("/transform", json={"tgg": tgg, "history": hist}).json()
    s = client.post("/transform", json={"tgg": tgg, "history": hist, "strategy": "svm"}).json()
    assert m["summary"]["applications"] == 4 and s["summary"]["applications"] == 12
    cmp = client.post("/compare", json={"a": m["state"], "b": s["state"]}).json()
    assert cmp["ok"]
    g = client.post("/project", json={"state": m["state"], "version": 2}).json()["graph"]
    assert sum(1 for e in g["elements"] if e["type"] == "Association") == 1


def test_sync_and_compact(client, docs):
    tgg, hist = docs
    state = client.post("/transform", json={"tgg": tgg, "history": hist}).json()["state"]
    mods = io.mods_to_doc([VersionCreate(4, 5), ElementDelete(7, 5)])
    r = client.post("/sync", json={"state": state, "mods": mods}).json()
    assert 5 in r["summary"]["versions"]
    c = client.post("/compact", json={"state": r["state"]})
    assert c.status_code == 200


def test_verify_and_bench(client, docs):
    tgg, hist = docs
    assert client.post("/verify", json={"tgg": tgg, "history": hist}).json()["ok"]
    r = client.post("/bench", json={"tgg": tgg, "history": hist, "strategies": ["mvm-b", "svm-b"]})
    assert r.status_code == 200 and r.json()["cross_check"]["passed"]
    bad = client.post("/bench", json={"tgg": tgg, "history": hist, "inject_fault": "svm-b"})
    assert bad.status_code == 409 and bad.json()["error"] == "integrity"


def test_generate(client):
    r = client.post("/generate", json={"seed": 3, "versions": 4})
    assert r.status_code == 200 and len(r.json()["history"]["versions"]) == 4


def test_validation_errors(client, docs):
    tgg, hist = docs
    assert client.post("/transform", json={"tgg": tgg}).status_code == 422
    assert client.post("/transform", json={"tgg": tgg, "history": hist, "strategy": "x"}).status_code == 422
    r = client.post("/verify", json={"tgg": tgg, "history": {"schema": "nope"}})
    assert r.status_code == 422 and r.json()["error"] == "input"
    assert client.post("/bench", json={"tgg": tgg, "history": hist, "strategies": []}).status_code == 422


def test_sessions(client, docs):
    tgg, hist = docs
    r = client.post("/sessions", json={"tgg": tgg, "history": hist})
    assert r.status_code == 201
    key = r.json()["session"]
    r = client.post(f"/sessions/{key}/mods", json={"mods": io.mods_to_doc([VersionCreate(4, 5)])})
    assert r.json()["summary"]["applications"] == 0
    assert client.get(f"/sessions/{key}/versions/5").status_code == 200
    assert client.get(f"/sessions/{key}/state").json()["strategy"] == "mvm"
    bad = client.post(f"/sessions/{key}/mods", json={"mods": io.mods_to_doc([ElementDelete(3, 5)])})
    assert bad.status_code == 422
    assert client.get(f"/sessions/{key}/versions/5").status_code == 200  # state untouched by the failure
    assert client.delete(f"/sessions/{key}").status_code == 204
    assert client.get(f"/sessions/{key}/state").status_code == 404


def test_session_limit(client, docs):
    tgg, hist = docs
    for _ in range(2):
        assert client.post("/sessions", json={"tgg": tgg, "history": hist}).status_code == 201
    assert client.post("/sessions", json={"tgg": tgg, "history": hist}).status_code == 429
