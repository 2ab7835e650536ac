"""Tests for the HTTP experiment service."""

import pytest
from fastapi.testclient import TestClient

from mmsop import __version__
from mmsop.service import app

SMALL = dict(k=2, nt=3, ns=4, ne=2, trials=2, i_g=100, iter_max=3)


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "version": __version__}


class TestValidation:
    def test_too_few_samples(self, client):
        resp = client.post("/validate-sop", json={**SMALL, "samples": 100})
        assert resp.status_code == 422
        assert "samples" in resp.json()["detail"]

    def test_bad_axis(self, client):
        resp = client.post("/sweep", json={**SMALL, "axis": "frequency",
                                           "values": [2]})
        assert resp.status_code == 422

    def test_bad_scheme(self, client):
        resp = client.post("/optimize", json={**SMALL, "schemes": ["zf"]})
        assert resp.status_code == 422

    def test_axis_without_values(self, client):
        resp = client.post("/sweep", json={**SMALL, "axis": "ns"})
        assert resp.status_code == 422

    def test_malformed_json_types(self, client):
        resp = client.post("/optimize", json={**SMALL, "k": "many"})
        assert resp.status_code == 422


class TestHappyPaths:
    def test_validate_sop(self, client):
        resp = client.post("/validate-sop", json={**SMALL, "samples": 20_000})
        assert resp.status_code == 200
        body = resp.json()
        assert body["command"] == "validate-sop"
        assert body["csv"].startswith("user,")
        assert "all_pass" in body["summary"]
        assert "command = validate-sop" in body["meta"]

    def test_optimize(self, client):
        resp = client.post("/optimize", json=SMALL)
        assert resp.status_code == 200
        body = resp.json()
        assert body["csv"].startswith("scheme,iteration,")
        assert "duration_s_mm-sop" in body["summary"]

    def test_sweep(self, client):
        resp = client.post("/sweep", json={**SMALL, "axis": "ne", "values": [1, 2]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["csv"].startswith("row_type,")
        assert body["summary"]["failures"] == 0
        assert body["summary"]["cells"] == 4

    def test_compare(self, client):
        resp = client.post("/compare", json=SMALL)
        assert resp.status_code == 200
        body = resp.json()
        assert body["csv"].splitlines()[0].endswith("paired_diff")
        assert body["summary"]["pairs"] == SMALL["trials"]

    def test_defaults_fill_in(self, client):
        # an empty body is a valid spec made entirely of defaults
        resp = client.post("/optimize", json={"k": 1, "nt": 2, "ns": 2, "ne": 1,
                                              "iter_max": 1, "i_g": 50})
        assert resp.status_code == 200
        assert "meta" in resp.json()
