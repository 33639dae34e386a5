import json

import pytest
from fastapi.testclient import TestClient

from poncelet_rings import __version__
from poncelet_rings.service import app

GR = "7#(3,1;2,3;1,2)"


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def scene_request(client, **overrides):
    body = {"symbol": GR, "axes": [4.0, 1.0], "winding": 1, "t0": 0.3}
    body.update(overrides)
    return client.post("/api/scene", json=body)


class TestHealth:
    def test_ok(self, client):
        r = client.get("/api/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok", "version": __version__}


class TestValidate:
    def test_valid_symbol(self, client):
        r = client.get("/api/symbol/validate", params={"symbol": GR})
        assert r.status_code == 200
        doc = r.json()
        assert doc["valid"] and doc["trivial"] and doc["m"] == 7

    def test_adjacent_repeat_is_200(self, client):
        r = client.get("/api/symbol/validate",
                       params={"symbol": "9#(3,3;1,2)"})
        assert r.status_code == 200
        doc = r.json()
        assert not doc["valid"] and doc["code"] == "AdjacentRepeat"

    def test_garbage_is_200(self, client):
        r = client.get("/api/symbol/validate", params={"symbol": "x#y"})
        assert r.status_code == 200
        assert r.json()["code"] == "SymbolSyntaxError"


class TestScene:
    def test_gr_two_base_points(self, client):
        for t0 in (0.1, 0.9):
            r = scene_request(client, t0=t0)
            assert r.status_code == 200
            doc = r.json()
            assert doc["audit"]["verdict"] == "proper-(n4)"
            assert doc["closure_residual"] < 1e-6

    def test_letter_out_of_range_422(self, client):
        r = scene_request(client, symbol="8#(4,1;2,3)")
        assert r.status_code == 422
        doc = r.json()
        assert doc["code"] == "LetterOutOfRange"
        assert set(doc) == {"code", "step", "message"}

    def test_detuned_lambda_returns_200_failed(self, client):
        ok = scene_request(client)
        lam = float(ok.headers["X-Lambda"])
        r = scene_request(client, **{"lambda": lam * 0.8})
        assert r.status_code == 200
        doc = r.json()
        assert doc["audit"]["verdict"] == "failed"
        assert doc["closure_residual"] > 1e-3

    def test_malformed_json_400(self, client):
        r = client.post("/api/scene", content=b"{not json",
                        headers={"content-type": "application/json"})
        assert r.status_code == 400
        assert r.json()["code"] == "MalformedJSON"
        r = client.post("/api/scene", json=["a", "list"])
        assert r.status_code == 400
        r = client.post("/api/scene", json={"symbol": GR})
        assert r.status_code == 400

    def test_identical_requests_identical_bodies(self, client):
        a = scene_request(client)
        b = scene_request(client)
        assert a.content == b.content

    def test_lambda_cache_reused(self, client):
        a = scene_request(client, t0=0.2)
        b = scene_request(client, t0=0.7)
        assert a.headers["X-Lambda"] == b.headers["X-Lambda"]

    def test_bad_axes_422_not_500(self, client):
        r = scene_request(client, axes=[1.0, 4.0])
        assert r.status_code == 422
        assert r.json()["code"] == "BadAxes"

    def test_impossible_winding_422(self, client):
        r = scene_request(client, winding=5)
        assert r.status_code == 422
