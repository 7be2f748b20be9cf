import pytest
from fastapi.testclient import TestClient

from app import __version__
from app.core.exceptions import InvalidParametersError, RunDirectoryError
from app.main import app

LOSS = {"n": 7, "sigma1": 1, "sigma2": 1, "p1": 9, "p2": 10, "q": 4, "m": 1}


@pytest.fixture
def client():
    return TestClient(app)


def test_root_and_health(client):
    root = client.get("/")
    assert root.status_code == 200
    assert root.json()["version"] == __version__
    assert "environment" in root.json()
    assert client.get("/api/v1/health").json() == {"status": "ok"}


def test_check_endpoint(client):
    response = client.post("/api/v1/params/check", json=LOSS)
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"]["scenario"] == "Thm11_loss"
    assert body["verdict"]["eps_p1_sigma2"] == 0.0
    assert body["constants"]["kappa1"] == pytest.approx(3.0)
    assert body["rates"]["u"]["rate_lq"] == pytest.approx(-1.125)


def test_check_endpoint_accepts_variant(client):
    response = client.post("/api/v1/params/check", params={"variant": "gn_derived"}, json=LOSS)
    assert response.status_code == 200
    assert response.json()["rates"]["epsilon_variant"] == "gn_derived"


def test_check_endpoint_validates_body(client):
    assert client.post("/api/v1/params/check", json=dict(LOSS, m=5)).status_code == 422
    assert client.post("/api/v1/params/check", json=dict(LOSS, p1=1)).status_code == 422


def test_rates_endpoint(client):
    response = client.post("/api/v1/params/rates", json=LOSS)
    assert response.status_code == 200
    assert response.json()["v"]["rate_top"] == pytest.approx(-2.125)

    none = {"n": 8, "sigma1": 1, "sigma2": 1, "p1": 2, "p2": 2, "q": 2, "m": 1}
    assert client.post("/api/v1/params/rates", json=none).status_code == 422


def test_scan_endpoint(client):
    ranges = {"n": [7], "sigma1": [1], "sigma2": [1], "p1": [9, 10], "p2": [10], "q": [4], "m": [1]}
    response = client.post("/api/v1/params/scan", json={"ranges": ranges, "include_rows": True})
    assert response.status_code == 200
    body = response.json()
    assert body["total"] == 2
    assert body["counts"]["Thm11_loss"] == 1
    assert body["counts"]["Thm11B_noloss"] == 1
    assert [row["scenario"] for row in body["rows"]] == ["Thm11_loss", "Thm11B_noloss"]

    summary = client.post("/api/v1/params/scan", json={"ranges": ranges}).json()
    assert summary["rows"] == []


def test_scan_endpoint_limits_grid_size(client):
    ten = list(range(2, 12))
    # 10 * 3 * 1 * 10 * 10 * 10 * 10 = 300000 tuples
    ranges = {"n": ten, "sigma1": [1, 2, 3], "sigma2": [1], "p1": ten, "p2": ten, "q": ten, "m": ten}
    response = client.post("/api/v1/params/scan", json={"ranges": ranges})
    assert response.status_code == 413


def test_domain_errors_escaping_a_route_are_mapped(client):
    async def invalid():
        raise InvalidParametersError("m must be below q")

    async def broken():
        raise RunDirectoryError("disk full")

    app.add_api_route("/_test/invalid", invalid)
    app.add_api_route("/_test/broken", broken)

    response = client.get("/_test/invalid")
    assert response.status_code == 422
    assert response.json() == {"detail": "m must be below q"}
    assert client.get("/_test/broken").status_code == 500
