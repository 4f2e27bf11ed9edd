import pytest
from fastapi.testclient import TestClient

from app.main import app

TINY_CONFIG = {
    "partition": {"L": 4, "M": 4, "alpha": 1.0, "rho": 2, "samples_per_client": 30, "feature_dim": 3},
    "train": {"epochs": 1, "batch_size": 8},
    "selection": {"strategy": "simclust", "K": 2, "G": 2},
    "rounds": 2,
    "seeds": [0],
    "report": {"accuracy_targets": [0.2], "sustain_window": 1},
}


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_health_endpoints(client):
    assert client.get("/healthz").json() == {"status": "ok"}
    root = client.get("/")
    assert root.status_code == 200
    assert root.json()["status"] == "ok"
    assert "X-Request-ID" in root.headers


def test_submit_run(client):
    response = client.post("/api/runs/", json={"config": TINY_CONFIG, "seed": 1, "include_rounds": True})
    assert response.status_code == 200
    body = response.json()
    assert body["strategy"] == "simclust[G=2]"
    assert body["rounds"] == 2
    assert len(body["records"]) == 2
    assert body["clustering_flops"] > 0
    assert body["total_j"] == pytest.approx(body["pre_j"] + body["train_j"] + body["comm_j"])


def test_submit_run_omits_rounds_by_default(client):
    body = client.post("/api/runs/", json={"config": TINY_CONFIG}).json()
    assert body["records"] is None


def test_invalid_run_config_is_rejected(client):
    bad = {**TINY_CONFIG, "selection": {"strategy": "random", "K": 9}}
    response = client.post("/api/runs/", json={"config": bad})
    assert response.status_code == 422
    assert response.json()["error"] == "Validation error"


def test_simulation_errors_map_to_422(client):
    cfg = {**TINY_CONFIG, "energy": {"compute": {"mode": "trace", "trace_path": "missing.csv", "trace_flops": 1.0}}}
    response = client.post("/api/runs/", json={"config": cfg})
    assert response.status_code == 422
    assert response.json()["error"] == "TraceFormatError"


def test_privacy_ari_sweep(client):
    payload = {"gammas": [0.0], "L": 10, "rho": 5, "M": 10, "seeds": [0]}
    response = client.post("/api/privacy/ari", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert {row["method"] for row in body["rows"]} == {"simclust", "repclust"}
    assert all(row["ari"] == 1.0 for row in body["rows"])
    assert len(body["summary"]) == 2


def test_privacy_ari_rejects_bad_scenario(client):
    response = client.post("/api/privacy/ari", json={"L": 10, "rho": 3, "M": 10})
    assert response.status_code == 422
