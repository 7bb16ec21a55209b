# tests/test_main.py
import time

import pytest
from fastapi import HTTPException
from fastapi.testclient import TestClient

from app.exceptions import EnumerationBudgetExceeded, GraphError
from app.main import _raise_http, app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["status"] == "online"


def test_retrieve(client):
    payload = {"config": {"graph": "petersen", "q": 5, "f": 4, "seed": 1}, "phis": [7]}
    response = client.post("/retrieve", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["correct"] is True
    assert body["rate"] == "1/10"
    assert body["upload"] == 30


def test_retrieve_errors(client):
    response = client.post("/retrieve", json={"config": {"graph": "petersen"}, "phis": [99]})
    assert response.status_code == 400
    response = client.post("/retrieve", json={"config": {"graph": "petersen", "q": 2}, "phis": [1]})
    assert response.status_code == 422
    response = client.post("/retrieve", json={"config": {"graph": "dodecahedron"}, "phis": [1]})
    assert response.status_code == 400


def test_analyze(client):
    payload = {"config": {"graph": "bowtie", "q": 3}, "colluders": [1, 2, 3, 4, 5], "phi": 4}
    response = client.post("/analyze", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["candidates"] == [4, 5, 6]
    assert body["leakage_bits"] == 1.0
    assert body["acyclic"] is False


def test_bound(client):
    body = client.get("/bound/petersen").json()
    assert body["delta_over_n"] == "1/5"
    assert body["lp_bound"] == "1/5"


def test_table1(client):
    records = client.get("/table1").json()
    assert [r["rate"] for r in records] == ["1/10", "1/8"]


def test_verify_job(client):
    response = client.post("/verify", json={"graph": "complete(3)", "q": 3, "samples": 3})
    assert response.status_code == 200
    job_id = response.json()["job_id"]
    deadline = time.time() + 30
    job = client.get(f"/job/{job_id}").json()
    while job["status"] == "processing" and time.time() < deadline:
        time.sleep(0.1)
        job = client.get(f"/job/{job_id}").json()
    assert job["status"] == "completed"
    assert job["result"]["passed"] is True
    assert job_id in client.get("/jobs").json()


def test_missing_job(client):
    assert client.get("/job/nao-existe").status_code == 404


def test_error_mapping():
    with pytest.raises(HTTPException) as excinfo:
        _raise_http(EnumerationBudgetExceeded(10**9, 1000), "teste")
    assert excinfo.value.status_code == 413
    with pytest.raises(HTTPException) as excinfo:
        _raise_http(GraphError("grafo"), "teste")
    assert excinfo.value.status_code == 400
    with pytest.raises(HTTPException) as excinfo:
        _raise_http(RuntimeError("falha"), "teste")
    assert excinfo.value.status_code == 500
