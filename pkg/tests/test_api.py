from fastapi.testclient import TestClient

from app.main import app

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_train():
    response = client.post("/api/train", json={"n_records": 150, "seed": 4})
    assert response.status_code == 200
    body = response.json()
    assert [row["model"] for row in body["rows"]] == ["DT1", "DT2", "kNN"]
    assert all(row["tp"] + row["fp"] + row["tn"] + row["fn"] == 45 for row in body["rows"])
    assert body["dt2_rules"].startswith("DT2 rules:")


def test_simulate():
    response = client.post("/api/simulate", json={"scenarios": ["Baseline+ML"], "reps": 2, "horizon_days": 2})
    assert response.status_code == 200
    rows = response.json()["rows"]
    assert [row["scenario"] for row in rows] == ["Baseline", "Baseline+ML"]
    assert rows[0]["pct_los"] is None
    assert rows[1]["p_los"] is not None
    assert "Welch" in response.json()["report"]


def test_unknown_scenario_is_rejected():
    response = client.post("/api/simulate", json={"scenarios": ["Z"], "reps": 2, "horizon_days": 2})
    assert response.status_code == 400
    assert "unknown scenario" in response.json()["detail"]


def test_request_validation():
    assert client.post("/api/simulate", json={"reps": 1}).status_code == 422
    assert client.post("/api/train", json={"n_records": 3}).status_code == 422
