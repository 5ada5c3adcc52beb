import pytest
from fastapi.testclient import TestClient

from conftest import scenario_dict
from rtsim.io import decode_spectrum
from rtsim.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def payload(**kw):
    return {"scenario": scenario_dict(**kw), "options": {}}


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"


class TestSimulateRoute:
    def test_frame_with_targets(self, client):
        targets = [
            {"id": 1, "range_m": 33.5, "velocity_mps": 0.0, "rcs_m2": 1.0,
             "angle_deg": 7.0, "channels": [0, 1]},
            {"id": 2, "range_m": 45.0, "velocity_mps": -2.0, "rcs_m2": 1.0,
             "angle_deg": 10.0, "channels": [0, 1]},
        ]
        resp = client.post("/simulate", json=payload(n_chirps=64,
                                                     targets=targets))
        assert resp.status_code == 200
        body = resp.json()
        assert body["flagged"] is False
        assert len(body["detections"]) == 2
        assert {d["target_id"] for d in body["detections"]} == {1, 2}
        assert all(c["ok"] for c in body["constraints"])
        assert "rd_map.csv" in body["files"]
        assert body["files"]["detections.csv"].startswith("target_id,")

    def test_malformed_scenario_is_422(self, client):
        resp = client.post("/simulate", json={"scenario": {"radar": {}}})
        assert resp.status_code == 422

    def test_semantic_error_is_400(self, client):
        doc = payload(n_chirps=4, calibration=False)
        doc["scenario"]["targets"] = [
            {"id": 1, "range_m": 45.0, "angle_deg": 5.0, "channels": [0]}]
        resp = client.post("/simulate", json=doc)
        assert resp.status_code == 400
        assert "channel angle" in resp.json()["detail"]

    def test_deterministic_outputs(self, client):
        targets = [{"id": 1, "range_m": 45.0, "velocity_mps": 0.0,
                    "rcs_m2": 1.0, "angle_deg": 7.0, "channels": [0, 1]}]
        a = client.post("/simulate", json=payload(n_chirps=16, targets=targets))
        b = client.post("/simulate", json=payload(n_chirps=16, targets=targets))
        assert a.json()["files"] == b.json()["files"]


class TestCalibrateRoute:
    def test_reference_sweep(self, client):
        resp = client.post("/calibrate", json=payload())
        assert resp.status_code == 200
        body = resp.json()
        assert body["period_estimate_s"] == pytest.approx(1e-9, abs=0.05e-9)
        assert body["min_abs_error_deg"] < 0.01
        assert body["files"]["calibration.csv"].startswith("delta_tau_s,")

    def test_short_span_is_400(self, client):
        doc = payload()
        doc["scenario"]["calibration"]["sweep_stop_s"] = 0.1e-9
        resp = client.post("/calibrate", json=doc)
        assert resp.status_code == 400
        assert "period" in resp.json()["detail"]


class TestLinearityRoute:
    def test_small_run(self, client):
        lin = {"pair": [0, 1], "start_deg": 3.4, "stop_deg": 12.2, "count": 7}
        resp = client.post("/linearity", json=payload(linearity=lin))
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["rows"]) == 7
        assert body["max_abs_error_deg"] <= 0.05

    def test_outside_interval_is_400(self, client):
        lin = {"pair": [0, 1], "set_points_deg": [20.0]}
        resp = client.post("/linearity", json=payload(linearity=lin))
        assert resp.status_code == 400


class TestDumpSpectrumRoute:
    def test_binary_round_trip(self, client):
        resp = client.post("/dump-spectrum",
                           json=payload(n_chirps=4, calibration=False))
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "application/octet-stream"
        cube = decode_spectrum(resp.content)
        assert cube.shape == (512, 4, 8)
