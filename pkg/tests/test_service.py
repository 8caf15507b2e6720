"""Tests for the HTTP service endpoints."""

import math

import pytest
from fastapi.testclient import TestClient

from winsormean.service import app

client = TestClient(app)


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


class TestEstimate:
    def test_golden_case(self):
        r = client.post(
            "/estimate", json={"values": [0, 1, 2, 3, 100], "eps": 0.2}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["estimate"] == 1.8
        assert body["alpha_hat"] == 0.0
        assert body["beta_hat"] == 3.0

    def test_single_value(self):
        r = client.post("/estimate", json={"values": [3.5], "eps": 0.5})
        assert r.json()["estimate"] == 3.5

    def test_rule_eps_above_half_reported(self):
        # at n=1 the default rule gives eps > 1/2: no estimate, flagged
        r = client.post("/estimate", json={"values": [3.5]})
        body = r.json()
        assert body["implementable"] is False
        assert body["estimate"] is None

    def test_with_bound(self):
        r = client.post(
            "/estimate",
            json={
                "values": list(range(500)),
                "lambda1": 1.5,
                "sigma_m": 1.7,
                "m": 2.0,
            },
        )
        body = r.json()
        assert body["bound"] is not None and body["bound"] > 0.0

    def test_rejects_nonfinite(self):
        r = client.post(
            "/estimate",
            content='{"values": [1.0, Infinity]}',
            headers={"Content-Type": "application/json"},
        )
        assert r.status_code == 422

    def test_rejects_empty(self):
        r = client.post("/estimate", json={"values": []})
        assert r.status_code == 422


class TestBound:
    def test_reference_constants(self):
        r = client.post(
            "/bound",
            json={
                "m": 2.0, "lambda1": 1.5, "lambda2": 0.2, "sigma_m": 1.0,
                "n": 500, "delta": 0.01,
            },
        )
        body = r.json()
        assert body["frak_u"] == pytest.approx(13.7082, abs=1e-4)
        assert body["eta_term_zero"] is True

    def test_zero_sigma(self):
        r = client.post(
            "/bound",
            json={"m": 2.0, "lambda1": 1.5, "lambda2": 0.2, "sigma_m": 0.0,
                  "n": 500, "delta": 0.01},
        )
        assert r.json()["theorem1_bound"] == 0.0

    def test_adaptive_bound_with_rho(self):
        r = client.post(
            "/bound",
            json={"m": 2.0, "lambda1": 1.5, "lambda2": 0.2, "sigma_m": 1.0,
                  "n": 500, "delta": 0.01, "rho": 0.5, "eta_min": 0.0},
        )
        body = r.json()
        assert body["theorem2_bound"] > body["theorem1_bound"]

    def test_m1_eta_zero(self):
        r = client.post(
            "/bound",
            json={"m": 1.0, "lambda1": 1.5, "lambda2": 0.2, "sigma_m": 1.0,
                  "n": 500, "delta": 0.01, "eta": 0.0},
        )
        assert r.json()["eta_term_zero"] is True


class TestFeasible:
    def test_reference_case(self):
        r = client.post(
            "/feasible",
            json={"n": 500, "delta": 0.01, "lambda1": 1.01, "lambda2": 0.2},
        )
        body = r.json()
        assert body["simple_ok"] is True
        assert body["lm21_implementable"] is True

    def test_lm21_not_implementable_n200(self):
        r = client.post(
            "/feasible",
            json={"n": 200, "delta": 0.01, "lambda1": 1.01, "lambda2": 0.2},
        )
        assert r.json()["lm21_implementable"] is False

    def test_eta_above_half(self):
        r = client.post(
            "/feasible",
            json={"n": 500, "delta": 0.01, "lambda1": 1.01, "lambda2": 0.2,
                  "eta": 0.6},
        )
        body = r.json()
        assert body["implementable"] is False
        assert body["simple_ok"] is False


class TestSimulate:
    CONFIG = {
        "n": 100, "m": 2.0, "delta": 0.01,
        "distribution": {"kind": "pareto_mixture", "t": 2.0, "gamma": 2.01},
        "adversary": {"kind": "none"},
        "estimators": [{"name": "sample_mean"}, {"name": "winsorized"}],
        "replications": 20,
        "master_seed": 5,
    }

    def test_runs_and_reports(self):
        r = client.post("/simulate", json={"config": self.CONFIG})
        assert r.status_code == 200
        body = r.json()
        assert [e["label"] for e in body["estimators"]] == [
            "sample_mean", "winsorized_0.2",
        ]
        assert body["summary_csv"].startswith("n,m,eta_min,estimator")
        assert body["raw_errors_csv"] is None

    def test_raw_dump(self):
        r = client.post(
            "/simulate", json={"config": self.CONFIG, "keep_raw": True}
        )
        raw = r.json()["raw_errors_csv"]
        assert raw.startswith("rep,estimator,error,status")
        assert len(raw.splitlines()) == 1 + 20 * 2

    def test_schema_error_names_field(self):
        bad = dict(self.CONFIG, estimators=[{"name": "bogus"}])
        r = client.post("/simulate", json={"config": bad})
        assert r.status_code == 422
        assert "estimators" in str(r.json()["detail"])
