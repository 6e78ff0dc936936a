import json
import warnings
from importlib import resources

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from rnscope.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def _trace_payload():
    ref = resources.files("rnscope").joinpath("data/traces/keyswitch_l48.json")
    return json.loads(ref.read_text())


class TestMeta:
    def test_health(self, client):
        resp = client.get("/v1/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_profiles(self, client):
        data = client.get("/v1/profiles").json()
        assert "rtx5090" in data["machines"]
        assert "verify_small" in data["params"]
        assert {"ks48", "ks24", "ks12"} <= set(data["params"])


class TestPrimes:
    def test_known_small_case(self, client):
        resp = client.post("/v1/primes", json={"n": 16, "bitwidth": 8, "count": 2})
        assert resp.status_code == 200
        moduli = resp.json()["moduli"]
        assert [m["q"] for m in moduli] == [193, 97]
        assert all(m["q"] % 32 == 1 for m in moduli)

    def test_insufficient_is_404(self, client):
        resp = client.post("/v1/primes", json={"n": 16, "bitwidth": 6, "count": 1})
        assert resp.status_code == 404
        assert "insufficient primes" in resp.json()["detail"]

    def test_validation_error_is_422(self, client):
        resp = client.post("/v1/primes", json={"n": 16, "bitwidth": 8, "count": 0})
        assert resp.status_code == 422


class TestRoofline:
    def test_paper_bound(self, client):
        resp = client.post("/v1/roofline", json={
            "machine": {"name": "rtx5090"},
            "totals": {"read_bytes": 53e9},
        })
        data = resp.json()
        assert abs(data["latency"] - 8.833e-3) < 1e-5
        assert data["bottleneck"] == "l2_read"

    def test_inline_machine_profile(self, client):
        profile = json.loads(
            resources.files("rnscope").joinpath("data/profiles/h100.json").read_text()
        )
        resp = client.post("/v1/roofline", json={
            "machine": {"profile": profile},
            "totals": {"read_bytes": 1e12},
        })
        assert resp.json()["latency"] == pytest.approx(1e12 / 5.5e12)

    def test_requires_totals_or_trace(self, client):
        resp = client.post("/v1/roofline", json={"machine": {"name": "rtx5090"}})
        assert resp.status_code == 400

    def test_trace_input_and_plot_data(self, client):
        resp = client.post("/v1/roofline", json={
            "machine": {"name": "rtx5090"},
            "trace": _trace_payload(),
            "plot_data": True,
        })
        data = resp.json()
        assert data["latency"] > 0
        assert data["series"]


class TestPlan:
    def test_b_star_7(self, client):
        resp = client.post("/v1/plan", json={
            "params": {"name": "ks12"},
            "machine": {"name": "rtx5090"},
            "sequence": "ks_stage3",
            "b_max": 10,
        })
        data = resp.json()
        assert data["b_star"] == 7 and not data["spill"]
        lat = [row["amortized_latency"] for row in data["curve"]]
        assert lat[7] > lat[6]

    def test_unknown_params_is_400(self, client):
        resp = client.post("/v1/plan", json={"params": {"name": "nope"}})
        assert resp.status_code == 400


class TestKsTraffic:
    def test_reference_cells(self, client):
        resp = client.post("/v1/keyswitch-traffic", json={"params": {"name": "ks48"}})
        data = resp.json()
        by_stage = {s["stage"]: s["mb"] for s in data["stages"]}
        assert abs(by_stage[2] - 233) / 233 < 0.05
        assert abs(by_stage[1] - 352) / 352 < 0.15
        assert abs(by_stage[3] - 201) / 201 < 0.15
        fps = {f["stage"]: f["mb"] for f in data["footprints"]}
        assert abs(fps[1] - 62.9) / 62.9 < 0.01
        assert abs(fps[3] - 50.3) / 50.3 < 0.01


class TestAnalyze:
    def test_eager_static_difference(self, client):
        base = {"trace": _trace_payload(), "machine": {"name": "rtx5090"}}
        eager = client.post("/v1/analyze", json={**base, "mode": "eager"}).json()
        static = client.post("/v1/analyze", json={**base, "mode": "static_graph"}).json()
        assert eager["kernel_count"] == 11
        diff = eager["latency"] - static["latency"]
        assert diff == pytest.approx(11 * 3e-6, abs=1e-12)
        assert eager["launch_overhead_total"] == pytest.approx(11 * 3e-6)
        assert len(eager["kernels"]) == 11

    def test_bad_trace_is_400(self, client):
        resp = client.post("/v1/analyze", json={
            "trace": {"kernels": [{"id": "a", "kind": "ntt_phase1", "n": 16,
                                   "limbs": 1, "deps": ["ghost"]}]},
            "machine": {"name": "rtx5090"},
        })
        assert resp.status_code == 400


class TestVerify:
    def test_quick_pass(self, client):
        resp = client.post("/v1/verify", json={
            "params": {"name": "verify_small"},
            "seed": 1,
            "keyswitch_trials": 2,
            "bconv_degree": 256,
        })
        data = resp.json()
        assert data["all_passed"]
        assert {s["name"] for s in data["suites"]} == {
            "ntt-convolution", "bconv-wide-integer", "keyswitch-decrypt"
        }

    def test_fault_injection_fails_convolution(self, client):
        resp = client.post("/v1/verify", json={
            "params": {"name": "verify_small"},
            "fault": "twiddle",
            "keyswitch_trials": 1,
            "bconv_degree": 256,
        })
        data = resp.json()
        assert not data["all_passed"]
        by_name = {s["name"]: s for s in data["suites"]}
        assert not by_name["ntt-convolution"]["passed"]
        assert by_name["bconv-wide-integer"]["passed"]
