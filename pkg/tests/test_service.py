import pytest
from fastapi.testclient import TestClient

from molr.engine import RetrievalEngine
from molr.hindexer import HIndexerConfig
from molr.mol import MoLConfig
from molr.model import TowerDims, init_params
from molr.numerics import make_rng
from molr.service import create_app


@pytest.fixture(scope="module")
def client():
    cfg = MoLConfig(k_u=2, k_x=2, d=4, gating_hidden=8, dropout_p=0.0)
    dims = TowerDims(n_users=15, n_items=60, d_u=8, d_x=8, proj_hidden=8)
    params = init_params(dims, cfg, make_rng(4))
    hcfg = HIndexerConfig(k_prime=30, sample_ratio=0.5, d_prime=cfg.d)
    engine = RetrievalEngine.from_params(params, cfg, hcfg, seed=9)
    return TestClient(create_app(engine))


class TestHealth:
    def test_reports_corpus_shape(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["num_users"] == 15
        assert body["num_items"] == 60
        assert (body["k_u"], body["k_x"], body["d"]) == (2, 2, 4)


class TestQuery:
    def test_basic_query(self, client):
        resp = client.post("/query", json={"user_id": 0, "k": 5})
        assert resp.status_code == 200
        body = resp.json()
        assert body["user_id"] == 0
        assert len(body["items"]) == 5
        scores = [row["score"] for row in body["items"]]
        assert scores == sorted(scores, reverse=True)

    def test_k_prime_override(self, client):
        resp = client.post("/query", json={"user_id": 1, "k": 3, "k_prime": 60})
        assert resp.status_code == 200
        assert resp.json()["k_prime"] == 60

    def test_deterministic_repeats(self, client):
        a = client.post("/query", json={"user_id": 2, "k": 10}).json()
        b = client.post("/query", json={"user_id": 2, "k": 10}).json()
        assert a == b

    def test_unknown_user_404(self, client):
        assert client.post("/query", json={"user_id": 99, "k": 5}).status_code == 404

    def test_validation_422(self, client):
        assert client.post("/query", json={"user_id": -1, "k": 5}).status_code == 422
        assert client.post("/query", json={"user_id": 0, "k": 0}).status_code == 422


class TestGatingCost:
    def test_reference_workload(self, client):
        resp = client.post(
            "/cost/gating",
            json={
                "B": 2048, "X": 4096, "D": 1024, "D_u": 768, "D_x": 128,
                "D_xu": 128, "K": 256, "L": 128,
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["flops"]["non_decomposed"] == 2048 * 4096 * 256 * 1152
        assert body["flops"]["decomposed"] < 0.5 * body["flops"]["non_decomposed"]
        assert abs(body["memory_bytes"]["non_decomposed"] - 44e9) / 44e9 < 0.05

    def test_bad_convention_422(self, client):
        resp = client.post(
            "/cost/gating",
            json={
                "B": 1, "X": 1, "D": 1, "D_u": 1, "D_x": 1, "D_xu": 1,
                "K": 1, "L": 1, "flop_convention": "bogus",
            },
        )
        assert resp.status_code == 422
