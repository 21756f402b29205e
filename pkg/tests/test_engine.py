import numpy as np
import pytest

from molr.engine import RetrievalEngine, load_checkpoint, save_checkpoint
from molr.hindexer import HIndexerConfig
from molr.mol import MoLConfig
from molr.model import TowerDims, init_params
from molr.numerics import make_rng


@pytest.fixture(scope="module")
def built():
    cfg = MoLConfig(k_u=2, k_x=2, d=8, gating_hidden=16, dropout_p=0.0)
    dims = TowerDims(n_users=30, n_items=800, d_u=12, d_x=12, proj_hidden=16)
    params = init_params(dims, cfg, make_rng(0))
    hcfg = HIndexerConfig(k_prime=200, sample_ratio=0.2, d_prime=cfg.d)
    return RetrievalEngine.from_params(params, cfg, hcfg, seed=5)


def test_checkpoint_round_trip(tmp_path, built):
    path = tmp_path / "ckpt.molc"
    save_checkpoint(path, built.params, built.config)
    params, config = load_checkpoint(path)
    assert config == built.config
    for (name_a, a), (name_b, b) in zip(params.named_tensors(), built.params.named_tensors()):
        assert name_a == name_b
        assert np.array_equal(a, b)


def test_checkpoint_round_trip_with_compression(tmp_path):
    cfg = MoLConfig(k_u=2, k_x=2, d=4, gating_hidden=8)
    dims = TowerDims(n_users=4, n_items=6, d_u=4, d_x=4, proj_hidden=8, k_u_raw=3)
    params = init_params(dims, cfg, make_rng(1))
    path = tmp_path / "ckpt.molc"
    save_checkpoint(path, params, cfg)
    loaded, _ = load_checkpoint(path)
    assert loaded.compression is not None
    assert np.array_equal(loaded.compression.weights, params.compression.weights)


def test_query_deterministic(built):
    a = built.query(3, 10)
    b = built.query(3, 10)
    assert a == b


def test_query_with_full_k_prime_matches_exhaustive(built):
    assert built.query(7, 10, k_prime=built.num_items) == built.full_top_k(7, 10)


def test_two_stage_close_to_full(built):
    # generous candidate budget: the two stages agree on the top 10
    full = {i for i, _ in built.full_top_k(2, 10)}
    two_stage = {i for i, _ in built.query(2, 10, k_prime=400)}
    assert len(full & two_stage) >= 8


def test_results_score_descending(built):
    results = built.query(1, 20)
    scores = [s for _, s in results]
    assert scores == sorted(scores, reverse=True)
