import numpy as np
import pytest

from molr.errors import EmptyCorpusError, OutOfRangeError
from molr.evaluation import numeric_rank
from molr.mol import MoLConfig
from molr.model import (
    TowerDims,
    dot_scores,
    init_dot_params,
    init_params,
    item_forward,
    user_components,
    user_forward,
)
from molr.numerics import l2_normalize_rows, make_rng, silu


CFG = MoLConfig(k_u=2, k_x=2, d=8, gating_hidden=16, dropout_p=0.0)
DIMS = TowerDims(n_users=40, n_items=60, d_u=12, d_x=12, proj_hidden=24)


class TestInit:
    def test_same_seed_bit_identical(self):
        a = init_params(DIMS, CFG, make_rng(7))
        b = init_params(DIMS, CFG, make_rng(7))
        for (name_a, ta), (name_b, tb) in zip(a.named_tensors(), b.named_tensors()):
            assert name_a == name_b
            assert np.array_equal(ta, tb)

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            init_params(TowerDims(n_users=0, n_items=5), CFG, make_rng(0))
        with pytest.raises(EmptyCorpusError):
            init_dot_params(5, 0, 8, make_rng(0))

    def test_table_init_statistics(self):
        # uniform(-1/sqrt(dim), 1/sqrt(dim)) has stdev 1/(sqrt(3) * sqrt(dim))
        dims = TowerDims(n_users=200, n_items=2, d_u=64, d_x=64)
        params = init_params(dims, CFG, make_rng(1))
        table = params.user_table  # 12800 entries
        expected = 1.0 / (np.sqrt(3.0) * np.sqrt(64.0))
        assert abs(table.std() - expected) / expected < 0.10
        assert abs(table.mean()) < 0.01

    def test_mlp_fan_in_scaling(self):
        params = init_params(DIMS, CFG, make_rng(2))
        w1 = params.user_proj.w1  # fan-in 12
        assert np.abs(w1).max() <= 1.0 / np.sqrt(12.0) + 1e-7


class TestUserForward:
    def test_rows_unit_norm(self):
        params = init_params(DIMS, CFG, make_rng(3))
        embs, _ = user_forward(params, 5, CFG)
        np.testing.assert_allclose(np.linalg.norm(embs, axis=1), 1.0, atol=1e-5)

    def test_identical_table_rows_identical_outputs(self):
        params = init_params(DIMS, CFG, make_rng(4))
        params.user_table[7] = params.user_table[3]
        e3, f3 = user_forward(params, 3, CFG)
        e7, f7 = user_forward(params, 7, CFG)
        assert np.array_equal(e3, e7)
        assert np.array_equal(f3, f7)

    def test_matches_manual_matmul_reshape(self):
        params = init_params(DIMS, CFG, make_rng(5))
        embs, feats = user_forward(params, 11, CFG)
        x = params.user_table[11]
        hidden = silu(x @ params.user_proj.w1 + params.user_proj.b1)
        raw = (hidden @ params.user_proj.w2).reshape(CFG.k_u, CFG.d)
        expected = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        np.testing.assert_allclose(embs, expected, rtol=1e-6)
        assert np.array_equal(feats, x)

    def test_out_of_range(self):
        params = init_params(DIMS, CFG, make_rng(6))
        with pytest.raises(OutOfRangeError):
            user_forward(params, 40, CFG)


class TestItemForward:
    def test_rows_unit_norm(self):
        params = init_params(DIMS, CFG, make_rng(7))
        embs, _ = item_forward(params, 2, CFG)
        np.testing.assert_allclose(np.linalg.norm(embs, axis=1), 1.0, atol=1e-5)

    def test_identical_table_rows_identical_outputs(self):
        params = init_params(DIMS, CFG, make_rng(8))
        params.item_table[9] = params.item_table[1]
        e1, g1 = item_forward(params, 1, CFG)
        e9, g9 = item_forward(params, 9, CFG)
        assert np.array_equal(e1, e9)
        assert np.array_equal(g1, g9)

    def test_matches_manual_oracle(self):
        params = init_params(DIMS, CFG, make_rng(9))
        embs, gate = item_forward(params, 30, CFG)
        x = params.item_table[30]
        hidden = silu(x @ params.item_proj.w1 + params.item_proj.b1)
        raw = (hidden @ params.item_proj.w2).reshape(CFG.k_x, CFG.d)
        expected = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        np.testing.assert_allclose(embs, expected, rtol=1e-6)
        gh = silu(x @ params.gating.item_net.w1 + params.gating.item_net.b1)
        np.testing.assert_allclose(gate, gh @ params.gating.item_net.w2, rtol=1e-6)

    def test_out_of_range(self):
        params = init_params(DIMS, CFG, make_rng(10))
        with pytest.raises(OutOfRangeError):
            item_forward(params, -1, CFG)


class TestCompression:
    def test_compressed_forward_matches_manual(self):
        cfg = CFG
        dims = TowerDims(n_users=10, n_items=10, d_u=12, d_x=12, proj_hidden=16, k_u_raw=5)
        params = init_params(dims, cfg, make_rng(11))
        assert params.compression is not None
        assert params.user_proj.out_dim == 5 * cfg.d
        embs = user_components(params, np.asarray([4]), cfg)[0]
        x = params.user_table[4]
        hidden = silu(x @ params.user_proj.w1 + params.user_proj.b1)
        raw = (hidden @ params.user_proj.w2).reshape(5, cfg.d)
        mixed = params.compression.weights.T @ raw
        expected = mixed / np.linalg.norm(mixed, axis=1, keepdims=True)
        np.testing.assert_allclose(embs, expected, rtol=1e-6)


class TestDotBaseline:
    def test_score_matrix_rank_is_exactly_d(self):
        d = 8
        params = init_dot_params(50, 60, d, make_rng(12))
        users = l2_normalize_rows(params.user_table)
        items = l2_normalize_rows(params.item_table)
        matrix = (users @ items.T).astype(np.float64) / params.temperature
        assert numeric_rank(matrix) == d

    def test_dot_scores_match_manual(self):
        params = init_dot_params(5, 7, 4, make_rng(13), temperature=10.0)
        scores = dot_scores(params, 2)
        u = params.user_table[2] / np.linalg.norm(params.user_table[2])
        for i in range(7):
            x = params.item_table[i] / np.linalg.norm(params.item_table[i])
            assert scores[i] == pytest.approx(float(u @ x) / 10.0, rel=1e-6)

    def test_out_of_range(self):
        params = init_dot_params(5, 7, 4, make_rng(14))
        with pytest.raises(OutOfRangeError):
            dot_scores(params, 5)


def test_forward_purity():
    params = init_params(DIMS, CFG, make_rng(15))
    a = user_forward(params, 0, CFG)
    b = user_forward(params, 0, CFG)
    assert np.array_equal(a[0], b[0])
    c = item_forward(params, 0, CFG)
    d = item_forward(params, 0, CFG)
    assert np.array_equal(c[0], d[0])
