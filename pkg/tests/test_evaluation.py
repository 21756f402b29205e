import numpy as np
import pytest

from molr.errors import DimensionMismatchError, EmptyEvalSetError, EmptyInputError
from molr.evaluation import (
    CostQuery,
    EvalReport,
    arithmetic_intensity,
    explained_variance,
    gating_flops,
    gating_memory,
    hr_at_k,
    mol_inference_flops,
    mrr,
    numeric_rank,
    popularity_histogram,
    rank_of_target,
)
from molr.numerics import make_rng


def matrix_ranker(matrix):
    return lambda user: matrix[user]


def brute_force_rank(scores, target):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order.index(target) + 1


class TestHitRate:
    def test_rank_one_pair(self):
        scores = np.array([0.1, 0.9, 0.2])
        assert hr_at_k(matrix_ranker(scores[None, :]), [(0, 1)], [1]) == {1: 1.0}

    def test_k_equals_corpus(self):
        rng = make_rng(0)
        matrix = rng.standard_normal((4, 20))
        pairs = [(u, int(rng.integers(0, 20))) for u in range(4)]
        assert hr_at_k(matrix_ranker(matrix), pairs, [20])[20] == 1.0

    def test_matches_brute_force(self):
        rng = make_rng(1)
        matrix = rng.standard_normal((20, 50))
        pairs = [(u, int(rng.integers(0, 50))) for u in range(20)]
        ranker = matrix_ranker(matrix)
        for k in (1, 3, 10, 25):
            expected = np.mean(
                [1.0 if brute_force_rank(matrix[u], t) <= k else 0.0 for u, t in pairs]
            )
            assert hr_at_k(ranker, pairs, [k])[k] == pytest.approx(expected)

    def test_monotone_in_k(self):
        rng = make_rng(2)
        matrix = rng.standard_normal((10, 30))
        pairs = [(u, int(rng.integers(0, 30))) for u in range(10)]
        hr = hr_at_k(matrix_ranker(matrix), pairs, range(1, 31))
        values = [hr[k] for k in range(1, 31)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert values[-1] == 1.0

    def test_empty_pairs(self):
        with pytest.raises(EmptyEvalSetError):
            hr_at_k(matrix_ranker(np.zeros((1, 3))), [], [1])

    def test_tie_break_by_smaller_id(self):
        scores = np.array([0.5, 0.5, 0.1])
        assert rank_of_target(scores, 0) == 1
        assert rank_of_target(scores, 1) == 2


class TestMrr:
    def test_always_rank_one(self):
        matrix = np.array([[0.9, 0.1], [0.8, 0.2]])
        assert mrr(matrix_ranker(matrix), [(0, 0), (1, 0)]) == 1.0

    def test_always_rank_two(self):
        matrix = np.array([[0.9, 0.1], [0.8, 0.2]])
        assert mrr(matrix_ranker(matrix), [(0, 1), (1, 1)]) == 0.5

    def test_matches_brute_force(self):
        rng = make_rng(3)
        matrix = rng.standard_normal((20, 50))
        pairs = [(u, int(rng.integers(0, 50))) for u in range(20)]
        expected = np.mean([1.0 / brute_force_rank(matrix[u], t) for u, t in pairs])
        assert mrr(matrix_ranker(matrix), pairs) == pytest.approx(expected)


class TestExplainedVariance:
    def test_rank_one_outer_product(self):
        rng = make_rng(4)
        matrix = np.outer(rng.standard_normal(10), rng.standard_normal(8))
        assert explained_variance(matrix, 1) == pytest.approx(1.0)

    def test_identity_equal_singular_values(self):
        assert explained_variance(np.eye(100), 64) == pytest.approx(0.64)

    def test_matches_eigendecomposition_oracle(self):
        # independent oracle: eigenvalues of M^T M are squared singular values
        rng = make_rng(5)
        matrix = rng.standard_normal((50, 80))
        eig = np.sort(np.linalg.eigvalsh(matrix @ matrix.T))[::-1]
        for d in (1, 5, 20, 50):
            expected = eig[:d].sum() / eig.sum()
            assert explained_variance(matrix, d) == pytest.approx(expected, abs=1e-6)

    def test_monotone_and_reaches_one(self):
        rng = make_rng(6)
        matrix = rng.standard_normal((12, 9))
        curve = [explained_variance(matrix, d) for d in range(1, 10)]
        assert all(a <= b + 1e-12 for a, b in zip(curve, curve[1:]))
        assert curve[-1] == pytest.approx(1.0)

    def test_dimension_error(self):
        with pytest.raises(DimensionMismatchError):
            explained_variance(np.eye(4), 5)


class TestNumericRank:
    def test_identity(self):
        assert numeric_rank(np.eye(5)) == 5

    def test_outer_product(self):
        rng = make_rng(7)
        assert numeric_rank(np.outer(rng.standard_normal(9), rng.standard_normal(7))) == 1

    def test_dot_baseline_construction_forces_rank_d(self):
        rng = make_rng(8)
        users = rng.standard_normal((50, 8))
        items = rng.standard_normal((60, 8))
        assert numeric_rank(users @ items.T) == 8


class TestPopularityHistogram:
    def test_uniform_frequencies_single_bucket(self):
        shares = popularity_histogram([0, 1, 2], np.full(10, 7.0))
        assert shares.sum() == pytest.approx(1.0)
        assert (shares > 0).sum() == 1
        assert shares.max() == pytest.approx(1.0)

    def test_single_item_recommendations(self):
        freq = np.array([1.0, 10.0, 100.0, 1000.0])
        shares = popularity_histogram([3, 3, 3], freq, num_buckets=4)
        assert shares[-1] == pytest.approx(1.0)

    def test_popularity_ranker_has_larger_top_bucket_share(self):
        # power-law corpus: popularity-proportional recommendations put more
        # mass in the top log-frequency bucket than uniform ones
        rng = make_rng(9)
        n_items = 500
        freq = np.sort(rng.pareto(1.2, n_items) * 10 + 1)[::-1]
        top_by_freq = np.argsort(-freq, kind="stable")[:10]
        pop_recs = np.tile(top_by_freq, 50)
        uniform_recs = rng.integers(0, n_items, 500)
        pop_shares = popularity_histogram(pop_recs, freq)
        uni_shares = popularity_histogram(uniform_recs, freq)
        assert pop_shares[-1] > uni_shares[-1]

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            popularity_histogram([], np.ones(3))


REFERENCE_WORKLOAD = dict(B=2048, X=4096, D=1024, D_u=768, D_x=128, D_xu=128, K=256, L=128)


class TestGatingCosts:
    def test_reference_non_decomposed_flops(self):
        q = CostQuery(**REFERENCE_WORKLOAD)
        flops = gating_flops(q, decomposed=False)
        assert flops == 2048 * 4096 * 256 * (1024 + 128)
        assert abs(flops / 1e9 - 2473.9) / 2473.9 < 0.001

    def test_unit_query(self):
        q = CostQuery(B=1, X=1, D=1, D_u=1, D_x=1, D_xu=1, K=1, L=1)
        assert gating_flops(q, decomposed=False) == 2

    def test_decomposed_reduction_at_least_half(self):
        q = CostQuery(**REFERENCE_WORKLOAD)
        dec = gating_flops(q, decomposed=True)
        non = gating_flops(q, decomposed=False)
        assert dec <= 0.5 * non

    def test_fma2_doubles(self):
        q = CostQuery(**REFERENCE_WORKLOAD)
        q2 = CostQuery(**{**REFERENCE_WORKLOAD, "flop_convention": "fma2"})
        assert gating_flops(q2, decomposed=False) == 2 * gating_flops(q, decomposed=False)
        assert gating_flops(q2, decomposed=True) == 2 * gating_flops(q, decomposed=True)

    def test_decomposed_wins_when_cross_width_small(self):
        rng = make_rng(10)
        for _ in range(20):
            d = int(rng.integers(64, 2048))
            q = CostQuery(
                B=int(rng.integers(128, 4096)),
                X=int(rng.integers(512, 8192)),
                D=d,
                D_u=int(rng.integers(1, d)),
                D_x=int(rng.integers(1, d)),
                D_xu=int(rng.integers(1, max(2, d // 4))),
                K=int(rng.integers(32, 512)),
                L=int(rng.integers(16, 256)),
            )
            assert gating_flops(q, decomposed=True) < gating_flops(q, decomposed=False)

    def test_memory_reference_points(self):
        q = CostQuery(**REFERENCE_WORKLOAD)
        non = gating_memory(q, decomposed=False)
        dec = gating_memory(q, decomposed=True)
        assert abs(non - 44e9) / 44e9 < 0.05
        assert abs(dec - 16e9) / 16e9 < 0.25

    def test_memory_unit_query(self):
        q = CostQuery(B=1, X=1, D=1, D_u=1, D_x=1, D_xu=1, K=1, L=1)
        assert gating_memory(q, decomposed=False) == 8


class TestArithmeticIntensity:
    def test_unit_case(self):
        assert arithmetic_intensity(1, 1, 1, 1) == pytest.approx(2.0 / 3.0)

    def test_asymptote_two_b_over_bytes(self):
        ai = arithmetic_intensity(128, 10**6, 10**6, 1)
        assert abs(ai - 256.0) / 256.0 < 0.01

    def test_byte_width_halves(self):
        a1 = arithmetic_intensity(64, 1000, 64, 1)
        a2 = arithmetic_intensity(64, 1000, 64, 2)
        assert a2 == pytest.approx(a1 / 2.0)


class TestMolInferenceFlops:
    def test_zero_candidates_leaves_user_terms(self):
        terms = mol_inference_flops(8, 8, 32, 128, 0, d_u=50, proj_hidden=512)
        assert terms["component_logits"] == 0
        assert terms["cross_gating_net"] == 0
        assert terms["total"] == terms["user_emb_proj"] + terms["user_gating_net"]

    def test_doubling_k_prime_doubles_cross_terms(self):
        t1 = mol_inference_flops(4, 4, 16, 64, 100)
        t2 = mol_inference_flops(4, 4, 16, 64, 200)
        for key in ("component_logits", "cross_gating_net", "gating_combine", "weighted_sum"):
            assert t2[key] == 2 * t1[key]
        assert t2["user_emb_proj"] == t1["user_emb_proj"]

    def test_reference_model_within_2x(self):
        # per-pair cost of the reference small-model configuration
        terms = mol_inference_flops(8, 8, 32, 128, 1, d_u=50, proj_hidden=512)
        assert 211.7e3 / 2.0 <= terms["total"] <= 211.7e3 * 2.0


class TestEvalReport:
    def test_text_and_csv(self):
        report = EvalReport(
            hr={1: 0.25, 10: 0.5},
            mrr=0.33,
            rank_analysis=(12, [0.5, 0.8, 1.0]),
            popularity_hist=np.array([0.2, 0.8]),
        )
        text = report.to_text()
        assert "hr@1 = 0.250000" in text
        assert "mrr = 0.330000" in text
        assert "numeric_rank = 12" in text
        rows = dict(report.to_csv_rows())
        assert rows["hr@10"] == 0.5
        assert rows["popularity_bucket_1"] == pytest.approx(0.8)

    def test_hit_rates_nondecreasing_invariant(self):
        rng = make_rng(11)
        matrix = rng.standard_normal((8, 40))
        pairs = [(u, int(rng.integers(0, 40))) for u in range(8)]
        hr = hr_at_k(matrix_ranker(matrix), pairs, [1, 5, 10, 40])
        m = mrr(matrix_ranker(matrix), pairs)
        assert 0.0 < m <= 1.0
        assert hr[1] <= hr[5] <= hr[10] <= hr[40] == 1.0
