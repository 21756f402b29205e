"""Retrieval metrics, score-matrix rank analysis, popularity histograms,
and analytic cost estimators for the gating decomposition and the
memory-bound first-stage dot product.

Rankers are plain callables mapping a user id to a score vector over the
whole corpus; the target item is never removed from the candidate set.
Ranks are 1-indexed with ties broken toward the smaller item id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from molr.errors import (
    DimensionMismatchError,
    EmptyEvalSetError,
    EmptyInputError,
)

Ranker = Callable[[int], np.ndarray]


def rank_of_target(scores: np.ndarray, target: int) -> int:
    """1-indexed full-corpus rank of ``target``, ties to the smaller id."""
    s = scores[target]
    better = int((scores > s).sum())
    tied_before = int((scores[:target] == s).sum())
    return 1 + better + tied_before


def _target_ranks(ranker: Ranker, pairs: Sequence[Tuple[int, int]]) -> np.ndarray:
    if not pairs:
        raise EmptyEvalSetError("no evaluation pairs")
    return np.asarray([rank_of_target(np.asarray(ranker(u)), t) for u, t in pairs])


def hr_at_k(ranker: Ranker, pairs: Sequence[Tuple[int, int]], ks: Iterable[int]) -> Dict[int, float]:
    """Fraction of pairs whose target ranks within the top k, per k."""
    ranks = _target_ranks(ranker, pairs)
    return {int(k): float((ranks <= k).mean()) for k in ks}


def mrr(ranker: Ranker, pairs: Sequence[Tuple[int, int]]) -> float:
    """Mean reciprocal full-corpus rank of the target."""
    ranks = _target_ranks(ranker, pairs)
    return float((1.0 / ranks).mean())


def explained_variance(matrix: np.ndarray, d: int) -> float:
    """Fraction of squared singular-value mass in the top d directions.

    Operates on the raw (uncentered) matrix.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or not 1 <= d <= min(matrix.shape):
        raise DimensionMismatchError(f"d={d} invalid for matrix of shape {matrix.shape}")
    sv = np.linalg.svd(matrix, compute_uv=False)
    total = float((sv**2).sum())
    if total == 0.0:
        return 1.0
    return float((sv[:d] ** 2).sum() / total)


def numeric_rank(matrix: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Count of singular values above rel_tol times the largest."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        raise DimensionMismatchError("matrix must be nonempty")
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int((sv > rel_tol * sv[0]).sum())


def popularity_histogram(
    recommended: Sequence[int],
    item_frequency: np.ndarray,
    num_buckets: int = 10,
) -> np.ndarray:
    """Share of recommendations per log-frequency bucket.

    Items are bucketed by log10(1 + training frequency) into equal-width
    buckets spanning the observed range over the whole corpus; the output
    sums to 1 over the recommendation multiset.
    """
    recommended = np.asarray(recommended, dtype=np.int64)
    item_frequency = np.asarray(item_frequency, dtype=np.float64)
    if recommended.size == 0 or item_frequency.size == 0:
        raise EmptyInputError("need at least one recommendation and one item frequency")
    if np.any(item_frequency < 0):
        raise ValueError("frequencies must be >= 0")
    logf = np.log10(1.0 + item_frequency)
    lo, hi = float(logf.min()), float(logf.max())
    if hi <= lo:
        buckets = np.zeros(recommended.size, dtype=np.int64)
    else:
        width = (hi - lo) / num_buckets
        buckets = np.minimum((logf[recommended] - lo) // width, num_buckets - 1).astype(np.int64)
    shares = np.bincount(buckets, minlength=num_buckets).astype(np.float64)
    return shares / recommended.size


@dataclass(frozen=True)
class CostQuery:
    """Workload description for the gating cost model.

    B: batch size, X: negatives/items per batch, D: undecomposed gating
    input width, D_u / D_x / D_xu: decomposed user, item, and cross input
    widths, K: gating hidden width, L: gating output width.
    """

    B: int
    X: int
    D: int
    D_u: int
    D_x: int
    D_xu: int
    K: int
    L: int
    flop_convention: str = "mac"
    byte_width: int = 4

    def __post_init__(self):
        for name in ("B", "X", "D", "D_u", "D_x", "D_xu", "K", "L"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.flop_convention not in ("mac", "fma2"):
            raise ValueError(f"unknown flop convention {self.flop_convention!r}")


def gating_flops(q: CostQuery, decomposed: bool) -> int:
    """Two-layer gating MLP cost over a (B x X) pair block.

    mac counts one FLOP per multiply-accumulate; fma2 doubles it. Without
    decomposition every pair runs the D-wide net: B*X*K*(D+L). With
    decomposition the user and item nets run once per row and only the
    narrow cross net runs per pair:
    B*K*(D_u+L) + X*K*(D_x+L) + B*X*K*(D_xu+L).
    """
    if decomposed:
        macs = q.B * q.K * (q.D_u + q.L) + q.X * q.K * (q.D_x + q.L) + q.B * q.X * q.K * (q.D_xu + q.L)
    else:
        macs = q.B * q.X * q.K * (q.D + q.L)
    return macs * (2 if q.flop_convention == "fma2" else 1)


def gating_memory(q: CostQuery, decomposed: bool, bytes_per: Optional[int] = None) -> int:
    """Bytes of activation traffic for the gating computation.

    Non-decomposed materializes the (B, X, D) input and (B, X, K) hidden;
    decomposed shrinks the pair block to width D_xu and adds per-row
    user/item activations.
    """
    bp = bytes_per if bytes_per is not None else q.byte_width
    if decomposed:
        cells = q.B * q.X * q.D_xu + q.B * q.X * q.K + q.B * (q.D_u + q.K) + q.X * (q.D_x + q.K)
    else:
        cells = q.B * q.X * q.D + q.B * q.X * q.K
    return cells * bp


def arithmetic_intensity(B: int, X: int, d_prime: int, byte_width: int) -> float:
    """FLOPs per byte moved for a (B x X) batched dot product of width d'.

    2*B*X*d' FLOPs over (B*d' + X*d' + B*X) * byte_width bytes; tends to
    2B/byte_width as X and d' grow, which is why the first stage is
    memory-bound and benefits from batching and narrow dtypes.
    """
    if min(B, X, d_prime, byte_width) < 1:
        raise ValueError("all arguments must be positive")
    flops = 2 * B * X * d_prime
    bytes_moved = (B * d_prime + X * d_prime + B * X) * byte_width
    return flops / bytes_moved


def mol_inference_flops(
    k_u: int,
    k_x: int,
    d: int,
    gating_hidden: int,
    k_prime: int,
    *,
    d_u: int = 64,
    proj_hidden: int = 128,
) -> Dict[str, int]:
    """Per-query mac counts of the non-cached scoring path, by term.

    Item-side projections and item gating pre-activations are cached, so
    the query pays for the user projection, the user gating net, and then
    per candidate the component logits, the cross gating net, the combine,
    and the gated sum. Returns the breakdown plus "total".
    """
    g = k_u * k_x
    terms = {
        "user_emb_proj": d_u * proj_hidden + proj_hidden * (k_u * d),
        "user_gating_net": d_u * gating_hidden + gating_hidden * g,
        "component_logits": k_prime * g * d,
        "cross_gating_net": k_prime * (g * gating_hidden + gating_hidden * g),
        "gating_combine": k_prime * g,
        "weighted_sum": k_prime * g,
    }
    terms["total"] = sum(terms.values())
    return terms


@dataclass
class EvalReport:
    """Flat bundle of retrieval metrics and optional analyses."""

    hr: Dict[int, float]
    mrr: float
    rank_analysis: Optional[Tuple[int, List[float]]] = None  # (numeric rank, explained-variance curve)
    popularity_hist: Optional[np.ndarray] = None
    cost: Optional[Dict[str, float]] = None

    def to_text(self) -> str:
        lines = [f"hr@{k} = {v:.6f}" for k, v in sorted(self.hr.items())]
        lines.append(f"mrr = {self.mrr:.6f}")
        if self.rank_analysis is not None:
            rank, curve = self.rank_analysis
            lines.append(f"numeric_rank = {rank}")
            lines.append("explained_variance = " + ",".join(f"{v:.6f}" for v in curve))
        if self.popularity_hist is not None:
            lines.append("popularity_hist = " + ",".join(f"{v:.6f}" for v in self.popularity_hist))
        if self.cost:
            lines.extend(f"{k} = {v}" for k, v in sorted(self.cost.items()))
        return "\n".join(lines) + "\n"

    def to_csv_rows(self) -> List[Tuple[str, float]]:
        rows: List[Tuple[str, float]] = [(f"hr@{k}", v) for k, v in sorted(self.hr.items())]
        rows.append(("mrr", self.mrr))
        if self.rank_analysis is not None:
            rank, curve = self.rank_analysis
            rows.append(("numeric_rank", float(rank)))
            rows.extend((f"explained_variance@{i + 1}", v) for i, v in enumerate(curve))
        if self.popularity_hist is not None:
            rows.extend(
                (f"popularity_bucket_{i}", float(v)) for i, v in enumerate(self.popularity_hist)
            )
        if self.cost:
            rows.extend((k, float(v)) for k, v in sorted(self.cost.items()))
        return rows
