"""First-stage candidate generation by sampled threshold estimation.

Instead of maintaining the exact top-k' over a large corpus, the scan
estimates the k'-th score from a random sample (a seeded permutation
prefix of lambda distinct rows), then returns every item whose first-stage
dot product passes that threshold. With lambda equal to the corpus size
the returned set is a superset of the exact top-k'.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from molr.errors import DimensionMismatchError, OutOfRangeError
from molr.mol import ItemCache
from molr.quant import QuantizedRows, int8_matvec, quantize_vector

Stage1View = Union[np.ndarray, QuantizedRows]


@dataclass(frozen=True)
class HIndexerConfig:
    """Candidate-generation knobs.

    Exactly one of ``lam`` (absolute sample count) or ``sample_ratio``
    (fraction of the corpus) selects the threshold-estimation sample size.
    ``comparator`` is "inclusive" (>=, default: keeps the exact-threshold
    items and preserves the superset guarantee) or "strict" (>).
    ``raw_int_ordering`` ranks quantized scans on raw int32 accumulators
    with per-row scales ignored; the default applies the row scale, which
    is what keeps quantized and float rankings aligned.
    """

    k_prime: int
    lam: Optional[int] = None
    sample_ratio: Optional[float] = None
    d_prime: int = 64
    comparator: str = "inclusive"
    quantized: bool = False
    raw_int_ordering: bool = False

    def __post_init__(self):
        if self.k_prime < 1:
            raise ValueError(f"k_prime must be >= 1, got {self.k_prime}")
        if (self.lam is None) == (self.sample_ratio is None):
            raise ValueError("set exactly one of lam or sample_ratio")
        if self.lam is not None and self.lam < 1:
            raise ValueError(f"lam must be >= 1, got {self.lam}")
        if self.sample_ratio is not None and not 0.0 < self.sample_ratio <= 1.0:
            raise ValueError(f"sample_ratio must be in (0, 1], got {self.sample_ratio}")
        if self.comparator not in ("inclusive", "strict"):
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.d_prime < 1:
            raise ValueError(f"d_prime must be >= 1, got {self.d_prime}")

    def resolve_lambda(self, corpus_size: int) -> int:
        if self.k_prime > corpus_size:
            raise OutOfRangeError(f"k_prime {self.k_prime} exceeds corpus {corpus_size}")
        lam = self.lam if self.lam is not None else max(1, round(self.sample_ratio * corpus_size))
        if not 1 <= lam <= corpus_size:
            raise OutOfRangeError(f"lambda {lam} outside [1, {corpus_size}]")
        return lam


@dataclass(frozen=True)
class CandidateSet:
    """Indices passing the estimated threshold, ascending; never truncated."""

    indices: np.ndarray
    threshold: float
    scanned: int


def nth_largest(values, n: int) -> float:
    """n-th largest value, 1-indexed, duplicates counted with multiplicity."""
    values = np.asarray(values)
    if values.ndim != 1 or not 1 <= n <= values.size:
        raise OutOfRangeError(f"n={n} outside [1, {values.size}]")
    return float(np.partition(values, values.size - n)[values.size - n])


def _view_size_dim(view: Stage1View):
    if isinstance(view, QuantizedRows):
        return view.codes.shape
    view = np.asarray(view)
    if view.ndim != 2:
        raise DimensionMismatchError(f"stage-1 view must be 2-D, got {view.shape}")
    return view.shape


def stage1_scores(view: Stage1View, query: np.ndarray, *, raw_int_ordering: bool = False) -> np.ndarray:
    """First-stage scores of every row against one query.

    Float views use a plain dot product. Quantized views quantize the query
    with a single scale and accumulate in int32; unless ``raw_int_ordering``
    is set, accumulators are multiplied by the per-row scales so that
    cross-row ordering matches the dequantized scores.
    """
    query = np.asarray(query)
    n, d = _view_size_dim(view)
    if query.shape != (d,):
        raise DimensionMismatchError(f"query {query.shape} vs view dim {d}")
    if isinstance(view, QuantizedRows):
        q_codes, _ = quantize_vector(query)
        acc = int8_matvec(view, q_codes)
        if raw_int_ordering:
            return acc
        return acc.astype(np.float32) * view.scales
    return view @ query


def estimate_threshold(
    view: Stage1View,
    query: np.ndarray,
    config: HIndexerConfig,
    rng: np.random.Generator,
) -> float:
    """Score a seeded permutation prefix of lambda rows and take the
    n-th largest with n = max(1, round(k' * lambda / X))."""
    n_items, _ = _view_size_dim(view)
    lam = config.resolve_lambda(n_items)
    sample = rng.permutation(n_items)[:lam]
    if isinstance(view, QuantizedRows):
        sub = QuantizedRows(codes=view.codes[sample], scales=view.scales[sample])
    else:
        sub = view[sample]
    scores = stage1_scores(sub, query, raw_int_ordering=config.raw_int_ordering)
    n = max(1, round(config.k_prime * lam / n_items))
    return nth_largest(scores, n)


def h_indexer(
    view: Stage1View,
    query: np.ndarray,
    config: HIndexerConfig,
    rng: np.random.Generator,
) -> CandidateSet:
    """One full scan: estimate the threshold from a sample, keep passers.

    Scores the corpus exactly once; the threshold comes from the sampled
    subset of that same score array, so the lambda = X superset guarantee
    holds bitwise. The result is not truncated at k'; the second stage
    absorbs any overflow. Asking for k' = X short-circuits to the whole
    corpus (threshold -inf).
    """
    n_items, _ = _view_size_dim(view)
    lam = config.resolve_lambda(n_items)
    if config.k_prime >= n_items:
        return CandidateSet(
            indices=np.arange(n_items), threshold=float("-inf"), scanned=n_items
        )
    scores = stage1_scores(view, query, raw_int_ordering=config.raw_int_ordering)
    sample = rng.permutation(n_items)[:lam]
    n = max(1, round(config.k_prime * lam / n_items))
    t = nth_largest(scores[sample], n)
    if config.comparator == "inclusive":
        mask = scores >= t
    else:
        mask = scores > t
    return CandidateSet(indices=np.nonzero(mask)[0], threshold=float(t), scanned=n_items)


def exact_top_k(
    view: Stage1View,
    query: np.ndarray,
    k: int,
    *,
    raw_int_ordering: bool = False,
) -> np.ndarray:
    """Exact first-stage top-k indices, ties broken toward the smaller id."""
    n_items, _ = _view_size_dim(view)
    if not 1 <= k <= n_items:
        raise OutOfRangeError(f"k={k} outside [1, {n_items}]")
    scores = stage1_scores(view, query, raw_int_ordering=raw_int_ordering)
    return np.argsort(-scores, kind="stable")[:k]


def index_select(cache: ItemCache, indices) -> ItemCache:
    """Gather cache rows for sorted candidate indices into contiguous slices."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size:
        if indices.min() < 0 or indices.max() >= cache.num_items:
            raise OutOfRangeError("candidate index outside the cache")
        if np.any(np.diff(indices) < 0):
            raise OutOfRangeError("candidate indices must be sorted ascending")
    q = None
    if cache.stage1_q is not None:
        q = QuantizedRows(
            codes=np.ascontiguousarray(cache.stage1_q.codes[indices]),
            scales=np.ascontiguousarray(cache.stage1_q.scales[indices]),
        )
    return ItemCache(
        config=cache.config,
        item_embs=np.ascontiguousarray(cache.item_embs[indices]),
        item_gate_pre=np.ascontiguousarray(cache.item_gate_pre[indices]),
        stage1_embs=np.ascontiguousarray(cache.stage1_embs[indices]),
        stage1_q=q,
    )


def stage1_view(cache: ItemCache, config: HIndexerConfig) -> Stage1View:
    """Pick the float or quantized first-stage view the config asks for."""
    if config.quantized:
        if cache.stage1_q is None:
            raise ValueError("cache was built without quantized stage-1 embeddings")
        return cache.stage1_q
    return cache.stage1_embs


def with_k_prime(config: HIndexerConfig, k_prime: int) -> HIndexerConfig:
    return replace(config, k_prime=k_prime)
