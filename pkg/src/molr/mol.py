"""Mixture-of-logits similarity scoring.

A query and an item each carry a small set of unit component embeddings
(``k_u`` user-side, ``k_x`` item-side, all of dimension ``d``). Their
``k_u * k_x`` pairwise dot products form elementary logits; a decomposed
gating network (user net + cached item net + cross net over the logits)
produces a per-pair probability distribution over the logit grid, and the
final similarity is the gated sum of logits. Item-side tensors are
precomputed once per corpus into an immutable :class:`ItemCache`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from molr.errors import (
    DimensionMismatchError,
    EmptyCandidatesError,
    EmptyCorpusError,
    OutOfRangeError,
)
from molr.numerics import l2_normalize_rows, silu, softmax_rows
from molr.quant import QuantizedRows, quantize_rowwise
from molr import snapshot


@dataclass(frozen=True)
class MoLConfig:
    """Shape and regularization knobs for the mixture-of-logits head.

    ``tau`` rescales the normalized logits so gated similarities stay in
    (-1/tau, 1/tau); ``dropout_p`` is applied to the post-softmax gating
    distribution in training mode only.
    """

    k_u: int
    k_x: int
    d: int
    tau: float = 20.0
    gating_hidden: int = 128
    dropout_p: float = 0.2
    l2_normalized: bool = True

    def __post_init__(self):
        if self.k_u < 1 or self.k_x < 1 or self.d < 1:
            raise ValueError(f"component counts and dim must be >= 1, got {self}")
        if self.tau < 1.0:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.gating_hidden < 1:
            raise ValueError(f"gating_hidden must be >= 1, got {self.gating_hidden}")

    @property
    def num_logits(self) -> int:
        return self.k_u * self.k_x


@dataclass
class Mlp:
    """Two-layer feed-forward block: silu(x @ w1 + b1) @ w2 (no output bias)."""

    w1: np.ndarray  # (in, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, out)

    def __post_init__(self):
        if self.w1.shape[1] != self.b1.shape[0] or self.w1.shape[1] != self.w2.shape[0]:
            raise DimensionMismatchError(
                f"inconsistent mlp shapes {self.w1.shape}, {self.b1.shape}, {self.w2.shape}"
            )

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w2.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return silu(x @ self.w1 + self.b1) @ self.w2


@dataclass
class GatingNetwork:
    """User, item, and cross nets whose outputs combine into gating weights.

    All three output width ``k_u * k_x``. The item net is applied once per
    corpus item at cache-build time; the cross net consumes the component
    logits themselves at query time.
    """

    user_net: Mlp
    item_net: Mlp
    cross_net: Mlp

    def __post_init__(self):
        widths = {self.user_net.out_dim, self.item_net.out_dim, self.cross_net.out_dim}
        if len(widths) != 1:
            raise DimensionMismatchError(f"gating nets disagree on output width: {widths}")
        if self.cross_net.in_dim != self.cross_net.out_dim:
            raise DimensionMismatchError(
                "cross net must map the logit grid onto itself, got "
                f"{self.cross_net.in_dim} -> {self.cross_net.out_dim}"
            )


@dataclass(frozen=True)
class CompressionMap:
    """Linear map collapsing k' raw component embeddings into k.

    ``weights[j, i]`` is the contribution of raw embedding j to output
    embedding i.
    """

    weights: np.ndarray  # (k_raw, k)

    def __post_init__(self):
        if self.weights.ndim != 2:
            raise DimensionMismatchError(f"weights must be 2-D, got {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("compression weights must be finite")


def compress_embeddings(src: np.ndarray, cmap: CompressionMap) -> np.ndarray:
    """out[i] = sum_j weights[j, i] * src[j]; src is (k_raw, d)."""
    src = np.asarray(src)
    if src.ndim != 2 or src.shape[0] != cmap.weights.shape[0]:
        raise DimensionMismatchError(
            f"src {src.shape} incompatible with map {cmap.weights.shape}"
        )
    return cmap.weights.T.astype(src.dtype) @ src


def component_logits(user_embs: np.ndarray, item_embs: np.ndarray, tau: float) -> np.ndarray:
    """Pairwise component dot products, scaled by 1/tau.

    ``user_embs`` is (k_u, d); ``item_embs`` is (n, k_x, d). The result is
    (n, k_u * k_x) with entry (i, a * k_x + b) = <f_a, g_b(x_i)> / tau,
    i.e. per-item blocks are user-component-major. Downstream gradient code
    depends on this exact layout.
    """
    user_embs = np.asarray(user_embs)
    item_embs = np.asarray(item_embs)
    if user_embs.ndim != 2 or item_embs.ndim != 3 or user_embs.shape[1] != item_embs.shape[2]:
        raise DimensionMismatchError(
            f"user {user_embs.shape} vs items {item_embs.shape}"
        )
    n, k_x, d = item_embs.shape
    k_u = user_embs.shape[0]
    # (k_u, n * k_x) -> (k_u, n, k_x) -> (n, k_u, k_x)
    flat = user_embs @ item_embs.reshape(n * k_x, d).T
    cl = flat.reshape(k_u, n, k_x).transpose(1, 0, 2).reshape(n, k_u * k_x)
    return cl / np.asarray(tau, dtype=cl.dtype)


def decomposed_gating(
    gating: GatingNetwork,
    user_gate_feat: np.ndarray,
    item_gate_pre: np.ndarray,
    cross_logits: np.ndarray,
    *,
    dropout_p: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    training: bool = False,
) -> np.ndarray:
    """Per-item gating distribution over the logit grid.

    The user net runs once on the raw user gating features; item-net
    outputs arrive precomputed (one row per item); the cross net consumes
    the component logits. Combination is silu(uw * xw + cw) followed by a
    row softmax, so each inference-mode row sums to 1. In training mode,
    inverted dropout zeroes entries with probability ``dropout_p`` and
    rescales survivors by 1/(1-p) without renormalizing.
    """
    item_gate_pre = np.asarray(item_gate_pre)
    cross_logits = np.asarray(cross_logits)
    if item_gate_pre.shape != cross_logits.shape:
        raise DimensionMismatchError(
            f"item gate {item_gate_pre.shape} vs cross logits {cross_logits.shape}"
        )
    uw = gating.user_net(np.asarray(user_gate_feat))
    cw = gating.cross_net(cross_logits)
    pi = softmax_rows(silu(uw[None, :] * item_gate_pre + cw))
    if training and dropout_p > 0.0:
        if rng is None:
            raise ValueError("training-mode dropout requires an rng")
        mask = rng.random(pi.shape) >= dropout_p
        pi = pi * mask / np.asarray(1.0 - dropout_p, dtype=pi.dtype)
    return pi


def mol_score(gating_weights: np.ndarray, logits: np.ndarray) -> np.ndarray:
    """Gated sum of component logits, one similarity per row."""
    gating_weights = np.asarray(gating_weights)
    logits = np.asarray(logits)
    if gating_weights.shape != logits.shape:
        raise DimensionMismatchError(
            f"gating {gating_weights.shape} vs logits {logits.shape}"
        )
    return (gating_weights * logits).sum(axis=-1)


@dataclass(frozen=True)
class QueryState:
    """User-side inputs to scoring: component embeddings plus gating features."""

    user_embs: np.ndarray  # (k_u, d), unit rows when l2-normalized
    gate_features: np.ndarray  # raw user features consumed by the gating user net


@dataclass
class ItemCache:
    """Immutable per-corpus snapshot of every cachable item-side tensor.

    ``stage1_embs`` holds the low-dimensional first-stage embeddings (the
    mean of each item's component embeddings), optionally mirrored as
    rowwise-int8 ``stage1_q``. Rebuilding from the same parameters is
    bit-identical.
    """

    config: MoLConfig
    item_embs: np.ndarray  # (X, k_x, d)
    item_gate_pre: np.ndarray  # (X, k_u * k_x)
    stage1_embs: np.ndarray  # (X, d')
    stage1_q: Optional[QuantizedRows] = None

    def __post_init__(self):
        x = self.item_embs.shape[0]
        if self.item_embs.ndim != 3 or self.item_embs.shape[1:] != (self.config.k_x, self.config.d):
            raise DimensionMismatchError(
                f"item_embs {self.item_embs.shape} inconsistent with config {self.config}"
            )
        if self.item_gate_pre.shape != (x, self.config.num_logits):
            raise DimensionMismatchError(
                f"item_gate_pre {self.item_gate_pre.shape} expected ({x}, {self.config.num_logits})"
            )
        if self.stage1_embs.shape[0] != x:
            raise DimensionMismatchError("stage1_embs row count mismatch")

    @property
    def num_items(self) -> int:
        return self.item_embs.shape[0]

    @property
    def stage1_dim(self) -> int:
        return self.stage1_embs.shape[1]

    def save(self, path) -> None:
        sections = {
            "item_embs": self.item_embs,
            "item_gate_pre": self.item_gate_pre,
            "stage1_embs": self.stage1_embs,
        }
        if self.stage1_q is not None:
            sections["stage1_q"] = (self.stage1_q.codes, self.stage1_q.scales)
        meta = {
            "kind": "item_cache",
            "config": {
                "k_u": self.config.k_u,
                "k_x": self.config.k_x,
                "d": self.config.d,
                "tau": self.config.tau,
                "gating_hidden": self.config.gating_hidden,
                "dropout_p": self.config.dropout_p,
                "l2_normalized": self.config.l2_normalized,
            },
        }
        snapshot.write_container(path, sections, meta)

    @classmethod
    def load(cls, path) -> "ItemCache":
        sections, meta = snapshot.read_container(path)
        if meta.get("kind") != "item_cache":
            raise ValueError(f"{path}: not an item cache snapshot")
        cfg = MoLConfig(**meta["config"])
        q = None
        if "stage1_q" in sections:
            codes, scales = sections["stage1_q"]
            q = QuantizedRows(codes=codes, scales=scales)
        return cls(
            config=cfg,
            item_embs=sections["item_embs"],
            item_gate_pre=sections["item_gate_pre"],
            stage1_embs=sections["stage1_embs"],
            stage1_q=q,
        )


def build_item_cache(
    item_table: np.ndarray,
    item_proj: Mlp,
    item_net: Mlp,
    config: MoLConfig,
    *,
    quantized: bool = False,
) -> ItemCache:
    """Precompute item component embeddings, gating pre-activations, and
    first-stage embeddings for an id-indexed corpus.

    The first-stage embedding of an item is the mean of its k_x component
    embeddings, so the first-stage dot product against a mean user
    embedding equals the unweighted average of that pair's component
    logits (up to the tau factor).
    """
    item_table = np.asarray(item_table)
    if item_table.ndim != 2 or item_table.shape[0] == 0:
        raise EmptyCorpusError(f"item table must be nonempty 2-D, got {item_table.shape}")
    n = item_table.shape[0]
    embs = item_proj(item_table).reshape(n, config.k_x, config.d)
    if config.l2_normalized:
        embs = l2_normalize_rows(embs)
    gate_pre = item_net(item_table)
    stage1 = embs.mean(axis=1)
    q = quantize_rowwise(stage1) if quantized else None
    return ItemCache(
        config=config,
        item_embs=embs.astype(np.float32),
        item_gate_pre=gate_pre.astype(np.float32),
        stage1_embs=stage1.astype(np.float32),
        stage1_q=q,
    )


def score_candidates(
    cache: ItemCache,
    gating: GatingNetwork,
    candidate_ids: np.ndarray,
    query: QueryState,
) -> np.ndarray:
    """Inference-mode similarities for the given candidate item ids."""
    candidate_ids = np.asarray(candidate_ids, dtype=np.int64)
    if candidate_ids.size == 0:
        raise EmptyCandidatesError("no candidates to score")
    if candidate_ids.min() < 0 or candidate_ids.max() >= cache.num_items:
        raise OutOfRangeError("candidate id outside the corpus")
    cl = component_logits(query.user_embs, cache.item_embs[candidate_ids], cache.config.tau)
    pi = decomposed_gating(
        gating, query.gate_features, cache.item_gate_pre[candidate_ids], cl
    )
    return mol_score(pi, cl)


def batch_score_all(
    cache: ItemCache,
    gating: GatingNetwork,
    user_embs: np.ndarray,
    user_feats: np.ndarray,
    *,
    pairs_per_chunk: int = 2_000_000,
) -> np.ndarray:
    """Inference-mode score matrix of many users against the full corpus.

    ``user_embs`` is (U, k_u, d) and ``user_feats`` is (U, d_u). Work is
    chunked so the (pairs x logits) intermediates stay bounded. Returns a
    (U, X) float32 matrix.
    """
    user_embs = np.asarray(user_embs)
    user_feats = np.asarray(user_feats)
    n_users = user_embs.shape[0]
    n_items = cache.num_items
    cfg = cache.config
    g = cfg.num_logits
    uw_all = gating.user_net(user_feats)
    out = np.empty((n_users, n_items), dtype=np.float32)
    users_per_chunk = max(1, pairs_per_chunk // max(n_items, 1))
    flat_items = cache.item_embs.reshape(n_items * cfg.k_x, cfg.d)
    for lo in range(0, n_users, users_per_chunk):
        hi = min(lo + users_per_chunk, n_users)
        block = user_embs[lo:hi]  # (u, k_u, d)
        u = hi - lo
        # (u * k_u, X * k_x) -> (u, X, k_u * k_x), user-component-major blocks
        flat = block.reshape(u * cfg.k_u, cfg.d) @ flat_items.T
        cl = (
            flat.reshape(u, cfg.k_u, n_items, cfg.k_x).transpose(0, 2, 1, 3).reshape(u, n_items, g)
            / np.asarray(cfg.tau, dtype=flat.dtype)
        )
        cw = gating.cross_net(cl.reshape(-1, g)).reshape(u, n_items, g)
        pre = silu(uw_all[lo:hi, None, :] * cache.item_gate_pre[None, :, :] + cw)
        pi = softmax_rows(pre)
        out[lo:hi] = (pi * cl).sum(axis=-1).astype(np.float32)
    return out


def mol_top_k(
    cache: ItemCache,
    gating: GatingNetwork,
    candidate_ids: Sequence[int] | np.ndarray,
    query: QueryState,
    k: int,
):
    """Exact top-k among the candidates by mixture-of-logits similarity.

    Ties break toward the smaller item id. Returns (item ids, scores),
    both length k, score-descending.
    """
    candidate_ids = np.asarray(candidate_ids, dtype=np.int64)
    if candidate_ids.size == 0:
        raise EmptyCandidatesError("no candidates to rank")
    if k < 1 or k > candidate_ids.size:
        raise OutOfRangeError(f"k={k} outside [1, {candidate_ids.size}]")
    scores = score_candidates(cache, gating, candidate_ids, query)
    order = np.lexsort((candidate_ids, -scores))[:k]
    return candidate_ids[order], scores[order]
