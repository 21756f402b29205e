"""Trainable two-tower parameterizations over id-embedding tables.

Both heads look up a per-id embedding and, for the mixture-of-logits
tower, project it through a small MLP into component embeddings. The
dot-product baseline scores L2-normalized table rows directly. Neither
tower consumes features beyond ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from molr.errors import EmptyCorpusError, OutOfRangeError
from molr.mol import CompressionMap, GatingNetwork, Mlp, MoLConfig
from molr.numerics import l2_normalize_rows


@dataclass(frozen=True)
class TowerDims:
    """Sizes of the id tables and projection MLPs feeding the MoL head."""

    n_users: int
    n_items: int
    d_u: int = 64
    d_x: int = 64
    proj_hidden: int = 128
    k_u_raw: Optional[int] = None  # raw user component count before compression


@dataclass
class TowerParams:
    """All trainable tensors of the mixture-of-logits tower."""

    user_table: np.ndarray  # (n_users, d_u)
    item_table: np.ndarray  # (n_items, d_x)
    user_proj: Mlp  # d_u -> proj_hidden -> k_u * d (or k_u_raw * d)
    item_proj: Mlp  # d_x -> proj_hidden -> k_x * d
    gating: GatingNetwork
    compression: Optional[CompressionMap] = None

    @property
    def n_users(self) -> int:
        return self.user_table.shape[0]

    @property
    def n_items(self) -> int:
        return self.item_table.shape[0]

    def named_tensors(self) -> Iterator[Tuple[str, np.ndarray]]:
        yield "user_table", self.user_table
        yield "item_table", self.item_table
        for prefix, mlp in (
            ("user_proj", self.user_proj),
            ("item_proj", self.item_proj),
            ("gating.user_net", self.gating.user_net),
            ("gating.item_net", self.gating.item_net),
            ("gating.cross_net", self.gating.cross_net),
        ):
            yield f"{prefix}.w1", mlp.w1
            yield f"{prefix}.b1", mlp.b1
            yield f"{prefix}.w2", mlp.w2
        if self.compression is not None:
            yield "compression.weights", self.compression.weights

    def tensor(self, name: str) -> np.ndarray:
        for n, t in self.named_tensors():
            if n == name:
                return t
        raise KeyError(name)

    def astype(self, dtype) -> "TowerParams":
        def mlp(m: Mlp) -> Mlp:
            return Mlp(m.w1.astype(dtype), m.b1.astype(dtype), m.w2.astype(dtype))

        comp = None
        if self.compression is not None:
            comp = CompressionMap(self.compression.weights.astype(dtype))
        return TowerParams(
            user_table=self.user_table.astype(dtype),
            item_table=self.item_table.astype(dtype),
            user_proj=mlp(self.user_proj),
            item_proj=mlp(self.item_proj),
            gating=GatingNetwork(
                user_net=mlp(self.gating.user_net),
                item_net=mlp(self.gating.item_net),
                cross_net=mlp(self.gating.cross_net),
            ),
            compression=comp,
        )


@dataclass
class DotBaselineParams:
    """Dot-product baseline: normalized table rows scored at temperature tau."""

    user_table: np.ndarray  # (n_users, d)
    item_table: np.ndarray  # (n_items, d)
    temperature: float = 20.0

    @property
    def n_users(self) -> int:
        return self.user_table.shape[0]

    @property
    def n_items(self) -> int:
        return self.item_table.shape[0]

    def named_tensors(self) -> Iterator[Tuple[str, np.ndarray]]:
        yield "user_table", self.user_table
        yield "item_table", self.item_table

    def astype(self, dtype) -> "DotBaselineParams":
        return DotBaselineParams(
            self.user_table.astype(dtype), self.item_table.astype(dtype), self.temperature
        )


def _init_table(rng: np.random.Generator, n: int, dim: int, dtype) -> np.ndarray:
    bound = 1.0 / np.sqrt(dim)
    return rng.uniform(-bound, bound, (n, dim)).astype(dtype)


def _init_mlp(rng: np.random.Generator, n_in: int, n_hidden: int, n_out: int, dtype) -> Mlp:
    b1 = 1.0 / np.sqrt(n_in)
    b2 = 1.0 / np.sqrt(n_hidden)
    return Mlp(
        w1=rng.uniform(-b1, b1, (n_in, n_hidden)).astype(dtype),
        b1=rng.uniform(-b1, b1, n_hidden).astype(dtype),
        w2=rng.uniform(-b2, b2, (n_hidden, n_out)).astype(dtype),
    )


def init_params(
    dims: TowerDims,
    config: MoLConfig,
    rng: np.random.Generator,
    dtype=np.float32,
) -> TowerParams:
    """Seeded uniform initialization: tables at 1/sqrt(dim), MLPs at 1/sqrt(fan-in)."""
    if dims.n_users < 1 or dims.n_items < 1:
        raise EmptyCorpusError(f"need at least one user and item, got {dims}")
    k_u_out = dims.k_u_raw if dims.k_u_raw is not None else config.k_u
    params = TowerParams(
        user_table=_init_table(rng, dims.n_users, dims.d_u, dtype),
        item_table=_init_table(rng, dims.n_items, dims.d_x, dtype),
        user_proj=_init_mlp(rng, dims.d_u, dims.proj_hidden, k_u_out * config.d, dtype),
        item_proj=_init_mlp(rng, dims.d_x, dims.proj_hidden, config.k_x * config.d, dtype),
        gating=GatingNetwork(
            user_net=_init_mlp(rng, dims.d_u, config.gating_hidden, config.num_logits, dtype),
            item_net=_init_mlp(rng, dims.d_x, config.gating_hidden, config.num_logits, dtype),
            cross_net=_init_mlp(rng, config.num_logits, config.gating_hidden, config.num_logits, dtype),
        ),
        compression=None,
    )
    if dims.k_u_raw is not None:
        bound = 1.0 / np.sqrt(dims.k_u_raw)
        params.compression = CompressionMap(
            rng.uniform(-bound, bound, (dims.k_u_raw, config.k_u)).astype(dtype)
        )
    return params


def init_dot_params(
    n_users: int, n_items: int, d: int, rng: np.random.Generator, temperature: float = 20.0,
    dtype=np.float32,
) -> DotBaselineParams:
    if n_users < 1 or n_items < 1:
        raise EmptyCorpusError(f"need at least one user and item, got {n_users}x{n_items}")
    return DotBaselineParams(
        user_table=_init_table(rng, n_users, d, dtype),
        item_table=_init_table(rng, n_items, d, dtype),
        temperature=temperature,
    )


def user_components(params: TowerParams, user_ids: np.ndarray, config: MoLConfig) -> np.ndarray:
    """Batched user component embeddings, shape (B, k_u, d)."""
    feats = params.user_table[user_ids]
    raw = params.user_proj(feats)
    if params.compression is not None:
        k_raw = params.compression.weights.shape[0]
        raw = np.einsum(
            "jk,bjd->bkd", params.compression.weights, raw.reshape(len(feats), k_raw, config.d)
        ).reshape(len(feats), -1)
    embs = raw.reshape(len(feats), config.k_u, config.d)
    if config.l2_normalized:
        embs = l2_normalize_rows(embs)
    return embs


def item_components(params: TowerParams, item_ids: np.ndarray, config: MoLConfig) -> np.ndarray:
    """Batched item component embeddings, shape (B, k_x, d)."""
    feats = params.item_table[item_ids]
    embs = params.item_proj(feats).reshape(len(feats), config.k_x, config.d)
    if config.l2_normalized:
        embs = l2_normalize_rows(embs)
    return embs


def user_forward(params: TowerParams, user_id: int, config: MoLConfig):
    """Single user forward: (k_u x d component embeddings, gating features)."""
    if not 0 <= user_id < params.n_users:
        raise OutOfRangeError(f"user id {user_id} outside [0, {params.n_users})")
    ids = np.asarray([user_id])
    return user_components(params, ids, config)[0], params.user_table[user_id]


def item_forward(params: TowerParams, item_id: int, config: MoLConfig):
    """Single item forward: (k_x x d component embeddings, gating pre-activations)."""
    if not 0 <= item_id < params.n_items:
        raise OutOfRangeError(f"item id {item_id} outside [0, {params.n_items})")
    ids = np.asarray([item_id])
    embs = item_components(params, ids, config)[0]
    return embs, params.gating.item_net(params.item_table[item_id])


def dot_scores(params: DotBaselineParams, user_id: int) -> np.ndarray:
    """Baseline similarities of one user against the whole corpus."""
    if not 0 <= user_id < params.n_users:
        raise OutOfRangeError(f"user id {user_id} outside [0, {params.n_users})")
    u = l2_normalize_rows(params.user_table[user_id : user_id + 1])[0]
    items = l2_normalize_rows(params.item_table)
    return (items @ u) / np.asarray(params.temperature, dtype=u.dtype)
