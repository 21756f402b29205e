"""Two-stage retrieval engine and artifact persistence.

Checkpoints serialize every parameter tensor as a named snapshot section
with the model configuration in the manifest. The engine wires the
threshold-sampling first stage into mixture-of-logits reranking over one
immutable cache; any number of threads may query it concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from molr import snapshot
from molr.hindexer import HIndexerConfig, h_indexer, stage1_view, with_k_prime
from molr.mol import (
    GatingNetwork,
    ItemCache,
    Mlp,
    MoLConfig,
    CompressionMap,
    QueryState,
    build_item_cache,
    mol_top_k,
)
from molr.model import TowerParams, user_forward
from molr.numerics import make_rng


def save_checkpoint(path, params: TowerParams, config: MoLConfig) -> None:
    sections = dict(params.named_tensors())
    meta = {
        "kind": "checkpoint",
        "config": {
            "k_u": config.k_u,
            "k_x": config.k_x,
            "d": config.d,
            "tau": config.tau,
            "gating_hidden": config.gating_hidden,
            "dropout_p": config.dropout_p,
            "l2_normalized": config.l2_normalized,
        },
    }
    snapshot.write_container(path, sections, meta)


def load_checkpoint(path) -> Tuple[TowerParams, MoLConfig]:
    sections, meta = snapshot.read_container(path)
    if meta.get("kind") != "checkpoint":
        raise ValueError(f"{path}: not a parameter checkpoint")
    config = MoLConfig(**meta["config"])

    def mlp(prefix: str) -> Mlp:
        return Mlp(
            w1=sections[f"{prefix}.w1"],
            b1=sections[f"{prefix}.b1"],
            w2=sections[f"{prefix}.w2"],
        )

    compression = None
    if "compression.weights" in sections:
        compression = CompressionMap(sections["compression.weights"])
    params = TowerParams(
        user_table=sections["user_table"],
        item_table=sections["item_table"],
        user_proj=mlp("user_proj"),
        item_proj=mlp("item_proj"),
        gating=GatingNetwork(
            user_net=mlp("gating.user_net"),
            item_net=mlp("gating.item_net"),
            cross_net=mlp("gating.cross_net"),
        ),
        compression=compression,
    )
    return params, config


@dataclass
class RetrievalEngine:
    """Immutable artifacts plus the two-stage query path."""

    params: TowerParams
    config: MoLConfig
    cache: ItemCache
    hconfig: HIndexerConfig
    seed: int = 0

    @classmethod
    def from_params(
        cls,
        params: TowerParams,
        config: MoLConfig,
        hconfig: HIndexerConfig,
        *,
        seed: int = 0,
    ) -> "RetrievalEngine":
        cache = build_item_cache(
            params.item_table, params.item_proj, params.gating.item_net, config,
            quantized=hconfig.quantized,
        )
        return cls(params=params, config=config, cache=cache, hconfig=hconfig, seed=seed)

    @property
    def num_items(self) -> int:
        return self.cache.num_items

    @property
    def num_users(self) -> int:
        return self.params.n_users

    def query_state(self, user_id: int) -> QueryState:
        embs, feats = user_forward(self.params, user_id, self.config)
        return QueryState(user_embs=embs, gate_features=feats)

    def query(
        self, user_id: int, k: int, k_prime: Optional[int] = None
    ) -> List[Tuple[int, float]]:
        """First-stage candidates, then exact mixture-of-logits top-k.

        The first-stage sampling stream is derived from (seed, user_id) so
        repeated identical queries return byte-identical results.
        """
        hcfg = self.hconfig if k_prime is None else with_k_prime(self.hconfig, k_prime)
        state = self.query_state(user_id)
        if hcfg.k_prime >= self.num_items:
            candidates = np.arange(self.num_items)
        else:
            rng = make_rng([self.seed, user_id])
            stage1_query = state.user_embs.mean(axis=0)
            result = h_indexer(stage1_view(self.cache, hcfg), stage1_query, hcfg, rng)
            candidates = result.indices
            if candidates.size < k:
                candidates = np.arange(self.num_items)
        k_eff = min(k, candidates.size)
        ids, scores = mol_top_k(self.cache, self.params.gating, candidates, state, k_eff)
        return [(int(i), float(s)) for i, s in zip(ids, scores)]

    def full_top_k(self, user_id: int, k: int) -> List[Tuple[int, float]]:
        """Exhaustive mixture-of-logits ranking, no first stage."""
        state = self.query_state(user_id)
        ids, scores = mol_top_k(
            self.cache, self.params.gating, np.arange(self.num_items), state,
            min(k, self.num_items),
        )
        return [(int(i), float(s)) for i, s in zip(ids, scores)]
