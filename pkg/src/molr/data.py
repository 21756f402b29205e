"""Interaction ingestion, leave-one-out splitting, and synthetic corpora.

Input files are text lines ``user,item,rating,timestamp`` (comma or
``::`` separated; the rating field is ignored). Entities with fewer than
``min_count`` interactions are discarded iteratively until a fixpoint,
since dropping a user can push an item below threshold and vice versa.
Surviving ids are remapped densely by ascending original id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from molr.errors import (
    EmptyAfterFilterError,
    ParseError,
    TooFewInteractionsError,
)
from molr.numerics import make_rng


@dataclass
class InteractionSet:
    """Dense-id interaction triples, sorted per user by (timestamp, file order)."""

    interactions: List[Tuple[int, int, int]]  # (user, item, timestamp)
    n_users: int
    n_items: int
    item_frequency: np.ndarray  # per-item counts over these interactions
    user_map: Dict[int, int]  # original -> dense
    item_map: Dict[int, int]

    def __len__(self) -> int:
        return len(self.interactions)


@dataclass
class SplitDataset:
    """Per-user leave-one-out partition of an interaction set."""

    train: List[Tuple[int, int, int]]
    valid: List[Tuple[int, int]]
    test: List[Tuple[int, int]]
    n_users: int
    n_items: int
    train_item_frequency: np.ndarray


def _parse_line(line: str, line_no: int, delimiter: Optional[str]) -> Tuple[int, int, int]:
    sep = delimiter
    if sep is None:
        sep = "::" if "::" in line else ","
    parts = line.split(sep)
    if len(parts) != 4:
        raise ParseError(f"expected 4 fields separated by {sep!r}, got {len(parts)}", line_no)
    try:
        user = int(parts[0])
        item = int(parts[1])
        ts = int(float(parts[3]))
    except ValueError as exc:
        raise ParseError(str(exc), line_no) from None
    return user, item, ts


def ingest(path, min_count: int = 5, delimiter: Optional[str] = None) -> InteractionSet:
    """Parse, filter to fixpoint, and densely remap an interaction file."""
    rows: List[Tuple[int, int, int, int]] = []  # (user, item, ts, file index)
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            user, item, ts = _parse_line(line, line_no, delimiter)
            rows.append((user, item, ts, line_no))

    # iterative filtering: removing one side's stragglers can create new ones
    while True:
        user_counts: Dict[int, int] = {}
        item_counts: Dict[int, int] = {}
        for u, i, _, _ in rows:
            user_counts[u] = user_counts.get(u, 0) + 1
            item_counts[i] = item_counts.get(i, 0) + 1
        kept = [
            r for r in rows if user_counts[r[0]] >= min_count and item_counts[r[1]] >= min_count
        ]
        if len(kept) == len(rows):
            break
        rows = kept
    if not rows:
        raise EmptyAfterFilterError(f"no interactions survive min_count={min_count}")

    user_map = {u: idx for idx, u in enumerate(sorted({r[0] for r in rows}))}
    item_map = {i: idx for idx, i in enumerate(sorted({r[1] for r in rows}))}
    remapped = [(user_map[u], item_map[i], ts, order) for u, i, ts, order in rows]
    remapped.sort(key=lambda r: (r[0], r[2], r[3]))
    interactions = [(u, i, ts) for u, i, ts, _ in remapped]
    freq = np.bincount([i for _, i, _ in interactions], minlength=len(item_map))
    return InteractionSet(
        interactions=interactions,
        n_users=len(user_map),
        n_items=len(item_map),
        item_frequency=freq,
        user_map=user_map,
        item_map=item_map,
    )


def export(dataset: InteractionSet, path) -> None:
    """Write canonical dense-id CSV (rating column fixed at 1)."""
    with open(path, "w", encoding="utf-8") as f:
        for u, i, ts in dataset.interactions:
            f.write(f"{u},{i},1,{ts}\n")


def split_leave_one_out(dataset: InteractionSet) -> SplitDataset:
    """Last interaction per user to test, second-to-last to valid, rest to train.

    Interactions are already per-user time-ordered with file order breaking
    ties. Raises TooFewInteractionsError listing any user with fewer than 3.
    """
    per_user: Dict[int, List[Tuple[int, int, int]]] = {}
    for rec in dataset.interactions:
        per_user.setdefault(rec[0], []).append(rec)
    short = [u for u, recs in per_user.items() if len(recs) < 3]
    if short:
        raise TooFewInteractionsError(sorted(short))
    train: List[Tuple[int, int, int]] = []
    valid: List[Tuple[int, int]] = []
    test: List[Tuple[int, int]] = []
    for u in sorted(per_user):
        recs = per_user[u]
        train.extend(recs[:-2])
        valid.append((u, recs[-2][1]))
        test.append((u, recs[-1][1]))
    freq = np.bincount([i for _, i, _ in train], minlength=dataset.n_items)
    return SplitDataset(
        train=train,
        valid=valid,
        test=test,
        n_users=dataset.n_users,
        n_items=dataset.n_items,
        train_item_frequency=freq,
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Ground-truth generator: a rank-r* score matrix drives the sampling."""

    n_users: int
    n_items: int
    true_rank: int
    interactions_per_user: int
    seed: int = 0

    def __post_init__(self):
        if self.true_rank > min(self.n_users, self.n_items):
            raise ValueError(f"true_rank {self.true_rank} exceeds min(users, items)")
        if self.interactions_per_user > self.n_items:
            raise ValueError("interactions_per_user exceeds the corpus size")


def synthesize(spec: SyntheticSpec) -> Tuple[InteractionSet, np.ndarray]:
    """Sample interactions from softmax rows of a rank-r* matrix.

    Builds S = A @ B^T with standard-normal factors, draws each user's
    items from softmax(S_u) without replacement, and returns both the
    interaction set and S for oracle use. Timestamps record draw order.
    """
    rng = make_rng(spec.seed)
    a = rng.standard_normal((spec.n_users, spec.true_rank))
    b = rng.standard_normal((spec.n_items, spec.true_rank))
    scores = a @ b.T
    interactions: List[Tuple[int, int, int]] = []
    for u in range(spec.n_users):
        row = scores[u] - scores[u].max()
        p = np.exp(row)
        p /= p.sum()
        items = rng.choice(spec.n_items, size=spec.interactions_per_user, replace=False, p=p)
        interactions.extend((u, int(it), t) for t, it in enumerate(items))
    freq = np.bincount([i for _, i, _ in interactions], minlength=spec.n_items)
    dataset = InteractionSet(
        interactions=interactions,
        n_users=spec.n_users,
        n_items=spec.n_items,
        item_frequency=freq,
        user_map={u: u for u in range(spec.n_users)},
        item_map={i: i for i in range(spec.n_items)},
    )
    return dataset, scores
