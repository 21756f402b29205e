"""Text run configuration: one ``key = value`` per line.

Blank lines and ``#`` comments are allowed; unknown keys are errors, and
every value is validated before any command starts work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

from molr.hindexer import HIndexerConfig
from molr.mol import MoLConfig
from molr.model import TowerDims
from molr.train import TrainConfig


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


_SCHEMA = {
    # model / scoring head
    "k_u": int,
    "k_x": int,
    "d": int,
    "tau": float,
    "gating_hidden": int,
    "dropout_p": float,
    "l2_normalized": _parse_bool,
    "d_user": int,
    "d_item": int,
    "proj_hidden": int,
    "model": str,  # mol | dot
    # first stage
    "k_prime": int,
    "sample_ratio": float,
    "lambda": int,
    "d_prime": int,
    "comparator": str,
    "quantized": _parse_bool,
    # training
    "batch_size": int,
    "num_negatives": int,
    "lr": float,
    "epochs": int,
    "seed": int,
    "logq_correction": _parse_bool,
    # data and artifacts
    "data_path": str,
    "delimiter": str,
    "min_count": int,
    "checkpoint_path": str,
    "cache_path": str,
    # bench
    "bench_k": int,
    "bench_k_prime_grid": str,  # comma-separated ints
    "bench_queries": int,
}

_DEFAULTS = {
    "k_u": 4,
    "k_x": 4,
    "d": 32,
    "tau": 20.0,
    "gating_hidden": 128,
    "dropout_p": 0.2,
    "l2_normalized": True,
    "d_user": 64,
    "d_item": 64,
    "proj_hidden": 128,
    "model": "mol",
    "k_prime": 1000,
    "sample_ratio": 0.1,
    "lambda": None,
    "d_prime": 64,
    "comparator": "inclusive",
    "quantized": False,
    "batch_size": 128,
    "num_negatives": 128,
    "lr": 0.001,
    "epochs": 5,
    "seed": 0,
    "logq_correction": False,
    "data_path": None,
    "delimiter": None,
    "min_count": 5,
    "checkpoint_path": None,
    "cache_path": None,
    "bench_k": 100,
    "bench_k_prime_grid": None,
    "bench_queries": 20,
}


@dataclass
class RunConfig:
    """Validated knobs for every subcommand."""

    values: Dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def mol_config(self) -> MoLConfig:
        v = self.values
        return MoLConfig(
            k_u=v["k_u"],
            k_x=v["k_x"],
            d=v["d"],
            tau=v["tau"],
            gating_hidden=v["gating_hidden"],
            dropout_p=v["dropout_p"],
            l2_normalized=v["l2_normalized"],
        )

    def tower_dims(self, n_users: int, n_items: int) -> TowerDims:
        v = self.values
        return TowerDims(
            n_users=n_users,
            n_items=n_items,
            d_u=v["d_user"],
            d_x=v["d_item"],
            proj_hidden=v["proj_hidden"],
        )

    def hindexer_config(self, **overrides) -> HIndexerConfig:
        v = dict(self.values)
        v.update(overrides)
        lam = v.get("lambda")
        return HIndexerConfig(
            k_prime=v["k_prime"],
            lam=lam,
            sample_ratio=None if lam is not None else v["sample_ratio"],
            d_prime=v["d_prime"],
            comparator=v["comparator"],
            quantized=v["quantized"],
        )

    def train_config(self, **overrides) -> TrainConfig:
        v = dict(self.values)
        v.update(overrides)
        return TrainConfig(
            batch_size=v["batch_size"],
            num_negatives=v["num_negatives"],
            lr=v["lr"],
            epochs=v["epochs"],
            seed=v["seed"],
            logq_correction=v["logq_correction"],
        )


def parse_config(path) -> RunConfig:
    """Parse and fully validate a run configuration file."""
    values = dict(_DEFAULTS)
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{line_no}: expected 'key = value', got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _SCHEMA:
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
            try:
                values[key] = _SCHEMA[key](raw)
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: bad value for {key!r}: {exc}") from None

    cfg = RunConfig(values=values)
    # construct every derived config now so bad combinations fail up front
    cfg.mol_config()
    cfg.hindexer_config()
    cfg.train_config()
    if values["model"] not in ("mol", "dot"):
        raise ValueError(f"model must be 'mol' or 'dot', got {values['model']!r}")
    if values["comparator"] not in ("inclusive", "strict"):
        raise ValueError(f"comparator must be 'inclusive' or 'strict', got {values['comparator']!r}")
    if values["bench_k_prime_grid"] is not None:
        try:
            [int(x) for x in str(values["bench_k_prime_grid"]).split(",")]
        except ValueError:
            raise ValueError("bench_k_prime_grid must be comma-separated ints") from None
    return cfg
