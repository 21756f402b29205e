"""Operator command line.

Every subcommand reads the same ``key = value`` config file; a handful of
flags override per-invocation knobs. ``query`` can run against local
artifacts or act as a thin client of a running HTTP service. Exit codes:
0 ok, 2 bad usage or input, 3 missing artifact, 4 internal error.
"""

from __future__ import annotations

import functools
import sys
import time

import click
import numpy as np

from molr import data as data_mod
from molr import engine as engine_mod
from molr import evaluation, model, train
from molr.errors import MolrError
from molr.mol import ItemCache, batch_score_all, build_item_cache
from molr.numerics import make_rng
from molr.runconfig import RunConfig, parse_config

EXIT_USAGE = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_INTERNAL = 4


def _guard(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except FileNotFoundError as exc:
            click.echo(f"error: missing artifact: {exc}", err=True)
            sys.exit(EXIT_MISSING_ARTIFACT)
        except (MolrError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except Exception as exc:  # noqa: BLE001 - last-resort exit-code mapping
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)

    return wrapper


@click.group()
@click.option("--config", "config_path", required=True, type=click.Path(), help="run config file")
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.pass_context
@_guard
def main(ctx: click.Context, config_path: str, seed: int | None) -> None:
    """Mixture-of-logits retrieval toolkit."""
    cfg = parse_config(config_path)
    if seed is not None:
        cfg.values["seed"] = seed
    ctx.obj = cfg


def _require(cfg: RunConfig, key: str) -> str:
    value = cfg[key]
    if value is None:
        raise click.ClickException(f"config key {key!r} is required for this command")
    return value


def _load_engine(cfg: RunConfig, **hindexer_overrides) -> engine_mod.RetrievalEngine:
    params, mol_cfg = engine_mod.load_checkpoint(_require(cfg, "checkpoint_path"))
    cache = ItemCache.load(_require(cfg, "cache_path"))
    return engine_mod.RetrievalEngine(
        params=params,
        config=mol_cfg,
        cache=cache,
        hconfig=cfg.hindexer_config(**hindexer_overrides),
        seed=cfg["seed"],
    )


def _load_split(cfg: RunConfig):
    dataset = data_mod.ingest(
        _require(cfg, "data_path"), min_count=cfg["min_count"], delimiter=cfg["delimiter"]
    )
    return dataset, data_mod.split_leave_one_out(dataset)


@main.command()
@click.option("--out", type=click.Path(), default=None, help="write canonical CSV here")
@click.pass_obj
@_guard
def ingest(cfg: RunConfig, out: str | None) -> None:
    """Parse and filter the interaction file; print corpus statistics."""
    dataset = data_mod.ingest(
        _require(cfg, "data_path"), min_count=cfg["min_count"], delimiter=cfg["delimiter"]
    )
    click.echo(f"users\t{dataset.n_users}")
    click.echo(f"items\t{dataset.n_items}")
    click.echo(f"interactions\t{len(dataset)}")
    if out is not None:
        data_mod.export(dataset, out)
        click.echo(f"wrote\t{out}")


@main.command(name="train")
@click.pass_obj
@_guard
def train_cmd(cfg: RunConfig) -> None:
    """Train the configured model and write a checkpoint."""
    _, split = _load_split(cfg)
    kind = cfg["model"]
    result = train.fit(
        split,
        kind,
        cfg.train_config(),
        mol_config=cfg.mol_config() if kind == "mol" else None,
        dims=cfg.tower_dims(split.n_users, split.n_items) if kind == "mol" else None,
        dot_dim=cfg["d"],
        dot_temperature=cfg["tau"],
        log=click.echo,
    )
    if kind == "mol":
        engine_mod.save_checkpoint(_require(cfg, "checkpoint_path"), result.params, cfg.mol_config())
        click.echo(f"checkpoint\t{cfg['checkpoint_path']}")
    else:
        raise click.ClickException("only 'mol' checkpoints serialize; run eval inline for 'dot'")


@main.command(name="build-index")
@click.pass_obj
@_guard
def build_index(cfg: RunConfig) -> None:
    """Precompute the item cache (optionally with int8 stage-1 rows)."""
    params, mol_cfg = engine_mod.load_checkpoint(_require(cfg, "checkpoint_path"))
    cache = build_item_cache(
        params.item_table, params.item_proj, params.gating.item_net, mol_cfg,
        quantized=cfg["quantized"],
    )
    cache.save(_require(cfg, "cache_path"))
    click.echo(f"cache\t{cfg['cache_path']}\titems\t{cache.num_items}")


@main.command()
@click.option("--user", "user_id", type=int, required=True)
@click.option("--k", type=int, default=10)
@click.option("--k-prime", type=int, default=None)
@click.option("--server", type=str, default=None, help="query a running HTTP service instead")
@click.pass_obj
@_guard
def query(cfg: RunConfig, user_id: int, k: int, k_prime: int | None, server: str | None) -> None:
    """Rank items for one user; emits rank<TAB>item<TAB>score lines."""
    if server is not None:
        import httpx

        resp = httpx.post(
            f"{server.rstrip('/')}/query",
            json={"user_id": user_id, "k": k, "k_prime": k_prime},
            timeout=60.0,
        )
        if resp.status_code != 200:
            raise click.ClickException(f"server returned {resp.status_code}: {resp.text}")
        results = [(row["item_id"], row["score"]) for row in resp.json()["items"]]
    else:
        eng = _load_engine(cfg)
        results = eng.query(user_id, k, k_prime)
    for rank, (item, score) in enumerate(results, start=1):
        click.echo(f"{rank}\t{item}\t{score:.6f}")


@main.command()
@click.option("--port", type=int, default=7474)
@click.pass_obj
@_guard
def serve(cfg: RunConfig, port: int) -> None:
    """Line-protocol batch query server (QUERY <user> <k> / QUIT)."""
    from molr import lineserver

    eng = _load_engine(cfg)
    click.echo(f"listening on {port}")
    lineserver.serve_forever(eng, port)


@main.command(name="serve-http")
@click.option("--port", type=int, default=8000)
@click.option("--host", type=str, default="127.0.0.1")
@click.pass_obj
@_guard
def serve_http(cfg: RunConfig, port: int, host: str) -> None:
    """HTTP service exposing /health, /query, and /cost/gating."""
    import uvicorn

    from molr.service import create_app

    app = create_app(_load_engine(cfg))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command(name="eval")
@click.option("--ks", type=str, default="1,10,50", help="comma-separated hit-rate cutoffs")
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.pass_obj
@_guard
def eval_cmd(cfg: RunConfig, ks: str, csv_path: str | None) -> None:
    """Full-corpus hit rates and MRR on the held-out test pairs."""
    _, split = _load_split(cfg)
    params, mol_cfg = engine_mod.load_checkpoint(_require(cfg, "checkpoint_path"))
    cache = build_item_cache(params.item_table, params.item_proj, params.gating.item_net, mol_cfg)

    def ranker(user_id: int) -> np.ndarray:
        embs = model.user_components(params, np.asarray([user_id]), mol_cfg)
        feats = params.user_table[user_id : user_id + 1]
        return batch_score_all(cache, params.gating, embs, feats)[0]

    k_list = [int(x) for x in ks.split(",")]
    report = evaluation.EvalReport(
        hr=evaluation.hr_at_k(ranker, split.test, k_list),
        mrr=evaluation.mrr(ranker, split.test),
    )
    click.echo(report.to_text(), nl=False)
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8") as f:
            f.write("metric,value\n")
            for name, value in report.to_csv_rows():
                f.write(f"{name},{value}\n")


@main.command()
@click.option("--k", type=int, default=None, help="second-stage depth (default: bench_k)")
@click.option("--k-prime", type=int, default=None, help="single k' point instead of a grid")
@click.option("--k-prime-grid", type=str, default=None, help="comma-separated k' sweep")
@click.option("--sample-ratio", type=float, default=None)
@click.option("--comparator", type=click.Choice(["inclusive", "strict"]), default=None)
@click.option("--quantized/--no-quantized", "quantized", default=None)
@click.pass_obj
@_guard
def bench(
    cfg: RunConfig,
    k: int | None,
    k_prime: int | None,
    k_prime_grid: str | None,
    sample_ratio: float | None,
    comparator: str | None,
    quantized: bool | None,
) -> None:
    """Sweep k' and report recall against full reranking plus throughput.

    CSV on stdout: k_prime,recall,qps.
    """
    overrides = {}
    if sample_ratio is not None:
        overrides.update(sample_ratio=sample_ratio)
        overrides["lambda"] = None
    if comparator is not None:
        overrides.update(comparator=comparator)
    if quantized is not None:
        overrides.update(quantized=quantized)
    eng = _load_engine(cfg, **overrides)
    k = k if k is not None else cfg["bench_k"]
    if k_prime is not None:
        grid = [k_prime]
    else:
        grid_raw = k_prime_grid if k_prime_grid is not None else cfg["bench_k_prime_grid"]
        if grid_raw is None:
            grid = [x for x in (100, 1000, 10_000, eng.num_items) if x <= eng.num_items]
        else:
            grid = [int(x) for x in str(grid_raw).split(",")]
    n_queries = min(cfg["bench_queries"], eng.num_users)
    rng = make_rng(cfg["seed"])
    users = rng.integers(0, eng.num_users, n_queries)
    full = {u: {item for item, _ in eng.full_top_k(int(u), k)} for u in users}
    click.echo("k_prime,recall,qps")
    for k_prime in grid:
        start = time.perf_counter()
        recalls = []
        for u in users:
            got = {item for item, _ in eng.query(int(u), k, k_prime)}
            recalls.append(len(got & full[int(u)]) / len(full[int(u)]))
        elapsed = time.perf_counter() - start
        click.echo(f"{k_prime},{np.mean(recalls):.4f},{n_queries / max(elapsed, 1e-9):.2f}")


@main.command(name="rank-analysis")
@click.option("--users", "n_users", type=int, default=200)
@click.option("--items", "n_items", type=int, default=300)
@click.pass_obj
@_guard
def rank_analysis(cfg: RunConfig, n_users: int, n_items: int) -> None:
    """Numeric rank and explained-variance curve of a sampled score matrix."""
    params, mol_cfg = engine_mod.load_checkpoint(_require(cfg, "checkpoint_path"))
    rng = make_rng(cfg["seed"])
    user_ids = rng.permutation(params.n_users)[:n_users]
    item_ids = np.sort(rng.permutation(params.n_items)[:n_items])
    cache = build_item_cache(
        params.item_table[item_ids], params.item_proj, params.gating.item_net, mol_cfg
    )
    embs = model.user_components(params, user_ids, mol_cfg)
    feats = params.user_table[user_ids]
    scores = batch_score_all(cache, params.gating, embs, feats).astype(np.float64)
    click.echo(f"matrix\t{scores.shape[0]}x{scores.shape[1]}")
    click.echo(f"numeric_rank\t{evaluation.numeric_rank(scores)}")
    for d in (8, 16, 32, 64, 128):
        if d <= min(scores.shape):
            click.echo(f"explained_variance@{d}\t{evaluation.explained_variance(scores, d):.6f}")


@main.command(name="cost-estimate")
@click.option("--batch", "b", type=int, default=2048)
@click.option("--negatives", "x", type=int, default=4096)
@click.option("--d-full", type=int, default=1024)
@click.option("--d-user", type=int, default=768)
@click.option("--d-item", type=int, default=128)
@click.option("--d-cross", type=int, default=128)
@click.option("--hidden", type=int, default=256)
@click.option("--out-width", type=int, default=128)
@click.option("--k-prime", type=int, default=None)
@click.pass_obj
@_guard
def cost_estimate(cfg: RunConfig, b, x, d_full, d_user, d_item, d_cross, hidden, out_width, k_prime) -> None:
    """Analytic gating/runtime cost estimates for the configured model."""
    for convention in ("mac", "fma2"):
        q = evaluation.CostQuery(
            B=b, X=x, D=d_full, D_u=d_user, D_x=d_item, D_xu=d_cross,
            K=hidden, L=out_width, flop_convention=convention,
        )
        for decomposed in (False, True):
            label = "decomposed" if decomposed else "non_decomposed"
            click.echo(
                f"gating_flops[{convention},{label}]\t{evaluation.gating_flops(q, decomposed) / 1e9:.1f} GFLOPs"
            )
    q = evaluation.CostQuery(B=b, X=x, D=d_full, D_u=d_user, D_x=d_item, D_xu=d_cross, K=hidden, L=out_width)
    for decomposed in (False, True):
        label = "decomposed" if decomposed else "non_decomposed"
        click.echo(
            f"gating_memory[{label}]\t{evaluation.gating_memory(q, decomposed) / 1e9:.1f} GB"
        )
    ai = evaluation.arithmetic_intensity(b, cfg["k_prime"], cfg["d_prime"], 4)
    click.echo(f"stage1_arithmetic_intensity\t{ai:.3f}")
    kp = k_prime if k_prime is not None else cfg["k_prime"]
    terms = evaluation.mol_inference_flops(
        cfg["k_u"], cfg["k_x"], cfg["d"], cfg["gating_hidden"], kp,
        d_u=cfg["d_user"], proj_hidden=cfg["proj_hidden"],
    )
    for name, val in terms.items():
        click.echo(f"mol_inference_flops[{name}]\t{val}")


if __name__ == "__main__":
    main()
