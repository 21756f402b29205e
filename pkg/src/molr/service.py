"""FastAPI service wrapping the retrieval engine.

The engine is loaded once at startup and shared read-only across
requests; the query path takes no locks.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from molr.engine import RetrievalEngine
from molr.errors import MolrError
from molr.evaluation import CostQuery, gating_flops, gating_memory
from molr.schemas import (
    GatingCostRequest,
    GatingCostResponse,
    HealthResponse,
    ItemScore,
    QueryRequest,
    QueryResponse,
)


def create_app(engine: RetrievalEngine) -> FastAPI:
    app = FastAPI(title="molr", description="mixture-of-logits retrieval service")

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            num_users=engine.num_users,
            num_items=engine.num_items,
            k_u=engine.config.k_u,
            k_x=engine.config.k_x,
            d=engine.config.d,
        )

    @app.post("/query", response_model=QueryResponse)
    def query(request: QueryRequest) -> QueryResponse:
        if request.user_id >= engine.num_users:
            raise HTTPException(status_code=404, detail=f"unknown user {request.user_id}")
        try:
            results = engine.query(request.user_id, request.k, request.k_prime)
        except MolrError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return QueryResponse(
            user_id=request.user_id,
            k=request.k,
            k_prime=request.k_prime or engine.hconfig.k_prime,
            items=[ItemScore(item_id=i, score=s) for i, s in results],
        )

    @app.post("/cost/gating", response_model=GatingCostResponse)
    def gating_cost(request: GatingCostRequest) -> GatingCostResponse:
        try:
            q = CostQuery(
                B=request.B, X=request.X, D=request.D, D_u=request.D_u, D_x=request.D_x,
                D_xu=request.D_xu, K=request.K, L=request.L,
                flop_convention=request.flop_convention, byte_width=request.byte_width,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return GatingCostResponse(
            flops={
                "non_decomposed": gating_flops(q, decomposed=False),
                "decomposed": gating_flops(q, decomposed=True),
            },
            memory_bytes={
                "non_decomposed": gating_memory(q, decomposed=False),
                "decomposed": gating_memory(q, decomposed=True),
            },
        )

    return app
