"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    num_users: int
    num_items: int
    k_u: int
    k_x: int
    d: int


class QueryRequest(BaseModel):
    user_id: int = Field(ge=0)
    k: int = Field(default=10, ge=1)
    k_prime: Optional[int] = Field(default=None, ge=1)


class ItemScore(BaseModel):
    item_id: int
    score: float


class QueryResponse(BaseModel):
    user_id: int
    k: int
    k_prime: int
    items: List[ItemScore]


class GatingCostRequest(BaseModel):
    B: int = Field(ge=1)
    X: int = Field(ge=1)
    D: int = Field(ge=1)
    D_u: int = Field(ge=1)
    D_x: int = Field(ge=1)
    D_xu: int = Field(ge=1)
    K: int = Field(ge=1)
    L: int = Field(ge=1)
    flop_convention: str = "mac"
    byte_width: int = Field(default=4, ge=1)


class GatingCostResponse(BaseModel):
    flops: Dict[str, int]
    memory_bytes: Dict[str, int]
