"""Mixture-of-logits retrieval: scoring, candidate generation, training, evaluation."""

from molr.errors import (
    DimensionMismatchError,
    EmptyAfterFilterError,
    EmptyCandidatesError,
    EmptyCorpusError,
    EmptyEvalSetError,
    EmptyInputError,
    LengthOverflowError,
    MolrError,
    OutOfRangeError,
    ParseError,
    TooFewInteractionsError,
    ZeroNormError,
)
from molr.mol import GatingNetwork, ItemCache, Mlp, MoLConfig, QueryState
from molr.hindexer import CandidateSet, HIndexerConfig

__all__ = [
    "MolrError",
    "ZeroNormError",
    "DimensionMismatchError",
    "OutOfRangeError",
    "LengthOverflowError",
    "EmptyCandidatesError",
    "EmptyCorpusError",
    "EmptyEvalSetError",
    "EmptyInputError",
    "ParseError",
    "EmptyAfterFilterError",
    "TooFewInteractionsError",
    "MoLConfig",
    "Mlp",
    "GatingNetwork",
    "ItemCache",
    "QueryState",
    "HIndexerConfig",
    "CandidateSet",
]

__version__ = "0.1.0"
