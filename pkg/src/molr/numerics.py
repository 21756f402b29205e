"""Deterministic numeric primitives shared by every module.

All operations are pure, dtype-preserving (float32 production paths,
float64 for finite-difference validation), and safe to share across
threads. Randomness everywhere in the package flows through ``make_rng``,
a counter-based Philox generator: the same 64-bit seed produces the same
stream on every platform.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from molr.errors import ZeroNormError

DEFAULT_EPS = 1e-12


def make_rng(seed) -> np.random.Generator:
    """Seeded Philox (counter-based) generator.

    ``seed`` may be an int or a sequence of ints (e.g. ``[base, user_id]``)
    to derive independent per-entity streams.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def l2_normalize(v: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Scale ``v`` to unit Euclidean norm.

    Raises ZeroNormError when ``||v|| <= eps``.
    """
    v = np.asarray(v)
    norm = float(np.linalg.norm(v))
    if norm <= eps:
        raise ZeroNormError(f"vector norm {norm!r} <= eps {eps!r}")
    return v / np.asarray(norm, dtype=v.dtype)


def l2_normalize_rows(m: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Normalize each row of ``m`` (any leading shape, last axis is the vector).

    Raises ZeroNormError if any row collapses below ``eps``.
    """
    m = np.asarray(m)
    norms = np.linalg.norm(m, axis=-1, keepdims=True)
    if np.any(norms <= eps):
        raise ZeroNormError("at least one row has norm <= eps")
    return m / norms.astype(m.dtype)


def softmax(v: np.ndarray) -> np.ndarray:
    """Stable softmax of a vector (max-subtraction)."""
    v = np.asarray(v)
    shifted = v - v.max()
    e = np.exp(shifted)
    return e / e.sum()


def softmax_rows(m: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis."""
    m = np.asarray(m)
    shifted = m - m.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def sigmoid(x):
    return expit(x)


def silu(x):
    """x * sigmoid(x)."""
    return x * expit(x)


def silu_grad(x):
    """Derivative of silu: sigmoid(x) * (1 + x * (1 - sigmoid(x)))."""
    s = expit(x)
    return s * (1.0 + x * (1.0 - s))
