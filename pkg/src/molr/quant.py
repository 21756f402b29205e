"""Rowwise symmetric INT8 quantization and integer-domain dot products.

Rows are encoded independently with ``scale = max|row| / 127`` and no zero
point, so dequantization is a single multiply and integer accumulators can
be thresholded without a bias correction. Accumulation is exact in int32
for row lengths up to 131070 (127 * 127 * 131070 < 2**31).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from molr.errors import DimensionMismatchError, LengthOverflowError

MAX_DOT_LENGTH = 131070


@dataclass(frozen=True)
class QuantizedRows:
    """Immutable int8 codes with one float32 scale per row.

    Zero rows are stored with scale 1.0 and all-zero codes so that
    dequantization never divides by zero.
    """

    codes: np.ndarray  # (n, d) int8
    scales: np.ndarray  # (n,) float32

    def __post_init__(self):
        if self.codes.ndim != 2 or self.scales.shape != (self.codes.shape[0],):
            raise DimensionMismatchError(
                f"codes {self.codes.shape} need one scale per row, got {self.scales.shape}"
            )
        if self.codes.shape[1] > MAX_DOT_LENGTH:
            raise LengthOverflowError(
                f"row length {self.codes.shape[1]} exceeds int32-safe bound {MAX_DOT_LENGTH}"
            )

    @property
    def shape(self):
        return self.codes.shape

    def dequantize(self) -> np.ndarray:
        return self.codes.astype(np.float32) * self.scales[:, None]


def quantize_rowwise(matrix: np.ndarray) -> QuantizedRows:
    """Encode each row as int8 with a symmetric per-row scale."""
    matrix = np.asarray(matrix, dtype=np.float32)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"expected 2-D matrix, got shape {matrix.shape}")
    maxabs = np.abs(matrix).max(axis=1)
    scales = np.where(maxabs > 0.0, maxabs / 127.0, 1.0).astype(np.float32)
    codes = np.clip(np.rint(matrix / scales[:, None]), -127, 127).astype(np.int8)
    return QuantizedRows(codes=codes, scales=scales)


def quantize_vector(v: np.ndarray):
    """Encode one vector with a single scale; returns (codes, scale)."""
    q = quantize_rowwise(np.asarray(v, dtype=np.float32).reshape(1, -1))
    return q.codes[0], float(q.scales[0])


def int8_dot(q_row: np.ndarray, q_query: np.ndarray) -> int:
    """Exact int32 dot product of two int8 code vectors.

    The raw accumulator can be compared or thresholded directly, with no
    dequantization step.
    """
    q_row = np.asarray(q_row, dtype=np.int8)
    q_query = np.asarray(q_query, dtype=np.int8)
    if q_row.shape != q_query.shape or q_row.ndim != 1:
        raise DimensionMismatchError(f"shape mismatch {q_row.shape} vs {q_query.shape}")
    if q_row.shape[0] > MAX_DOT_LENGTH:
        raise LengthOverflowError(
            f"length {q_row.shape[0]} exceeds int32-safe bound {MAX_DOT_LENGTH}"
        )
    return int(q_row.astype(np.int32) @ q_query.astype(np.int32))


def int8_matvec(rows: QuantizedRows, q_query: np.ndarray) -> np.ndarray:
    """Raw int32 accumulators of every row against one quantized query."""
    q_query = np.asarray(q_query, dtype=np.int8)
    if q_query.shape != (rows.codes.shape[1],):
        raise DimensionMismatchError(
            f"query length {q_query.shape} does not match rows {rows.codes.shape}"
        )
    return rows.codes.astype(np.int32) @ q_query.astype(np.int32)
