"""Binary snapshot format for matrices, caches, and checkpoints.

Single-matrix blob layout (little-endian throughout):

    magic "MOLR" | version u16 | rows u64 | cols u64 | dtype u8 | payload

dtype 0 is float32 (payload: rows*cols f32). dtype 1 is int8 with per-row
float32 scales (payload: rows*cols i8 followed by rows f32 scales).

Multi-section containers (item caches, parameter checkpoints) concatenate
length-prefixed matrix blobs behind a JSON manifest listing section names
and shapes:

    magic "MOLC" | version u16 | manifest_len u64 | manifest JSON
    | (blob_len u64 | MOLR blob) per section
"""

from __future__ import annotations

import io
import json
import struct
from typing import BinaryIO, Mapping

import numpy as np

MATRIX_MAGIC = b"MOLR"
CONTAINER_MAGIC = b"MOLC"
VERSION = 1
DTYPE_F32 = 0
DTYPE_I8_ROWSCALED = 1

_HEADER = struct.Struct("<4sHQQB")


def write_matrix(buf: BinaryIO, arr: np.ndarray) -> None:
    """Write a 2-D float array as a dtype-0 blob (cast to float32)."""
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D array, got shape {arr.shape}")
    buf.write(_HEADER.pack(MATRIX_MAGIC, VERSION, arr.shape[0], arr.shape[1], DTYPE_F32))
    buf.write(arr.astype("<f4").tobytes())


def write_quantized_matrix(buf: BinaryIO, codes: np.ndarray, scales: np.ndarray) -> None:
    """Write int8 codes plus per-row float32 scales as a dtype-1 blob."""
    codes = np.ascontiguousarray(codes, dtype=np.int8)
    scales = np.ascontiguousarray(scales, dtype=np.float32)
    if codes.ndim != 2 or scales.shape != (codes.shape[0],):
        raise ValueError("codes must be 2-D with one scale per row")
    buf.write(_HEADER.pack(MATRIX_MAGIC, VERSION, codes.shape[0], codes.shape[1], DTYPE_I8_ROWSCALED))
    buf.write(codes.tobytes())
    buf.write(scales.astype("<f4").tobytes())


def read_matrix(buf: BinaryIO):
    """Read one blob; returns an ndarray (dtype 0) or (codes, scales) (dtype 1)."""
    header = buf.read(_HEADER.size)
    if len(header) != _HEADER.size:
        raise ValueError("truncated matrix header")
    magic, version, rows, cols, tag = _HEADER.unpack(header)
    if magic != MATRIX_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    if tag == DTYPE_F32:
        data = buf.read(rows * cols * 4)
        return np.frombuffer(data, dtype="<f4").reshape(rows, cols).copy()
    if tag == DTYPE_I8_ROWSCALED:
        codes = np.frombuffer(buf.read(rows * cols), dtype=np.int8).reshape(rows, cols).copy()
        scales = np.frombuffer(buf.read(rows * 4), dtype="<f4").copy()
        return codes, scales
    raise ValueError(f"unknown dtype tag {tag}")


def _as_2d(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(1, -1)
    if arr.ndim == 2:
        return arr
    return arr.reshape(-1, arr.shape[-1])


def write_container(path, sections: Mapping[str, object], meta: Mapping | None = None) -> None:
    """Write named sections to ``path``.

    Section values are float ndarrays (stored as dtype 0, original shape
    recorded in the manifest) or ``(codes, scales)`` pairs (dtype 1).
    """
    entries = []
    blobs = []
    for name, value in sections.items():
        buf = io.BytesIO()
        if isinstance(value, tuple):
            codes, scales = value
            write_quantized_matrix(buf, codes, scales)
            entries.append({"name": name, "shape": list(codes.shape), "dtype": "i8"})
        else:
            arr = np.asarray(value)
            write_matrix(buf, _as_2d(arr))
            entries.append({"name": name, "shape": list(arr.shape), "dtype": "f32"})
        blobs.append(buf.getvalue())

    manifest = json.dumps({"meta": dict(meta or {}), "sections": entries}).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CONTAINER_MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<Q", len(manifest)))
        f.write(manifest)
        for blob in blobs:
            f.write(struct.pack("<Q", len(blob)))
            f.write(blob)


def read_container(path):
    """Read a container; returns (sections dict, meta dict).

    Float sections come back with their original manifest shape; quantized
    sections come back as (codes, scales) pairs.
    """
    with open(path, "rb") as f:
        if f.read(4) != CONTAINER_MAGIC:
            raise ValueError(f"{path}: not a snapshot container")
        (version,) = struct.unpack("<H", f.read(2))
        if version != VERSION:
            raise ValueError(f"unsupported container version {version}")
        (mlen,) = struct.unpack("<Q", f.read(8))
        manifest = json.loads(f.read(mlen).decode("utf-8"))
        sections = {}
        for entry in manifest["sections"]:
            (blen,) = struct.unpack("<Q", f.read(8))
            value = read_matrix(io.BytesIO(f.read(blen)))
            if entry["dtype"] == "f32":
                sections[entry["name"]] = value.reshape(entry["shape"])
            else:
                sections[entry["name"]] = value
        return sections, manifest["meta"]
