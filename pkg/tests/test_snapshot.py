import io
import struct

import numpy as np
import pytest

from molr import snapshot
from molr.numerics import make_rng


def test_matrix_round_trip():
    rng = make_rng(0)
    m = rng.standard_normal((7, 5)).astype(np.float32)
    buf = io.BytesIO()
    snapshot.write_matrix(buf, m)
    buf.seek(0)
    out = snapshot.read_matrix(buf)
    assert np.array_equal(out, m)
    assert out.dtype == np.float32


def test_matrix_header_layout():
    m = np.zeros((2, 3), dtype=np.float32)
    buf = io.BytesIO()
    snapshot.write_matrix(buf, m)
    raw = buf.getvalue()
    assert raw[:4] == b"MOLR"
    version, rows, cols, tag = struct.unpack("<HQQB", raw[4:23])
    assert (version, rows, cols, tag) == (1, 2, 3, 0)
    assert len(raw) == 23 + 2 * 3 * 4


def test_quantized_round_trip():
    rng = make_rng(1)
    codes = rng.integers(-127, 128, (4, 6)).astype(np.int8)
    scales = rng.random(4).astype(np.float32)
    buf = io.BytesIO()
    snapshot.write_quantized_matrix(buf, codes, scales)
    buf.seek(0)
    out_codes, out_scales = snapshot.read_matrix(buf)
    assert np.array_equal(out_codes, codes)
    assert np.array_equal(out_scales, scales)


def test_bad_magic_rejected():
    buf = io.BytesIO(b"XXXX" + b"\x00" * 30)
    with pytest.raises(ValueError, match="magic"):
        snapshot.read_matrix(buf)


def test_container_round_trip(tmp_path):
    rng = make_rng(2)
    sections = {
        "three_d": rng.standard_normal((4, 3, 2)).astype(np.float32),
        "vector": rng.standard_normal(9).astype(np.float32),
        "matrix": rng.standard_normal((5, 5)).astype(np.float32),
        "quant": (
            rng.integers(-10, 10, (3, 4)).astype(np.int8),
            rng.random(3).astype(np.float32),
        ),
    }
    path = tmp_path / "snap.molc"
    snapshot.write_container(path, sections, meta={"kind": "test", "note": 7})
    out, meta = snapshot.read_container(path)
    assert meta == {"kind": "test", "note": 7}
    assert out["three_d"].shape == (4, 3, 2)
    assert np.array_equal(out["three_d"], sections["three_d"])
    assert out["vector"].shape == (9,)
    assert np.array_equal(out["vector"], sections["vector"])
    assert np.array_equal(out["matrix"], sections["matrix"])
    codes, scales = out["quant"]
    assert np.array_equal(codes, sections["quant"][0])
    assert np.array_equal(scales, sections["quant"][1])


def test_container_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ValueError, match="container"):
        snapshot.read_container(path)
