import socket
import threading

import pytest

from molr.engine import RetrievalEngine
from molr.hindexer import HIndexerConfig
from molr.lineserver import LineServer, handle_line
from molr.mol import MoLConfig
from molr.model import TowerDims, init_params
from molr.numerics import make_rng


@pytest.fixture(scope="module")
def engine():
    cfg = MoLConfig(k_u=2, k_x=2, d=4, gating_hidden=8, dropout_p=0.0)
    dims = TowerDims(n_users=10, n_items=50, d_u=8, d_x=8, proj_hidden=8)
    params = init_params(dims, cfg, make_rng(2))
    hcfg = HIndexerConfig(k_prime=25, sample_ratio=0.5, d_prime=cfg.d)
    return RetrievalEngine.from_params(params, cfg, hcfg, seed=1)


@pytest.fixture(scope="module")
def server(engine):
    srv = LineServer(engine, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()


def send_lines(port, lines, expect_replies):
    with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
        f = sock.makefile("rw", encoding="utf-8", newline="\n")
        replies = []
        for line in lines:
            f.write(line + "\n")
            f.flush()
            if expect_replies:
                replies.append(f.readline().strip())
        return replies


class TestHandleLine:
    def test_query_ok(self, engine):
        reply = handle_line(engine, "QUERY 0 3")
        assert reply.startswith("OK ")
        items = reply[3:].split()
        assert len(items) == 3
        for token in items:
            item, score = token.split(":")
            int(item), float(score)

    def test_malformed_lines(self, engine):
        assert handle_line(engine, "") == "ERR parse"
        assert handle_line(engine, "FETCH 1 2") == "ERR parse"
        assert handle_line(engine, "QUERY notanint 2") == "ERR parse"
        assert handle_line(engine, "QUERY 1") == "ERR parse"

    def test_unknown_user_in_band(self, engine):
        assert handle_line(engine, "QUERY 999 2").startswith("ERR unknown user")

    def test_bad_k_in_band(self, engine):
        assert handle_line(engine, "QUERY 0 0").startswith("ERR k must be")

    def test_quit_closes(self, engine):
        assert handle_line(engine, "QUIT") is None


class TestServerSocket:
    def test_query_over_socket(self, server):
        replies = send_lines(server.port, ["QUERY 0 1"], expect_replies=True)
        assert replies[0].startswith("OK ")

    def test_malformed_over_socket(self, server):
        replies = send_lines(server.port, ["garbage"], expect_replies=True)
        assert replies[0] == "ERR parse"

    def test_sequential_requests_one_connection(self, server):
        replies = send_lines(server.port, ["QUERY 0 2", "QUERY 1 2"], expect_replies=True)
        assert all(r.startswith("OK ") for r in replies)

    def test_quit_closes_connection(self, server):
        with socket.create_connection(("127.0.0.1", server.port), timeout=10) as sock:
            f = sock.makefile("rw", encoding="utf-8", newline="\n")
            f.write("QUIT\n")
            f.flush()
            assert f.readline() == ""  # EOF

    def test_hundred_concurrent_identical_queries(self, server):
        results = [None] * 100
        errors = []

        def worker(idx):
            try:
                results[idx] = send_lines(server.port, ["QUERY 2 5"], expect_replies=True)[0]
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(100)]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=60)
        assert not errors
        assert all(r == results[0] for r in results)
        assert results[0].startswith("OK ")

    def test_server_survives_malformed_then_serves(self, server):
        send_lines(server.port, ["QUERY broken"], expect_replies=True)
        replies = send_lines(server.port, ["QUERY 0 1"], expect_replies=True)
        assert replies[0].startswith("OK ")
